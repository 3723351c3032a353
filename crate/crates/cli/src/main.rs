mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xxness::io::RunConfig;

/// Steady-state currents of open XX spin chains.
#[derive(Debug, Parser)]
#[command(name = "xxness", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps and the oracle battery.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-particle spectrum and end-site wavefunctions as CSV.
    Spectrum {
        /// Also write every wavefunction component.
        #[arg(long)]
        wavefunctions: bool,
    },
    /// Flows, bounds and conductivity for one chain and bath pair.
    Currents,
    /// Parameter sweep described by the `[sweep]` section.
    Sweep,
    /// Exact Fock-space checks, one JSON record per case.
    Oracle,
    /// End-to-end transfer fidelity.
    PstCheck,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(commands::Outcome { text, ok }) => {
            if !text.is_empty() {
                print!("{text}");
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> xxness::Result<commands::Outcome> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| xxness::Error::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.apply_seed(seed);
    }
    let output = xxness::io::output_path(cli.output.as_deref(), &config);
    let outcome = match cli.command {
        Command::Spectrum { wavefunctions } => commands::spectrum(&config, wavefunctions)?,
        Command::Currents => commands::currents(&config)?,
        Command::Sweep => commands::sweep(&config)?,
        Command::Oracle => commands::oracle(&config)?,
        Command::PstCheck => commands::pst_check(&config)?,
    };
    commands::emit(outcome, output.as_deref())
}
