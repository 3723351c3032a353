use std::fmt::Write as _;
use std::path::Path;

use xxness::currents::CurrentReport;
use xxness::experiments::{
    currents_table, ensemble_table, kappa_table, sweep_currents_vs_temperature, sweep_kappa_regimes, sweep_m_vs_size,
    Table,
};
use xxness::fock::{default_battery, run_battery, run_chain};
use xxness::io::{RunConfig, SweepKind};
use xxness::spectral::diagonalize;
use xxness::Result;

/// Command output and whether every check in it passed.
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

impl Outcome {
    fn passed(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

/// Writes the output to `path`, or hands it back for standard output.
pub fn emit(outcome: Outcome, path: Option<&Path>) -> Result<Outcome> {
    match path {
        Some(p) => {
            std::fs::write(p, &outcome.text)?;
            Ok(Outcome { text: String::new(), ok: outcome.ok })
        }
        None => Ok(outcome),
    }
}

fn with_provenance(config: &RunConfig, mut table: Table) -> Result<String> {
    table.provenance = config.provenance()?;
    Ok(table.to_csv_string())
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn spectrum(config: &RunConfig, wavefunctions_flag: bool) -> Result<Outcome> {
    let chain = config.chain_section()?.chain()?;
    let sd = diagonalize(&chain)?;
    let full = wavefunctions_flag || config.spectrum.is_some_and(|s| s.wavefunctions);
    let n = sd.n_sites();
    let mut header = vec!["k".to_string(), "x_k".into(), "x_k_plus_delta".into(), "phi_0".into(), "phi_N".into()];
    if full {
        header.extend((0..n).map(|i| format!("site_{i}")));
    }
    let mut table = Table { provenance: Vec::new(), notes: Vec::new(), header, rows: Vec::new() };
    let energies = sd.energies();
    for (k, &e) in energies.iter().enumerate() {
        let mut row = vec![k.to_string(), num(sd.eigenvalues()[k]), num(e), num(sd.first_row()[k]), num(sd.last_row()[k])];
        if full {
            row.extend((0..n).map(|i| num(sd.wavefunctions()[[i, k]])));
        }
        table.rows.push(row);
    }
    Ok(Outcome::passed(with_provenance(config, table)?))
}

pub fn currents(config: &RunConfig) -> Result<Outcome> {
    let chain = config.chain_section()?.chain()?;
    let bath = config.bath_section()?.bath(false)?;
    let sd = diagonalize(&chain)?;
    let report = CurrentReport::evaluate(&sd, &bath)?;
    let (keys, values): (Vec<&str>, Vec<String>) = report.key_values().into_iter().unzip();
    let mut table = Table::new(&keys);
    table.rows.push(values);
    Ok(Outcome::passed(with_provenance(config, table)?))
}

pub fn sweep(config: &RunConfig) -> Result<Outcome> {
    let (kind, plan) = config.sweep_plan()?;
    let table = match kind {
        SweepKind::M => ensemble_table(&plan, &sweep_m_vs_size(&plan)?),
        SweepKind::Currents => currents_table(&plan, &sweep_currents_vs_temperature(&plan)?),
        SweepKind::Kappa => kappa_table(&plan, &sweep_kappa_regimes(&plan)?),
    };
    Ok(Outcome::passed(with_provenance(config, table)?))
}

pub fn oracle(config: &RunConfig) -> Result<Outcome> {
    let section = config.oracle.clone().unwrap_or_default();
    let verdicts = match &config.chain {
        Some(chain_section) => {
            let chain = chain_section.chain()?;
            let bath = config.bath_section()?.bath(false)?;
            vec![run_chain("chain", &chain, &bath, &config.tolerances, section.seed)?]
        }
        None => {
            let entries = section.entries.clone().unwrap_or_else(|| default_battery(section.seed));
            run_battery(&entries, &config.tolerances, section.seed)?
        }
    };
    let mut text = String::new();
    for v in &verdicts {
        let line = serde_json::to_string(v).map_err(|e| xxness::Error::Numeric(e.to_string()))?;
        let _ = writeln!(text, "{line}");
    }
    Ok(Outcome { text, ok: verdicts.iter().all(|v| v.passed) })
}

pub fn pst_check(config: &RunConfig) -> Result<Outcome> {
    let chain = config.chain_section()?.chain()?;
    let sd = diagonalize(&chain)?;
    let pst = config.pst.unwrap_or_default();
    let time = pst.time.unwrap_or(std::f64::consts::PI);
    let fidelity = sd.transfer_fidelity(time);
    let perfect = (1.0 - fidelity).abs() <= config.tolerances.transfer_fidelity;
    let mut table = Table::new(&["n_sites", "time", "fidelity", "perfect"]);
    table.rows.push(vec![sd.n_sites().to_string(), num(time), num(fidelity), perfect.to_string()]);
    let ok = pst.expect.is_none_or(|e| e == perfect);
    Ok(Outcome { text: with_provenance(config, table)?, ok })
}
