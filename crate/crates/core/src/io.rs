//! Run configuration files and provenance headers.
//!
//! A run configuration is a TOML document with optional `[chain]`, `[bath]`,
//! `[sweep]`, `[oracle]`, `[pst]`, `[spectrum]` and `[tolerances]` sections.
//! Each command reads the sections it needs. Every output file starts with
//! the configuration that produced it, as `# | `-prefixed comment lines that
//! [`parse_provenance`] turns back into a [`RunConfig`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, PerturbationSpec};
use crate::currents::BathConfig;
use crate::error::{Error, Result};
use crate::experiments::{ChainFamily, DecayModel, FamilySpec, SweepPlan, SweepVariable};
use crate::fock::BatteryEntry;
use crate::tolerances::Tolerances;

const PROVENANCE_PREFIX: &str = "# | ";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pst: Option<PstSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Homogeneous,
    Krawtchouk,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<f64>>,
    pub delta: f64,
    /// `[e_min, e_max]` the unperturbed spectrum is mapped onto.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec<f64>>,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ChainSection {
    fn require<T: Clone>(v: &Option<T>, field: &str, family: &str) -> Result<T> {
        v.clone().ok_or_else(|| config_error(format!("chain.{field} is required for family = \"{family}\"")))
    }

    /// The family description used by sweeps; `n_sites` may be absent when
    /// the sweep varies it.
    pub fn family_spec(&self) -> Result<FamilySpec> {
        let family = match self.family {
            FamilyName::Homogeneous => ChainFamily::Homogeneous,
            FamilyName::Krawtchouk => ChainFamily::Krawtchouk { p: Self::require(&self.p, "p", "krawtchouk")? },
            FamilyName::Explicit => {
                let couplings = Self::require(&self.couplings, "couplings", "explicit")?;
                let fields = Self::require(&self.fields, "fields", "explicit")?;
                if fields.len() != couplings.len() + 1 {
                    return Err(config_error(format!(
                        "chain.fields has {} entries but chain.couplings has {}; expected one more field than couplings",
                        fields.len(),
                        couplings.len()
                    )));
                }
                if self.n_sites.is_some_and(|n| n != fields.len()) {
                    return Err(config_error("chain.n_sites disagrees with the length of chain.fields"));
                }
                ChainFamily::Explicit { couplings, fields }
            }
        };
        if self.family != FamilyName::Krawtchouk && self.p.is_some() {
            return Err(config_error("chain.p only applies to family = \"krawtchouk\""));
        }
        if self.family != FamilyName::Explicit && (self.couplings.is_some() || self.fields.is_some()) {
            return Err(config_error("chain.couplings and chain.fields only apply to family = \"explicit\""));
        }
        let mut spec = FamilySpec::new(family, self.n_sites.unwrap_or(0), self.delta);
        spec.window = self.window.map(|[a, b]| (a, b));
        if let Some(pert) = &self.perturbation {
            pert.validate()?;
            spec.perturbation = Some((pert.kind, pert.strength));
        }
        Ok(spec)
    }

    /// The fully specified chain.
    pub fn chain(&self) -> Result<ChainSpec<f64>> {
        let spec = self.family_spec()?;
        let n = match &spec.family {
            ChainFamily::Explicit { fields, .. } => fields.len(),
            _ => self.n_sites.ok_or_else(|| config_error("chain.n_sites is required"))?,
        };
        let mut chain = spec.base_chain(n, None)?;
        if let Some(pert) = &self.perturbation {
            chain = chain.perturbed(pert)?;
        }
        Ok(chain)
    }

    pub fn seed(&self) -> u64 {
        self.perturbation.map(|p| p.seed).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    #[serde(rename = "T_0", default, skip_serializing_if = "Option::is_none")]
    pub t_left: Option<f64>,
    #[serde(default, rename = "beta_0", skip_serializing_if = "Option::is_none")]
    pub beta_left: Option<f64>,
    #[serde(rename = "T_N", default, skip_serializing_if = "Option::is_none")]
    pub t_right: Option<f64>,
    #[serde(default, rename = "beta_N", skip_serializing_if = "Option::is_none")]
    pub beta_right: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, rename = "h_0", skip_serializing_if = "Option::is_none")]
    pub h_left: Option<f64>,
    #[serde(default, rename = "h_N", skip_serializing_if = "Option::is_none")]
    pub h_right: Option<f64>,
    #[serde(default = "one")]
    pub lambda: f64,
}

fn one() -> f64 {
    1.0
}

fn inverse_temperature(t: Option<f64>, beta: Option<f64>, side: &str) -> Result<Option<f64>> {
    match (t, beta) {
        (Some(_), Some(_)) => Err(config_error(format!("bath: give either T_{side} or beta_{side}, not both"))),
        (Some(t), None) => {
            if !(t > 0.0) {
                return Err(config_error(format!("bath.T_{side} = {t} must be positive")));
            }
            Ok(Some(1.0 / t))
        }
        (None, b) => Ok(b),
    }
}

impl BathSection {
    /// Resolves to a bath configuration. With `left_swept` the left
    /// temperature may be omitted; it is then a placeholder equal to the
    /// right one, to be overwritten by the sweep.
    pub fn bath(&self, left_swept: bool) -> Result<BathConfig<f64>> {
        let right = inverse_temperature(self.t_right, self.beta_right, "N")?
            .ok_or_else(|| config_error("bath: one of T_N or beta_N is required"))?;
        let left = match inverse_temperature(self.t_left, self.beta_left, "0")? {
            Some(b) => b,
            None if left_swept => right,
            None => return Err(config_error("bath: one of T_0 or beta_0 is required")),
        };
        let (h0, hn) = match (self.h, self.h_left, self.h_right) {
            (Some(h), None, None) => (h, h),
            (None, Some(a), Some(b)) => (a, b),
            (None, None, None) => (1.0, 1.0),
            _ => return Err(config_error("bath: give either h or both h_0 and h_N")),
        };
        BathConfig::new(left, right, h0, hn, self.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// `M(H + delta)` statistics.
    M,
    Currents,
    Kappa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        log: bool,
    },
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            GridSpec::Values(ref v) => Ok(v.clone()),
            GridSpec::Range { start, stop, count, log } => {
                if count < 2 {
                    return Err(config_error("sweep.grid.count must be at least 2"));
                }
                if log && !(start > 0.0 && stop > 0.0) {
                    return Err(config_error("a logarithmic grid needs positive endpoints"));
                }
                let (a, b) = if log { (start.ln(), stop.ln()) } else { (start, stop) };
                let mut v: Vec<f64> = (0..count)
                    .map(|i| {
                        let v = a + (b - a) * i as f64 / (count - 1) as f64;
                        if log {
                            v.exp()
                        } else {
                            v
                        }
                    })
                    .collect();
                // keep the endpoints exact
                v[0] = start;
                v[count - 1] = stop;
                Ok(v)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub kind: SweepKind,
    pub variable: SweepVariable,
    pub grid: GridSpec,
    #[serde(default = "one_usize")]
    pub replicates: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub report_std: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayModel>,
    /// Chains to sweep side by side; defaults to the `[chain]` section.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<ChainSection>,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    /// Entries to run; the default battery when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<BatteryEntry>>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PstSection {
    /// Transfer time, `pi` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    /// Whether perfect transfer is expected; a mismatch fails the check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<bool>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Include every wavefunction component, not just the end rows.
    #[serde(default)]
    pub wavefunctions: bool,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_error(e.to_string()))
    }

    pub fn chain_section(&self) -> Result<&ChainSection> {
        self.chain.as_ref().ok_or_else(|| config_error("missing [chain] section"))
    }

    pub fn bath_section(&self) -> Result<&BathSection> {
        self.bath.as_ref().ok_or_else(|| config_error("missing [bath] section"))
    }

    /// Overrides every seed in the configuration.
    pub fn apply_seed(&mut self, seed: u64) {
        if let Some(p) = self.chain.as_mut().and_then(|c| c.perturbation.as_mut()) {
            p.seed = seed;
        }
        if let Some(s) = self.sweep.as_mut() {
            s.base_seed = seed;
        }
        self.oracle.get_or_insert_with(OracleSection::default).seed = seed;
    }

    pub fn sweep_plan(&self) -> Result<(SweepKind, SweepPlan)> {
        let s = self.sweep.as_ref().ok_or_else(|| config_error("missing [sweep] section"))?;
        let sections: Vec<&ChainSection> =
            if s.series.is_empty() { vec![self.chain_section()?] } else { s.series.iter().collect() };
        let families = sections.into_iter().map(ChainSection::family_spec).collect::<Result<Vec<_>>>()?;
        // M does not depend on the baths, so an M sweep may omit them
        let bath = match (&self.bath, s.kind) {
            (None, SweepKind::M) => BathConfig::symmetric(1.0, 1.0, 1.0, 1.0)?,
            _ => self.bath_section()?.bath(s.variable == SweepVariable::T0)?,
        };
        let mut plan = SweepPlan::new(families, s.variable, s.grid.values()?, bath);
        plan.replicates = s.replicates;
        plan.base_seed = s.base_seed;
        plan.report_std = s.report_std;
        plan.fit = s.fit;
        plan.validate()?;
        Ok((s.kind, plan))
    }

    /// Provenance lines (without the `# ` comment marker): a version line,
    /// then the configuration itself.
    pub fn provenance(&self) -> Result<Vec<String>> {
        let mut out = vec![format!("xxness {}", env!("CARGO_PKG_VERSION")), "config:".to_string()];
        out.extend(self.to_toml()?.lines().map(|l| format!("| {l}")));
        Ok(out)
    }
}

/// Recovers the configuration recorded in an output file's header.
pub fn parse_provenance(text: &str) -> Result<RunConfig> {
    let body: Vec<&str> = text
        .lines()
        .filter_map(|l| l.strip_prefix(PROVENANCE_PREFIX).or_else(|| (l == PROVENANCE_PREFIX.trim_end()).then_some("")))
        .collect();
    if body.is_empty() {
        return Err(config_error("no provenance block found"));
    }
    RunConfig::parse(&body.join("\n"))
}

/// Resolves an output path: the command-line value, then the configuration's.
pub fn output_path(cli: Option<&Path>, config: &RunConfig) -> Option<PathBuf> {
    cli.map(Path::to_path_buf).or_else(|| config.output.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3: &str = r#"
output = "high_gap.csv"

[chain]
family = "krawtchouk"
n_sites = 51
p = 0.5
delta = 0.1

[bath]
T_N = 10.0
h = 1.0
lambda = 1.0

[sweep]
kind = "currents"
variable = "T_0"
grid = { start = 10.0, stop = 10000.0, count = 31, log = true }

[[sweep.series]]
family = "krawtchouk"
n_sites = 51
p = 0.3
delta = 0.1

[[sweep.series]]
family = "krawtchouk"
n_sites = 51
p = 0.7
delta = 0.1

[tolerances]
gibbs = 1e-9
"#;

    #[test]
    fn parses_and_round_trips_through_provenance() {
        let cfg = RunConfig::parse(FIG3).unwrap();
        assert_eq!(cfg.tolerances.gibbs, 1e-9);
        let (kind, plan) = cfg.sweep_plan().unwrap();
        assert_eq!(kind, SweepKind::Currents);
        assert_eq!(plan.families.len(), 2);
        assert_eq!(plan.grid.len(), 31);
        assert!((plan.grid[30] - 1e4).abs() < 1e-9);

        let header: Vec<String> = cfg.provenance().unwrap().iter().map(|l| format!("# {l}")).collect();
        let header = header.join("\n");
        let text = format!("{header}\nseries,T_0\nx,1\n");
        assert_eq!(parse_provenance(&text).unwrap(), cfg);
    }

    #[test]
    fn temperature_and_beta_together_are_rejected() {
        let b = BathSection { t_left: Some(1.0), beta_left: Some(1.0), ..bath() };
        assert!(matches!(b.bath(false), Err(Error::Config(_))));
        let b = BathSection { t_left: None, ..bath() };
        assert!(b.bath(false).is_err());
        assert!(b.bath(true).is_ok());
    }

    fn bath() -> BathSection {
        BathSection {
            t_left: Some(2.0),
            beta_left: None,
            t_right: Some(1.0),
            beta_right: None,
            h: None,
            h_left: None,
            h_right: None,
            lambda: 1.0,
        }
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = RunConfig::parse("[chain]\nfamily = \"explicit\"\nfields = [0.0, 0.0]\ndelta = 1.0\n")
            .unwrap()
            .chain_section()
            .unwrap()
            .chain()
            .unwrap_err();
        assert!(err.to_string().contains("chain.couplings"), "{err}");
        let err = RunConfig::parse("[chain]\nfamily = \"homogeneous\"\nn_site = 3\ndelta = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("n_site"), "{err}");
        let err = RunConfig::parse("[chain]\nfamily = \"explicit\"\ncouplings = [1.0]\nfields = [0.0]\ndelta = 1.0\n")
            .unwrap()
            .chain_section()
            .unwrap()
            .chain()
            .unwrap_err();
        assert!(err.to_string().contains("one more field"), "{err}");
    }

    #[test]
    fn seeds_are_overridden_everywhere() {
        let mut cfg = RunConfig::parse(FIG3).unwrap();
        cfg.chain.as_mut().unwrap().perturbation = Some(PerturbationSpec::random(0.5, 1));
        cfg.apply_seed(42);
        assert_eq!(cfg.chain.as_ref().unwrap().seed(), 42);
        assert_eq!(cfg.sweep.as_ref().unwrap().base_seed, 42);
        assert_eq!(cfg.oracle.as_ref().unwrap().seed, 42);
    }
}
