//! Batch runs of the exact oracle against the closed-form currents.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_dissipator_superoperator, build_fock_operators_for_chain, gibbs_state, ness_density_matrix};
use super::{oracle_currents, trace_distance, verify_stationarity};
use crate::chain::{ChainSpec, PerturbationSpec};
use crate::currents::{heat_flow, ness_coefficients, spin_flow, BathConfig};
use crate::error::Result;
use crate::rng::derive_seed;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleFamily {
    Homogeneous,
    Krawtchouk { p: f64 },
    /// Homogeneous chain plus uniform random fields of the given strength.
    RandomField { strength: f64, seed: u64 },
}

impl OracleFamily {
    pub fn chain(&self, n_sites: usize, delta: f64) -> Result<ChainSpec<f64>> {
        match *self {
            OracleFamily::Homogeneous => ChainSpec::homogeneous(n_sites, delta),
            OracleFamily::Krawtchouk { p } => ChainSpec::krawtchouk(n_sites, p, delta),
            OracleFamily::RandomField { strength, seed } => {
                ChainSpec::homogeneous(n_sites, delta)?.perturbed(&PerturbationSpec::random(strength, seed))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            OracleFamily::Homogeneous => "homogeneous".into(),
            OracleFamily::Krawtchouk { p } => format!("krawtchouk(p={p})"),
            OracleFamily::RandomField { strength, .. } => format!("random-field(xi={strength})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryEntry {
    pub family: OracleFamily,
    pub n_sites: usize,
    pub delta: f64,
    pub beta_left: f64,
    pub beta_right: f64,
    #[serde(default = "unit")]
    pub h: f64,
    #[serde(default = "unit")]
    pub lambda: f64,
}

fn unit() -> f64 {
    1.0
}

/// One record per battery entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleVerdict {
    pub family: String,
    pub n_sites: usize,
    pub beta_left: f64,
    pub beta_right: f64,
    pub stationarity_residual: f64,
    pub dissipator_norm: f64,
    pub stationarity_relative: f64,
    pub gibbs_trace_distance: Option<f64>,
    pub spin_oracle_left: f64,
    pub spin_oracle_right: f64,
    pub heat_oracle_left: f64,
    pub heat_oracle_right: f64,
    pub spin_closed_form: f64,
    pub heat_closed_form: f64,
    pub spin_error: f64,
    pub heat_error: f64,
    pub spin_balance: f64,
    pub heat_balance: f64,
    pub lindblad_reconstruction: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// `{homogeneous, Krawtchouk p = 0.3, 0.5, random field 0.4} x {2, 3, 4 sites}
/// x {(0.1, 0.2), (1, 2), (0.5, 0.5)}` with `delta = 2`.
pub fn default_battery(seed: u64) -> Vec<BatteryEntry> {
    let mut out = Vec::new();
    for (fi, family) in [
        OracleFamily::Homogeneous,
        OracleFamily::Krawtchouk { p: 0.3 },
        OracleFamily::Krawtchouk { p: 0.5 },
        OracleFamily::RandomField { strength: 0.4, seed: 0 },
    ]
    .into_iter()
    .enumerate()
    {
        for n_sites in 2..=4 {
            for (beta_left, beta_right) in [(0.1, 0.2), (1.0, 2.0), (0.5, 0.5)] {
                let family = match family {
                    OracleFamily::RandomField { strength, .. } => {
                        OracleFamily::RandomField { strength, seed: derive_seed(seed, fi as u64, n_sites as u64) }
                    }
                    f => f,
                };
                out.push(BatteryEntry { family, n_sites, delta: 2.0, beta_left, beta_right, h: 1.0, lambda: 1.0 });
            }
        }
    }
    out
}

/// `|oracle - closed| / |closed|`, or the absolute difference when the
/// closed form vanishes.
fn discrepancy(oracle: f64, closed: f64) -> f64 {
    let diff = (oracle - closed).abs();
    if closed == 0.0 {
        diff
    } else {
        diff / closed.abs()
    }
}

pub fn run_entry(entry: &BatteryEntry, tol: &Tolerances, seed: u64) -> Result<OracleVerdict> {
    let chain = entry.family.chain(entry.n_sites, entry.delta)?;
    let bath = BathConfig::symmetric(entry.beta_left, entry.beta_right, entry.h, entry.lambda)?;
    run_chain(&entry.family.label(), &chain, &bath, tol, seed)
}

/// Runs every oracle check on one chain and bath configuration.
pub fn run_chain(
    label: &str,
    chain: &ChainSpec<f64>,
    bath: &BathConfig<f64>,
    tol: &Tolerances,
    seed: u64,
) -> Result<OracleVerdict> {
    let (ops, sd) = build_fock_operators_for_chain(chain)?;
    let bath = *bath;
    let coeffs = ness_coefficients(&sd, &bath)?;
    let diss = build_dissipator_superoperator(&ops, &coeffs, bath.lambda)?;
    let ness = ness_density_matrix(&ops, &coeffs)?;
    let stationarity = verify_stationarity(&diss, &ness.rho, seed)?;
    let equal = bath.beta_left == bath.beta_right;
    let gibbs = if equal {
        Some(trace_distance(&ops, &ness.rho, &gibbs_state(&ops, bath.beta_left)?)?)
    } else {
        None
    };
    let cur = oracle_currents(&diss, &ness.rho);
    let spin = spin_flow(&sd, &bath)?;
    let heat = heat_flow(&sd, &bath)?;
    let lindblad = super::build_lindblad_operators(&ops)
        .into_iter()
        .map(|s| s.reconstruction.worst())
        .fold(f64::INFINITY, f64::min);

    let mut failures = Vec::new();
    if !(stationarity.relative() <= tol.stationarity) {
        failures.push(format!("stationarity {:e}", stationarity.relative()));
    }
    if let Some(g) = gibbs {
        if !(g <= tol.gibbs) {
            failures.push(format!("gibbs trace distance {g:e}"));
        }
    }
    let (spin_error, heat_error) = (discrepancy(cur.spin_left, spin), discrepancy(cur.heat_left, heat));
    for (name, oracle, closed, err) in [("spin", cur.spin_left, spin, spin_error), ("heat", cur.heat_left, heat, heat_error)] {
        let ok = if equal {
            oracle.abs() <= tol.zero_current && closed.abs() <= tol.zero_current
        } else {
            err <= tol.current_relative
        };
        if !ok {
            failures.push(format!("{name} oracle {oracle:e} vs closed form {closed:e}"));
        }
    }
    if equal && !(cur.spin_right.abs() <= tol.zero_current && cur.heat_right.abs() <= tol.zero_current) {
        failures.push("right-bath currents at equal temperature".into());
    }
    for (name, b) in [("spin", cur.spin_balance()), ("heat", cur.heat_balance())] {
        if !(b.abs() <= tol.current_balance) {
            failures.push(format!("{name} balance {b:e}"));
        }
    }
    if !(lindblad <= tol.lindblad_reconstruction) {
        failures.push(format!("no parity placement reconstructs the end spins ({lindblad:e})"));
    }

    Ok(OracleVerdict {
        family: label.to_string(),
        n_sites: chain.n_sites(),
        beta_left: bath.beta_left,
        beta_right: bath.beta_right,
        stationarity_residual: stationarity.residual(),
        dissipator_norm: stationarity.dissipator_norm,
        stationarity_relative: stationarity.relative(),
        gibbs_trace_distance: gibbs,
        spin_oracle_left: cur.spin_left,
        spin_oracle_right: cur.spin_right,
        heat_oracle_left: cur.heat_left,
        heat_oracle_right: cur.heat_right,
        spin_closed_form: spin,
        heat_closed_form: heat,
        spin_error,
        heat_error,
        spin_balance: cur.spin_balance(),
        heat_balance: cur.heat_balance(),
        lindblad_reconstruction: lindblad,
        passed: failures.is_empty(),
        failures,
    })
}

/// Runs all entries in parallel; verdicts keep the input order.
pub fn run_battery(entries: &[BatteryEntry], tol: &Tolerances, seed: u64) -> Result<Vec<OracleVerdict>> {
    entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| run_entry(e, tol, derive_seed(seed, 1, i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_battery_passes() {
        let entries = default_battery(7);
        assert_eq!(entries.len(), 36);
        let verdicts = run_battery(&entries, &Tolerances::default(), 7).unwrap();
        for v in &verdicts {
            assert!(v.passed, "{}", serde_json::to_string(v).unwrap());
        }
        assert!(verdicts.iter().filter(|v| v.gibbs_trace_distance.is_some()).count() == 12);
    }

    #[test]
    fn oversized_entry_is_rejected() {
        let mut e = default_battery(0)[0];
        e.n_sites = 16;
        assert!(matches!(run_entry(&e, &Tolerances::default(), 0), Err(crate::Error::Capacity { .. })));
    }
}
