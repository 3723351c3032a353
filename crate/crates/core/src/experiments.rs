//! Parameter sweeps, disorder ensembles and decay fits.
//!
//! Everything here is `f64`. Grid points and replicates run in parallel on
//! the ambient rayon pool; results are always reduced in grid order, so a
//! plan produces the same table regardless of thread count.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, PerturbationKind, PerturbationSpec};
use crate::currents::{
    asymptotic_kappa, conductivity, heat_flow, high_gap_limits, log_m_coefficient, spin_flow, AsymptoticFamily,
    BathConfig,
};
use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigenvalues;
use crate::rng::derive_seed;
use crate::spectral::{diagonalize, SpectralData};

/// Minimum replicate count when a standard deviation is reported.
pub const MIN_REPLICATES_FOR_STD: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ChainFamily {
    Homogeneous,
    Krawtchouk { p: f64 },
    Explicit { couplings: Vec<f64>, fields: Vec<f64> },
}

/// A chain family with everything needed to build one member.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: ChainFamily,
    /// Used unless the sweep variable is the chain size.
    pub n_sites: usize,
    pub delta: f64,
    /// Affine rescale of the unperturbed chain so its mode energies span
    /// `[e_min, e_max]`, applied before any perturbation.
    pub window: Option<(f64, f64)>,
    /// Field perturbation kind and strength `xi`.
    pub perturbation: Option<(PerturbationKind, f64)>,
}

impl FamilySpec {
    pub fn new(family: ChainFamily, n_sites: usize, delta: f64) -> Self {
        FamilySpec { family, n_sites, delta, window: None, perturbation: None }
    }

    pub fn with_window(mut self, e_min: f64, e_max: f64) -> Self {
        self.window = Some((e_min, e_max));
        self
    }

    pub fn with_perturbation(mut self, kind: PerturbationKind, strength: f64) -> Self {
        self.perturbation = Some((kind, strength));
        self
    }

    pub fn is_random(&self) -> bool {
        matches!(self.perturbation, Some((PerturbationKind::RandomField, _)))
    }

    pub fn label(&self) -> String {
        let mut s = match &self.family {
            ChainFamily::Homogeneous => "homogeneous".to_string(),
            ChainFamily::Krawtchouk { p } => format!("krawtchouk(p={p})"),
            ChainFamily::Explicit { .. } => "explicit".to_string(),
        };
        if let Some((kind, xi)) = self.perturbation {
            let name = match kind {
                PerturbationKind::LinearField => "linear",
                PerturbationKind::RandomField => "random",
            };
            let _ = write!(s, "+{name}(xi={xi})");
        }
        s
    }

    /// The unperturbed chain, rescaled onto the window if one is set.
    pub fn base_chain(&self, n_sites: usize, p: Option<f64>) -> Result<ChainSpec<f64>> {
        let chain = match &self.family {
            ChainFamily::Homogeneous => ChainSpec::homogeneous(n_sites, self.delta)?,
            ChainFamily::Krawtchouk { p: p0 } => ChainSpec::krawtchouk(n_sites, p.unwrap_or(*p0), self.delta)?,
            ChainFamily::Explicit { couplings, fields } => {
                ChainSpec::new(couplings.clone(), fields.clone(), self.delta)?
            }
        };
        let Some((e_min, e_max)) = self.window else {
            return Ok(chain);
        };
        let x = tridiagonal_eigenvalues(chain.fields(), chain.couplings())?;
        let (lo, hi) = (x[0] + self.delta, x[x.len() - 1] + self.delta);
        if !(e_max > e_min && hi > lo) {
            return Err(Error::InvalidParameter(format!("cannot map [{lo}, {hi}] onto [{e_min}, {e_max}]")));
        }
        let scale = (e_max - e_min) / (hi - lo);
        chain.affine(scale, e_min - scale * lo)
    }

    /// Builds and diagonalizes one chain. `xi` overrides the perturbation
    /// strength, `seed` keys the random field.
    pub fn build(&self, n_sites: usize, p: Option<f64>, xi: Option<f64>, seed: u64) -> Result<SpectralData<f64>> {
        let mut chain = self.base_chain(n_sites, p)?;
        if let Some((kind, strength)) = self.perturbation {
            let strength = xi.unwrap_or(strength);
            chain = chain.perturbed(&PerturbationSpec { kind, strength, seed })?;
        }
        diagonalize(&chain)
    }

    fn fixed_size(&self) -> usize {
        match &self.family {
            ChainFamily::Explicit { fields, .. } => fields.len(),
            _ => self.n_sites,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "n_sites")]
    NSites,
    #[serde(rename = "T_0")]
    T0,
    #[serde(rename = "xi")]
    Xi,
    #[serde(rename = "p")]
    P,
}

impl DecayModel {
    pub fn name(&self) -> &'static str {
        match self {
            DecayModel::ExpInN => "exp-in-n",
            DecayModel::ExpInNLogN => "exp-in-n-log-n",
        }
    }
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::NSites => "n_sites",
            SweepVariable::T0 => "T_0",
            SweepVariable::Xi => "xi",
            SweepVariable::P => "p",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayModel {
    /// `ln M = c - rate N`.
    ExpInN,
    /// `ln M = c - rate N ln N`.
    ExpInNLogN,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    /// One series per family; all share grid, bath and seeds.
    pub families: Vec<FamilySpec>,
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub bath: BathConfig<f64>,
    pub replicates: usize,
    pub base_seed: u64,
    pub report_std: bool,
    pub fit: Option<DecayModel>,
}

impl SweepPlan {
    pub fn new(families: Vec<FamilySpec>, variable: SweepVariable, grid: Vec<f64>, bath: BathConfig<f64>) -> Self {
        SweepPlan { families, variable, grid, bath, replicates: 1, base_seed: 0, report_std: false, fit: None }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Plan(m));
        if self.families.is_empty() {
            return fail("no chain family given".into());
        }
        if self.grid.is_empty() {
            return fail("empty grid".into());
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return fail("grid values must be finite".into());
        }
        let up = self.grid.windows(2).all(|w| w[1] > w[0]);
        let down = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return fail("grid must be strictly monotone".into());
        }
        if self.replicates == 0 {
            return fail("replicates must be at least 1".into());
        }
        if self.replicates > 1 && !self.families.iter().all(FamilySpec::is_random) {
            return fail("replicates > 1 only make sense for random-field families".into());
        }
        if self.report_std && self.replicates < MIN_REPLICATES_FOR_STD {
            return fail(format!(
                "a standard deviation needs at least {MIN_REPLICATES_FOR_STD} replicates, got {}",
                self.replicates
            ));
        }
        match self.variable {
            SweepVariable::NSites => {
                if self.grid.iter().any(|v| v.fract() != 0.0 || *v < 2.0) {
                    return fail("n_sites grid must hold integers >= 2".into());
                }
                if self.families.iter().any(|f| matches!(f.family, ChainFamily::Explicit { .. })) {
                    return fail("explicit chains have a fixed size".into());
                }
            }
            SweepVariable::T0 => {
                if self.grid.iter().any(|v| !(*v > 0.0)) {
                    return fail("temperatures must be positive".into());
                }
            }
            SweepVariable::Xi => {
                if self.families.iter().any(|f| f.perturbation.is_none()) {
                    return fail("a xi sweep needs a perturbation on every family".into());
                }
            }
            SweepVariable::P => {
                if self.grid.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                    return fail("p must lie in (0, 1)".into());
                }
                if self.families.iter().any(|f| !matches!(f.family, ChainFamily::Krawtchouk { .. })) {
                    return fail("a p sweep needs Krawtchouk families".into());
                }
            }
        }
        self.bath.validate().map_err(|e| Error::Plan(e.to_string()))
    }

    /// Seed of replicate `r` at grid point `g`.
    pub fn replicate_seed(&self, replicate: usize, grid_index: usize) -> u64 {
        derive_seed(self.base_seed, replicate as u64, grid_index as u64)
    }

    fn point(&self, family: &FamilySpec, grid_index: usize, replicate: usize) -> Result<(usize, SpectralData<f64>, BathConfig<f64>)> {
        let v = self.grid[grid_index];
        let mut n = family.fixed_size();
        let (mut p, mut xi) = (None, None);
        let mut bath = self.bath;
        match self.variable {
            SweepVariable::NSites => n = v as usize,
            SweepVariable::T0 => bath.beta_left = 1.0 / v,
            SweepVariable::Xi => xi = Some(v),
            SweepVariable::P => p = Some(v),
        }
        let sd = family.build(n, p, xi, self.replicate_seed(replicate, grid_index))?;
        Ok((n, sd, bath))
    }

    fn describe(&self) -> Vec<String> {
        let mut out = vec![format!("xxness {}", env!("CARGO_PKG_VERSION"))];
        for f in &self.families {
            out.push(format!("family: {f:?}"));
        }
        out.push(format!("variable: {}", self.variable.name()));
        out.push(format!("grid: {:?}", self.grid));
        out.push(format!("bath: {:?}", self.bath));
        out.push(format!(
            "replicates: {}, base_seed: {}, report_std: {}, fit: {:?}",
            self.replicates, self.base_seed, self.report_std, self.fit
        ));
        out
    }
}

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_rms: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit(format!("need matching samples, got {} and {}", x.len(), y.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite sample".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(LineFit { slope, intercept, r_squared, residual_rms: (ss_res / n).sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Decay rate, the negated slope.
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_rms: f64,
}

/// Fits `ln M` against `N` or `N ln N`, where `N = n_sites - 1`.
pub fn fit_decay(sizes: &[usize], log_means: &[f64], model: DecayModel) -> Result<DecayFit> {
    if sizes.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 grid points, got {}", sizes.len())));
    }
    let x: Vec<f64> = sizes
        .iter()
        .map(|&s| {
            let n = s.saturating_sub(1) as f64;
            match model {
                DecayModel::ExpInN => n,
                DecayModel::ExpInNLogN => n * n.ln(),
            }
        })
        .collect();
    let line = fit_line(&x, log_means)?;
    Ok(DecayFit {
        model,
        rate: -line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        residual_rms: line.residual_rms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsemblePoint {
    pub value: f64,
    pub n_sites: usize,
    /// Mean of `M` over replicates.
    pub mean: f64,
    /// Sample standard deviation (0 for a single replicate).
    pub std: f64,
    /// `ln(mean)`, computed in log space.
    pub log_mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub label: String,
    pub variable: SweepVariable,
    pub points: Vec<EnsemblePoint>,
    pub fit: Option<DecayFit>,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let peak = v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    if !peak.is_finite() {
        return peak;
    }
    peak + v.iter().map(|x| (x - peak).exp()).sum::<f64>().ln()
}

/// `M(H + delta)` statistics per grid point, one result per family.
pub fn sweep_m_vs_size(plan: &SweepPlan) -> Result<Vec<EnsembleResult>> {
    plan.validate()?;
    if plan.variable == SweepVariable::T0 {
        return Err(Error::Plan("M does not depend on temperature".into()));
    }
    plan.families
        .iter()
        .map(|family| {
            let jobs: Vec<(usize, usize)> =
                (0..plan.grid.len()).flat_map(|g| (0..plan.replicates).map(move |r| (g, r))).collect();
            let samples: Vec<(usize, f64)> = jobs
                .par_iter()
                .map(|&(g, r)| plan.point(family, g, r).map(|(n, sd, _)| (n, log_m_coefficient(&sd))))
                .collect::<Result<_>>()?;
            let points: Vec<EnsemblePoint> = samples
                .chunks(plan.replicates)
                .zip(&plan.grid)
                .map(|(chunk, &value)| {
                    let logs: Vec<f64> = chunk.iter().map(|s| s.1).collect();
                    let count = logs.len();
                    let log_mean = log_sum_exp(&logs) - (count as f64).ln();
                    let mean = log_mean.exp();
                    let std = if count > 1 {
                        let var = logs.iter().map(|l| (l.exp() - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
                        var.sqrt()
                    } else {
                        0.0
                    };
                    EnsemblePoint { value, n_sites: chunk[0].0, mean, std, log_mean, count }
                })
                .collect();
            let fit = match (plan.fit, plan.variable) {
                (Some(model), SweepVariable::NSites) => {
                    let sizes: Vec<usize> = points.iter().map(|p| p.n_sites).collect();
                    let logs: Vec<f64> = points.iter().map(|p| p.log_mean).collect();
                    Some(fit_decay(&sizes, &logs, model)?)
                }
                _ => None,
            };
            Ok(EnsembleResult { label: family.label(), variable: plan.variable, points, fit })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentRow {
    pub value: f64,
    pub n_sites: usize,
    pub spin_flow: f64,
    pub heat_flow: f64,
    pub spin_limit: f64,
    pub heat_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentSeries {
    pub label: String,
    pub rows: Vec<CurrentRow>,
    /// Both flows non-decreasing along the grid.
    pub monotone: bool,
}

/// Spin and heat flows with their high-gap saturation values along the grid.
pub fn sweep_currents_vs_temperature(plan: &SweepPlan) -> Result<Vec<CurrentSeries>> {
    plan.validate()?;
    if plan.replicates != 1 {
        return Err(Error::Plan("current sweeps take a single replicate".into()));
    }
    plan.families
        .iter()
        .map(|family| {
            let rows: Vec<CurrentRow> = (0..plan.grid.len())
                .into_par_iter()
                .map(|g| {
                    let (n, sd, bath) = plan.point(family, g, 0)?;
                    let (spin_limit, heat_limit) = high_gap_limits(&sd, &bath);
                    Ok(CurrentRow {
                        value: plan.grid[g],
                        n_sites: n,
                        spin_flow: spin_flow(&sd, &bath)?,
                        heat_flow: heat_flow(&sd, &bath)?,
                        spin_limit,
                        heat_limit,
                    })
                })
                .collect::<Result<_>>()?;
            let increasing = plan.grid.len() < 2 || plan.grid[1] > plan.grid[0];
            let monotone = rows.windows(2).all(|w| {
                let (a, b) = if increasing { (&w[0], &w[1]) } else { (&w[1], &w[0]) };
                b.spin_flow >= a.spin_flow && b.heat_flow >= a.heat_flow
            });
            Ok(CurrentSeries { label: family.label(), rows, monotone })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaRow {
    pub label: String,
    pub n_sites: usize,
    pub temperature: f64,
    pub kappa: f64,
    pub kappa_per_site: f64,
    /// `kappa 2T / (pi lambda^2 h_0 h_N N (B_0 + delta))`, which tends to 1
    /// at high temperature.
    pub high_temperature_ratio: f64,
    pub asymptotic: Option<f64>,
    /// `asymptotic / kappa`.
    pub asymptotic_ratio: Option<f64>,
}

/// Conductivity per grid point at equal bath temperatures. The grid varies
/// either the size (at temperature `T_0` of the plan's bath) or the common
/// temperature.
pub fn sweep_kappa_regimes(plan: &SweepPlan) -> Result<Vec<KappaRow>> {
    plan.validate()?;
    if !matches!(plan.variable, SweepVariable::NSites | SweepVariable::T0) {
        return Err(Error::Plan("kappa sweeps vary n_sites or T_0".into()));
    }
    let jobs: Vec<(usize, usize)> =
        (0..plan.families.len()).flat_map(|f| (0..plan.grid.len()).map(move |g| (f, g))).collect();
    jobs.par_iter()
        .map(|&(f, g)| {
            let family = &plan.families[f];
            let (n, sd, bath) = plan.point(family, g, 0)?;
            let t = bath.t_left();
            let bath = BathConfig::new(1.0 / t, 1.0 / t, bath.h_left, bath.h_right, bath.lambda)?;
            let kappa = conductivity(&sd, &bath)?;
            let last = (n - 1) as f64;
            let b0: f64 = sd.energies().iter().zip(sd.first_row()).map(|(e, f)| e * f * f).sum();
            let l2h2 = bath.lambda * bath.lambda * bath.h_left * bath.h_right;
            let high = kappa * 2.0 * t / (std::f64::consts::PI * l2h2 * last * b0);
            let asym_family = match (&family.family, family.perturbation) {
                (ChainFamily::Homogeneous, None) => Some(AsymptoticFamily::Homogeneous),
                (ChainFamily::Krawtchouk { p }, None) if *p == 0.5 => Some(AsymptoticFamily::KrawtchoukHalf),
                _ => None,
            };
            let energies = sd.energies();
            let asymptotic = asym_family
                .map(|a| {
                    let h = (bath.h_left * bath.h_right).sqrt();
                    asymptotic_kappa(a, n, energies[0], energies[n - 1], t, bath.lambda, h)
                })
                .transpose()?;
            Ok(KappaRow {
                label: family.label(),
                n_sites: n,
                temperature: t,
                kappa,
                kappa_per_site: kappa / last,
                high_temperature_ratio: high,
                asymptotic,
                asymptotic_ratio: asymptotic.map(|a| a / kappa),
            })
        })
        .collect()
}

/// A CSV table with `#`-prefixed provenance lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// What produced the table.
    pub provenance: Vec<String>,
    /// Derived results such as fits, written after the provenance.
    pub notes: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn num(v: f64) -> String {
    // shortest representation that parses back to the same bits
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { provenance: Vec::new(), notes: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for line in self.provenance.iter().chain(&self.notes) {
            for l in line.lines() {
                writeln!(out, "# {l}")?;
            }
        }
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 table")
    }
}

/// Leading columns: the series label, the swept value and, unless the size
/// is what is swept, the chain size.
fn lead_columns(plan: &SweepPlan, rest: &[&str]) -> Table {
    let mut cols = vec!["series", plan.variable.name()];
    if plan.variable != SweepVariable::NSites {
        cols.push("n_sites");
    }
    cols.extend_from_slice(rest);
    Table::new(&cols)
}

fn lead_values(plan: &SweepPlan, label: &str, value: f64, n_sites: usize) -> Vec<String> {
    let mut row = vec![label.to_string()];
    if plan.variable == SweepVariable::NSites {
        row.push(n_sites.to_string());
    } else {
        row.push(num(value));
        row.push(n_sites.to_string());
    }
    row
}

pub fn ensemble_table(plan: &SweepPlan, results: &[EnsembleResult]) -> Table {
    let mut t = lead_columns(plan, &["mean_m", "std_m", "log_mean_m", "replicates"]);
    t.provenance = plan.describe();
    for r in results {
        if let Some(fit) = &r.fit {
            t.notes.push(format!(
                "fit {}: model {}, rate {}, intercept {}, r_squared {}, residual_rms {}",
                r.label, fit.model.name(), num(fit.rate), num(fit.intercept), num(fit.r_squared), num(fit.residual_rms)
            ));
        }
        for p in &r.points {
            let mut row = lead_values(plan, &r.label, p.value, p.n_sites);
            row.extend([num(p.mean), num(p.std), num(p.log_mean), p.count.to_string()]);
            t.rows.push(row);
        }
    }
    t
}

pub fn currents_table(plan: &SweepPlan, series: &[CurrentSeries]) -> Table {
    let mut t = lead_columns(plan, &[
        "spin_flow",
        "heat_flow",
        "spin_limit",
        "heat_limit",
        "spin_fraction",
        "heat_fraction",
    ]);
    t.provenance = plan.describe();
    for s in series {
        t.notes.push(format!("series {}: monotone {}", s.label, s.monotone));
        for r in &s.rows {
            let mut row = lead_values(plan, &s.label, r.value, r.n_sites);
            row.extend([
                num(r.spin_flow),
                num(r.heat_flow),
                num(r.spin_limit),
                num(r.heat_limit),
                num(r.spin_flow / r.spin_limit),
                num(r.heat_flow / r.heat_limit),
            ]);
            t.rows.push(row);
        }
    }
    t
}

pub fn kappa_table(plan: &SweepPlan, rows: &[KappaRow]) -> Table {
    let mut t = Table::new(&[
        "series",
        "n_sites",
        "temperature",
        "kappa",
        "kappa_per_site",
        "high_temperature_ratio",
        "asymptotic_kappa",
        "asymptotic_ratio",
    ]);
    t.provenance = plan.describe();
    for r in rows {
        t.rows.push(vec![
            r.label.clone(),
            r.n_sites.to_string(),
            num(r.temperature),
            num(r.kappa),
            num(r.kappa_per_site),
            num(r.high_temperature_ratio),
            opt(r.asymptotic),
            opt(r.asymptotic_ratio),
        ]);
    }
    t
}
