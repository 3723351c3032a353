//! Steady-state mode data, closed-form spin and heat flows, bounds,
//! conductivity and the `M(H + delta)` coefficient.
//!
//! All flows carry the explicit `h_0^2 h_N^2` smearing factors; the familiar
//! `2 pi lambda^2` and `pi lambda^2 (B_N + delta)` saturation values are the
//! `h = 1` case.

use std::fmt;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::SpectralData;

/// Tolerance on `max |phi_0^2 - phi_N^2|` for the mirror-symmetric forms.
pub const MIRROR_TOLERANCE: f64 = 1e-8;
/// `|T_0 - T_N| / T` at or below which a configuration is flagged small-gap.
pub const SMALL_GAP_RATIO: f64 = 1e-3;
/// `max(T) / min(T)` at or above which a configuration is flagged high-gap.
pub const HIGH_GAP_RATIO: f64 = 100.0;

/// Inverse temperatures, constant smearing levels and coupling of the two baths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct BathConfig<S> {
    pub beta_left: S,
    pub beta_right: S,
    pub h_left: S,
    pub h_right: S,
    pub lambda: S,
}

impl<S: Scalar> BathConfig<S> {
    pub fn new(beta_left: S, beta_right: S, h_left: S, h_right: S, lambda: S) -> Result<Self> {
        let bath = BathConfig { beta_left, beta_right, h_left, h_right, lambda };
        bath.validate()?;
        Ok(bath)
    }

    /// Equal smearing `h` at both ends.
    pub fn symmetric(beta_left: S, beta_right: S, h: S, lambda: S) -> Result<Self> {
        Self::new(beta_left, beta_right, h, h, lambda)
    }

    pub fn from_temperatures(t_left: S, t_right: S, h: S, lambda: S) -> Result<Self> {
        Self::symmetric(t_left.recip(), t_right.recip(), h, lambda)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, beta) in [("beta_left", self.beta_left), ("beta_right", self.beta_right)] {
            if !(beta > S::zero() && beta.is_finite() && beta.recip().is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {beta} must be positive with a finite temperature"
                )));
            }
        }
        for (name, h) in [("h_left", self.h_left), ("h_right", self.h_right)] {
            if !(h >= S::zero() && h.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {h} must be non-negative")));
            }
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite".into()));
        }
        Ok(())
    }

    pub fn t_left(&self) -> S {
        self.beta_left.recip()
    }

    pub fn t_right(&self) -> S {
        self.beta_right.recip()
    }

    /// `T = (T_0 + T_N) / 2`.
    pub fn mean_temperature(&self) -> S {
        (self.t_left() + self.t_right()) * S::lit(0.5)
    }

    pub fn equal_h(&self) -> bool {
        self.h_left == self.h_right
    }

    /// Left and right baths exchanged.
    pub fn swapped(&self) -> Self {
        BathConfig {
            beta_left: self.beta_right,
            beta_right: self.beta_left,
            h_left: self.h_right,
            h_right: self.h_left,
            lambda: self.lambda,
        }
    }

    pub fn is_small_gap(&self) -> bool {
        (self.t_left() - self.t_right()).abs() <= S::lit(SMALL_GAP_RATIO) * self.mean_temperature()
    }

    pub fn is_high_gap(&self) -> bool {
        let (lo, hi) = if self.t_left() < self.t_right() {
            (self.t_left(), self.t_right())
        } else {
            (self.t_right(), self.t_left())
        };
        hi >= S::lit(HIGH_GAP_RATIO) * lo
    }
}

/// `1 / (exp(beta E) - 1)`.
pub fn bose_occupation<S: Scalar>(beta: S, energy: S) -> Result<S> {
    if !(energy > S::zero()) {
        return Err(Error::Domain(format!("Bose occupation needs a positive energy, got {energy}")));
    }
    if !(beta > S::zero()) {
        return Err(Error::Domain(format!("Bose occupation needs a positive beta, got {beta}")));
    }
    Ok((beta * energy).exp_m1().recip())
}

/// `n(a) - n(b)` for Bose factors at reduced energies `a, b > 0`, without
/// cancellation or overflow.
pub fn occupation_difference<S: Scalar>(a: S, b: S) -> S {
    if a == b {
        return S::zero();
    }
    let one_minus = |x: S| -(-x).exp_m1();
    let gap = (b - a).abs();
    let mag = (-a.min(b)).exp() * one_minus(gap) / (one_minus(a) * one_minus(b));
    if b > a {
        mag
    } else {
        -mag
    }
}

/// `2 n(a) + 1 = coth(a / 2)`.
fn twice_occupation_plus_one<S: Scalar>(a: S) -> S {
    (a * S::lit(0.5)).tanh().recip()
}

/// `ln sinh(x)` for `x > 0`.
fn ln_sinh<S: Scalar>(x: S) -> S {
    x + (-(-x * S::lit(2.0)).exp_m1()).ln() - S::LN_2()
}

/// `sinh(a) / sinh(b)` for `b > 0`, any sign of `a`.
pub fn sinh_ratio<S: Scalar>(a: S, b: S) -> S {
    if a == S::zero() {
        return S::zero();
    }
    let two = S::lit(2.0);
    let m = a.abs();
    let v = (m - b).exp() * (-(-two * m).exp_m1()) / (-(-two * b).exp_m1());
    if a > S::zero() {
        v
    } else {
        -v
    }
}

/// `sinh((b - a)/2) / sqrt(sinh(a) sinh(b))` for `a, b > 0`, evaluated in log space.
fn bound_kernel<S: Scalar>(a: S, b: S) -> S {
    if a == b {
        return S::zero();
    }
    let half = S::lit(0.5);
    let d = (b - a) * half;
    let v = (ln_sinh(d.abs()) - half * (ln_sinh(a) + ln_sinh(b))).exp();
    if d > S::zero() {
        v
    } else {
        -v
    }
}

/// `E^2 / sinh(E / T)`.
fn conductivity_kernel<S: Scalar>(energy: S, t: S) -> S {
    let x = energy / t;
    let two = S::lit(2.0);
    energy * energy * two * (-x).exp() / (-(-two * x).exp_m1())
}

/// Per-mode bath rates and steady-state occupations.
///
/// Row 0 of `big_c`/`big_c_tilde` is the left bath, row 1 the right bath.
#[derive(Debug, Clone, PartialEq)]
pub struct NessCoefficients<S> {
    pub big_c: Array2<S>,
    pub big_c_tilde: Array2<S>,
    pub d: Array1<S>,
    pub d_tilde: Array1<S>,
    pub occupations: Array1<S>,
}

impl<S: Scalar> NessCoefficients<S> {
    pub fn n_modes(&self) -> usize {
        self.d.len()
    }
}

/// `C_{a,k} = 2 pi h_a^2 (n_a + 1)`, `C~_{a,k} = 2 pi h_a^2 n_a`,
/// `d_k = sum_a phi_a^2 C_{a,k}`, `d~_k = sum_a phi_a^2 C~_{a,k}` and
/// occupations `d~_k / (d_k + d~_k)`.
pub fn ness_coefficients<S: Scalar>(sd: &SpectralData<S>, bath: &BathConfig<S>) -> Result<NessCoefficients<S>> {
    bath.validate()?;
    let n = sd.n_sites();
    let two_pi = S::TAU();
    let mut big_c = Array2::zeros((2, n));
    let mut big_c_tilde = Array2::zeros((2, n));
    let mut d = Array1::zeros(n);
    let mut d_tilde = Array1::zeros(n);
    let mut occupations = Array1::zeros(n);
    let ends = [(sd.first_row(), bath.beta_left, bath.h_left), (sd.last_row(), bath.beta_right, bath.h_right)];
    for (k, e) in sd.energies().into_iter().enumerate() {
        for (alpha, (row, beta, h)) in ends.iter().enumerate() {
            let occ = bose_occupation(*beta, e)?;
            let w = two_pi * *h * *h;
            big_c[[alpha, k]] = w * (occ + S::one());
            big_c_tilde[[alpha, k]] = w * occ;
            let p2 = row[k] * row[k];
            d[k] += p2 * big_c[[alpha, k]];
            d_tilde[k] += p2 * big_c_tilde[[alpha, k]];
        }
        let total = d[k] + d_tilde[k];
        if !(total > S::zero()) {
            return Err(Error::Domain(format!("mode {k} is decoupled from both baths")));
        }
        occupations[k] = d_tilde[k] / total;
    }
    Ok(NessCoefficients { big_c, big_c_tilde, d, d_tilde, occupations })
}

/// Per-mode contributions `w_k` with `Q_L = 4 pi lambda^2 sum_k w_k` and
/// `h_L = 2 pi lambda^2 sum_k (x_k + delta) w_k`.
fn mode_weights<S: Scalar>(sd: &SpectralData<S>, bath: &BathConfig<S>) -> Result<Vec<S>> {
    bath.validate()?;
    let h0 = bath.h_left * bath.h_left;
    let hn = bath.h_right * bath.h_right;
    let equal = bath.equal_h();
    sd.energies()
        .into_iter()
        .zip(sd.first_row().iter().zip(sd.last_row()))
        .map(|(e, (&f0, &fn_))| {
            if !(e > S::zero()) {
                return Err(Error::Domain(format!("mode energy {e} is not positive")));
            }
            let (a, b) = (bath.beta_left * e, bath.beta_right * e);
            let diff = occupation_difference(a, b);
            let (c0, cn) = (twice_occupation_plus_one(a), twice_occupation_plus_one(b));
            let (p0, pn) = (f0 * f0, fn_ * fn_);
            // p0 pn / (p0 X + pn Y) written as 1 / (X / pn + Y / p0)
            let w = if p0 == S::zero() || pn == S::zero() {
                S::zero()
            } else if equal {
                let denom = c0 / pn + cn / p0;
                h0 * diff / denom
            } else {
                let denom = h0 * c0 / pn + hn * cn / p0;
                if denom == S::zero() {
                    S::zero()
                } else {
                    h0 * hn * diff / denom
                }
            };
            Ok(w)
        })
        .collect()
}

/// Spin flow `Q_L` injected by the left bath.
pub fn spin_flow<S: Scalar>(sd: &SpectralData<S>, bath: &BathConfig<S>) -> Result<S> {
    let w = mode_weights(sd, bath)?;
    let sum: S = w.into_iter().sum();
    Ok(S::lit(4.0) * S::PI() * bath.lambda * bath.lambda * sum)
}

/// Heat flow `h_L` injected by the left bath.
pub fn heat_flow<S: Scalar>(sd: &SpectralData<S>, bath: &BathConfig<S>) -> Result<S> {
    let w = mode_weights(sd, bath)?;
    let sum: S = w.into_iter().zip(sd.energies()).map(|(w, e)| w * e).sum();
    Ok(S::TAU() * bath.lambda * bath.lambda * sum)
}

/// `(Q_L, h_L)` for a mirror-symmetric chain with equal smearing levels, from
/// `<0| g(H + delta) |0>` with `g(E) = sinh((b_N - b_0) E / 2) / sinh((b_0 + b_N) E / 2)`.
pub fn mirror_flows<S: Scalar>(sd: &SpectralData<S>, bath: &BathConfig<S>) -> Result<(S, S)> {
    bath.validate()?;
    sd.require_mirror(S::tolerance(MIRROR_TOLERANCE))?;
    if !bath.equal_h() {
        return Err(Error::InvalidParameter(
            "matrix-element flow forms need equal smearing levels".into(),
        ));
    }
    let half = S::lit(0.5);
    let g = |e: S| {
        sinh_ratio((bath.beta_right - bath.beta_left) * e * half, (bath.beta_left + bath.beta_right) * e * half)
    };
    let h2l2 = bath.h_left * bath.h_left * bath.lambda * bath.lambda;
    let spin = S::TAU() * h2l2 * sd.matrix_element(0, 0, g)?;
    let heat = S::PI() * h2l2 * sd.matrix_element(0, 0, |e| e * g(e))?;
    Ok((spin, heat))
}

/// Upper bounds on the flows. The per-mode bounds are tighter than the
/// matrix-element bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowBounds<S> {
    pub spin_mode: S,
    pub heat_mode: S,
    pub spin_matrix: S,
    pub heat_matrix: S,
}

/// Bounds for the left-hot configuration `beta_N >= beta_0`; a right-hot
/// configuration is evaluated swapped and negated. The bounds are symmetric
/// under `phi_0 <-> phi_N`, so swapping only exchanges the bath parameters.
pub fn flow_bounds<S: Scalar>(sd: &SpectralData<S>, bath: &BathConfig<S>) -> Result<FlowBounds<S>> {
    bath.validate()?;
    if bath.beta_right < bath.beta_left {
        let b = flow_bounds(sd, &bath.swapped())?;
        return Ok(FlowBounds {
            spin_mode: -b.spin_mode,
            heat_mode: -b.heat_mode,
            spin_matrix: -b.spin_matrix,
            heat_matrix: -b.heat_matrix,
        });
    }
    let kernel = |e: S| bound_kernel(bath.beta_left * e, bath.beta_right * e);
    let pref = S::PI() * bath.lambda * bath.lambda * bath.h_left * bath.h_right;
    let energies = sd.energies();
    let (mut spin_mode, mut heat_mode) = (S::zero(), S::zero());
    for ((&e, &f0), &fn_) in energies.iter().zip(sd.first_row()).zip(sd.last_row()) {
        let g = (f0 * fn_).abs() * kernel(e);
        spin_mode += g;
        heat_mode += e * g;
    }
    let last = sd.last_site();
    let spin_matrix = pref * (sd.matrix_element(0, 0, kernel)? + sd.matrix_element(last, last, kernel)?);
    let heat_matrix = pref
        * S::lit(0.5)
        * (sd.matrix_element(0, 0, |e| e * kernel(e))? + sd.matrix_element(last, last, |e| e * kernel(e))?);
    Ok(FlowBounds {
        spin_mode: S::lit(2.0) * pref * spin_mode,
        heat_mode: pref * heat_mode,
        spin_matrix,
        heat_matrix,
    })
}

/// Thermal conductivity `kappa = pi lambda^2 h^2 N / (2 T^2) <0| E^2 / sinh(E / T) |0>`
/// at the mean temperature, with `h^2 = h_0 h_N`.
pub fn conductivity<S: Scalar>(sd: &SpectralData<S>, bath: &BathConfig<S>) -> Result<S> {
    bath.validate()?;
    sd.require_mirror(S::tolerance(MIRROR_TOLERANCE))?;
    let t = bath.mean_temperature();
    let n = S::from_usize_lossy(sd.last_site());
    let pref = S::PI() * bath.lambda * bath.lambda * bath.h_left * bath.h_right * n / (S::lit(2.0) * t * t);
    Ok(pref * sd.matrix_element(0, 0, |e| conductivity_kernel(e, t))?)
}

/// `M(H + delta) = sum_k |phi_0(x_k) phi_N(x_k)| (x_k + delta)`.
pub fn m_coefficient<S: Scalar>(sd: &SpectralData<S>) -> S {
    sd.energies()
        .iter()
        .zip(sd.first_row().iter().zip(sd.last_row()))
        .map(|(&e, (&a, &b))| (a * b).abs() * e)
        .sum()
}

/// `ln M(H + delta)`, using `phi_0(x_k) phi_N(x_k) = prod_n J_n / prod_{j != k} (x_k - x_j)`
/// so that it stays accurate when `M` is far below the eigenvector precision.
pub fn log_m_coefficient<S: Scalar>(sd: &SpectralData<S>) -> S {
    let x = sd.eigenvalues();
    let logs: Vec<S> = sd
        .energies()
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let denom: S = x
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &xj)| (x[k] - xj).abs().ln())
                .sum();
            sd.log_coupling_product() - denom + e.ln()
        })
        .collect();
    if logs.iter().any(|v| !v.is_finite()) {
        return m_coefficient(sd).ln();
    }
    let peak = logs.iter().fold(S::neg_infinity(), |m, &v| m.max(v));
    peak + logs.iter().map(|&v| (v - peak).exp()).sum::<S>().ln()
}

/// Chain families with a closed-form low-temperature conductivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsymptoticFamily {
    Homogeneous,
    KrawtchoukHalf,
}

/// Low-temperature asymptotic conductivity for a spectrum rescaled onto
/// `[e_min, e_max]`; `N = n_sites - 1`.
///
/// Homogeneous: `4 sqrt(pi) lambda^2 h^2 E_min^2 exp(-E_min/T) N / (sqrt(T) W^{3/2})`
/// with `W = e_max - e_min`. Krawtchouk `p = 1/2`:
/// `pi lambda^2 h^2 E_min^2 N exp(-E_min/T) / (T^2 2^N)`.
pub fn asymptotic_kappa<S: Scalar>(
    family: AsymptoticFamily,
    n_sites: usize,
    e_min: S,
    e_max: S,
    t: S,
    lambda: S,
    h: S,
) -> Result<S> {
    if n_sites < 2 || !(e_max > e_min) || !(e_min > S::zero()) || !(t > S::zero()) {
        return Err(Error::InvalidParameter(format!(
            "asymptotic kappa needs n_sites >= 2, 0 < e_min < e_max and T > 0 (got {n_sites}, {e_min}, {e_max}, {t})"
        )));
    }
    let n = S::from_usize_lossy(n_sites - 1);
    let l2h2 = lambda * lambda * h * h;
    let boltz = (-e_min / t).exp();
    Ok(match family {
        AsymptoticFamily::Homogeneous => {
            let w = e_max - e_min;
            S::lit(4.0) * S::PI().sqrt() * l2h2 * e_min * e_min * boltz * n / (t.sqrt() * w * w.sqrt())
        }
        AsymptoticFamily::KrawtchoukHalf => {
            let ln2n = n * S::LN_2();
            S::PI() * l2h2 * e_min * e_min * n * (-e_min / t - ln2n).exp() / (t * t)
        }
    })
}

/// The `beta_0 -> 0` saturation values `(2 pi lambda^2 h_N^2, pi lambda^2 h_N^2 (B_N + delta))`,
/// with `B_N + delta = sum_k (x_k + delta) phi_N(x_k)^2`.
pub fn high_gap_limits<S: Scalar>(sd: &SpectralData<S>, bath: &BathConfig<S>) -> (S, S) {
    let l2h2 = bath.lambda * bath.lambda * bath.h_right * bath.h_right;
    let bn: S = sd.energies().iter().zip(sd.last_row()).map(|(&e, &f)| e * f * f).sum();
    (S::TAU() * l2h2, S::PI() * l2h2 * bn)
}

/// Regime flags attached to a [`CurrentReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeNotes {
    pub mirror_symmetric: bool,
    pub small_gap: bool,
    pub high_gap: bool,
    pub degenerate_spectrum: bool,
}

/// Everything the closed forms say about one chain and bath configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentReport<S> {
    pub spin_flow_left: S,
    pub heat_flow_left: S,
    pub kappa: Option<S>,
    pub bound_spin: S,
    pub bound_heat: S,
    pub bound_spin_matrix: S,
    pub bound_heat_matrix: S,
    pub m_coefficient: S,
    pub log_m_coefficient: S,
    pub mirror_spin_flow: Option<S>,
    pub mirror_heat_flow: Option<S>,
    pub mirror_relative_difference: Option<S>,
    pub spin_limit: S,
    pub heat_limit: S,
    pub notes: RegimeNotes,
}

impl<S: Scalar> CurrentReport<S> {
    pub fn evaluate(sd: &SpectralData<S>, bath: &BathConfig<S>) -> Result<Self> {
        let spin = spin_flow(sd, bath)?;
        let heat = heat_flow(sd, bath)?;
        let bounds = flow_bounds(sd, bath)?;
        let mirror = sd.mirror_deviation() <= S::tolerance(MIRROR_TOLERANCE);
        let (mirror_spin, mirror_heat, rel, kappa) = if mirror && bath.equal_h() {
            let (ms, mh) = mirror_flows(sd, bath)?;
            let rel = relative_difference(spin, ms).max(relative_difference(heat, mh));
            (Some(ms), Some(mh), Some(rel), Some(conductivity(sd, bath)?))
        } else {
            (None, None, None, None)
        };
        let (spin_limit, heat_limit) = high_gap_limits(sd, bath);
        Ok(CurrentReport {
            spin_flow_left: spin,
            heat_flow_left: heat,
            kappa,
            bound_spin: bounds.spin_mode,
            bound_heat: bounds.heat_mode,
            bound_spin_matrix: bounds.spin_matrix,
            bound_heat_matrix: bounds.heat_matrix,
            m_coefficient: m_coefficient(sd),
            log_m_coefficient: log_m_coefficient(sd),
            mirror_spin_flow: mirror_spin,
            mirror_heat_flow: mirror_heat,
            mirror_relative_difference: rel,
            spin_limit,
            heat_limit,
            notes: RegimeNotes {
                mirror_symmetric: mirror,
                small_gap: bath.is_small_gap(),
                high_gap: bath.is_high_gap(),
                degenerate_spectrum: sd.is_degenerate(),
            },
        })
    }

    /// Flat `(key, value)` pairs; numbers carry 17 significant digits.
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        let num = |v: S| format!("{:.16e}", v.to_f64_lossy());
        let opt = |v: Option<S>| v.map(num).unwrap_or_else(|| "none".to_string());
        vec![
            ("spin_flow_left", num(self.spin_flow_left)),
            ("heat_flow_left", num(self.heat_flow_left)),
            ("kappa", opt(self.kappa)),
            ("bound_spin", num(self.bound_spin)),
            ("bound_heat", num(self.bound_heat)),
            ("bound_spin_matrix", num(self.bound_spin_matrix)),
            ("bound_heat_matrix", num(self.bound_heat_matrix)),
            ("m_coefficient", num(self.m_coefficient)),
            ("log_m_coefficient", num(self.log_m_coefficient)),
            ("mirror_spin_flow", opt(self.mirror_spin_flow)),
            ("mirror_heat_flow", opt(self.mirror_heat_flow)),
            ("mirror_relative_difference", opt(self.mirror_relative_difference)),
            ("spin_limit", num(self.spin_limit)),
            ("heat_limit", num(self.heat_limit)),
            ("mirror_symmetric", self.notes.mirror_symmetric.to_string()),
            ("small_gap", self.notes.small_gap.to_string()),
            ("high_gap", self.notes.high_gap.to_string()),
            ("degenerate_spectrum", self.notes.degenerate_spectrum.to_string()),
        ]
    }
}

impl<S: Scalar> fmt::Display for CurrentReport<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.key_values() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_difference<S: Scalar>(a: S, b: S) -> S {
    let scale = a.abs().max(b.abs());
    if scale == S::zero() {
        S::zero()
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainSpec;
    use crate::spectral::diagonalize;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_site() -> SpectralData<f64> {
        diagonalize(&ChainSpec::homogeneous(2, 2.0).unwrap()).unwrap()
    }

    fn bath(b0: f64, bn: f64) -> BathConfig<f64> {
        BathConfig::symmetric(b0, bn, 1.0, 1.0).unwrap()
    }

    #[test]
    fn bose_occupation_values() {
        // 1 / (e^{0.1} - 1) to 15 digits
        assert_relative_eq!(bose_occupation(0.1, 1.0).unwrap(), 9.50833194477505, max_relative = 1e-14);
        assert_relative_eq!(bose_occupation(1.0, 2f64.ln()).unwrap(), 1.0, max_relative = 1e-15);
        assert_eq!(bose_occupation(1.0, 800.0).unwrap(), 0.0);
        assert!(matches!(bose_occupation(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bose_occupation(1.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn occupation_difference_is_stable() {
        let direct = 1.0 / 0.5f64.exp_m1() - 1.0 / 1.5f64.exp_m1();
        assert_relative_eq!(occupation_difference(0.5, 1.5), direct, max_relative = 1e-14);
        assert_relative_eq!(occupation_difference(1.5, 0.5), -direct, max_relative = 1e-14);
        let far: f64 = occupation_difference(700.0, 705.0);
        assert!(far > 0.0 && far.is_finite());
        assert_relative_eq!(far, (-700.0f64).exp() * (1.0 - (-5.0f64).exp()), max_relative = 1e-12);
    }

    #[test]
    fn sinh_ratio_matches_direct_and_survives_overflow() {
        assert_relative_eq!(sinh_ratio(0.3, 0.7), 0.3f64.sinh() / 0.7f64.sinh(), max_relative = 1e-14);
        assert_relative_eq!(sinh_ratio(-0.3, 0.7), -(0.3f64.sinh() / 0.7f64.sinh()), max_relative = 1e-14);
        assert_relative_eq!(sinh_ratio(800.0, 801.0), (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn equal_temperature_occupation_is_one_third_at_ln2() {
        let sd = two_site();
        // beta E = ln 2 for the lower mode (E = 1)
        let b = ln2_bath();
        let c = ness_coefficients(&sd, &b).unwrap();
        assert_relative_eq!(c.occupations[0], 1.0 / 3.0, max_relative = 1e-14);
    }

    fn ln2_bath() -> BathConfig<f64> {
        bath(2f64.ln(), 2f64.ln())
    }

    #[test]
    fn decoupled_right_bath_drops_out() {
        let sd = two_site();
        let b = BathConfig::new(0.1, 0.2, 1.0, 0.0, 1.0).unwrap();
        let c = ness_coefficients(&sd, &b).unwrap();
        for k in 0..2 {
            let p = sd.first_row()[k].powi(2);
            assert_relative_eq!(c.d[k], p * c.big_c[[0, k]], max_relative = 1e-15);
            assert_relative_eq!(c.d_tilde[k], p * c.big_c_tilde[[0, k]], max_relative = 1e-15);
            assert_eq!(c.big_c[[1, k]], 0.0);
        }
    }

    #[test]
    fn two_site_reference_flows() {
        let sd = two_site();
        let b = bath(0.1, 0.2);
        let q = spin_flow(&sd, &b).unwrap();
        // per-mode scalar evaluation with E = 1, 3 and phi^2 = 1/2
        let mut expected = 0.0;
        let mut heat = 0.0;
        for e in [1.0f64, 3.0] {
            let (n0, nn) = (1.0 / (0.1 * e).exp_m1(), 1.0 / (0.2 * e).exp_m1());
            let term = 0.25 * (n0 - nn) / (0.5 * (2.0 * n0 + 1.0) + 0.5 * (2.0 * nn + 1.0));
            expected += term;
            heat += e * term;
        }
        assert_relative_eq!(q, 4.0 * std::f64::consts::PI * expected, max_relative = 1e-13);
        assert_relative_eq!(q / std::f64::consts::PI, 0.65578, max_relative = 1e-4);
        assert_relative_eq!(heat_flow(&sd, &b).unwrap(), 2.0 * std::f64::consts::PI * heat, max_relative = 1e-13);
        let (ms, _) = mirror_flows(&sd, &b).unwrap();
        let g = 0.5 * (0.05f64.sinh() / 0.15f64.sinh() + 0.15f64.sinh() / 0.45f64.sinh());
        assert_relative_eq!(g, 0.32789, max_relative = 1e-4);
        assert_relative_eq!(ms, 2.0 * std::f64::consts::PI * g, max_relative = 1e-13);
        assert_relative_eq!(ms, q, max_relative = 1e-12);
    }

    #[test]
    fn equal_temperatures_give_zero() {
        let sd = diagonalize(&ChainSpec::krawtchouk(8, 0.3, 1.0).unwrap()).unwrap();
        let b = bath(0.7, 0.7);
        assert_eq!(spin_flow(&sd, &b).unwrap(), 0.0);
        assert_eq!(heat_flow(&sd, &b).unwrap(), 0.0);
        let bounds = flow_bounds(&sd, &b).unwrap();
        assert_eq!(bounds.spin_mode, 0.0);
        assert_eq!(bounds.heat_matrix, 0.0);
    }

    #[test]
    fn conductivity_two_site_reference() {
        let sd = two_site();
        let b = bath(0.1, 0.1);
        let expected = std::f64::consts::PI / 200.0 * 0.5 * (1.0 / 0.1f64.sinh() + 9.0 / 0.3f64.sinh());
        assert_relative_eq!(conductivity(&sd, &b).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn mirror_forms_reject_asymmetric_chains() {
        let sd = diagonalize(&ChainSpec::krawtchouk(6, 0.3, 1.0).unwrap()).unwrap();
        assert!(matches!(mirror_flows(&sd, &bath(0.1, 0.2)), Err(Error::Symmetry { .. })));
        assert!(matches!(conductivity(&sd, &bath(0.1, 0.2)), Err(Error::Symmetry { .. })));
    }

    #[test]
    fn m_coefficient_identities() {
        let sd = diagonalize(&ChainSpec::krawtchouk(31, 0.5, 0.7).unwrap()).unwrap();
        assert_relative_eq!(m_coefficient(&sd), 15.0 + 0.7, max_relative = 1e-12);
        assert_relative_eq!(log_m_coefficient(&sd), (15.7f64).ln(), max_relative = 1e-12);
        let sd = diagonalize(&ChainSpec::homogeneous(20, 2.5).unwrap()).unwrap();
        assert_relative_eq!(m_coefficient(&sd), 2.5, max_relative = 1e-12);
        assert_relative_eq!(log_m_coefficient(&sd), 2.5f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn high_gap_limits_values() {
        let sd = diagonalize(&ChainSpec::krawtchouk(51, 0.3, 0.1).unwrap()).unwrap();
        let (s, h) = high_gap_limits(&sd, &bath(1e-4, 0.1));
        assert_relative_eq!(s, 2.0 * std::f64::consts::PI, max_relative = 1e-15);
        assert_relative_eq!(h, std::f64::consts::PI * (0.7 * 50.0 + 0.1), max_relative = 1e-10);
        let sd = diagonalize(&ChainSpec::krawtchouk(51, 0.5, 0.1).unwrap()).unwrap();
        let q = spin_flow(&sd, &bath(1e-4, 0.1)).unwrap();
        assert!((q - s).abs() < 0.01 * s);
    }

    #[test]
    fn asymptotic_kappa_decays_at_low_temperature() {
        for fam in [AsymptoticFamily::Homogeneous, AsymptoticFamily::KrawtchoukHalf] {
            let hot = asymptotic_kappa(fam, 20, 1.0, 2.0, 0.1, 1.0, 1.0).unwrap();
            let cold = asymptotic_kappa(fam, 20, 1.0, 2.0, 0.01, 1.0, 1.0).unwrap();
            assert!(cold < hot && cold > 0.0);
        }
        assert!(asymptotic_kappa(AsymptoticFamily::Homogeneous, 20, 2.0, 1.0, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn report_renders_flat_records() {
        let r = CurrentReport::evaluate(&two_site(), &bath(0.1, 0.2)).unwrap();
        let text = r.to_string();
        assert!(text.contains("spin_flow_left = 2.06"));
        assert!(text.contains("mirror_symmetric = true"));
        assert!(r.mirror_relative_difference.unwrap() < 1e-12);
        let value = text.lines().next().unwrap().split(" = ").nth(1).unwrap();
        assert_eq!(value.parse::<f64>().unwrap(), r.spin_flow_left);
    }

    fn random_chain(j: &[f64], b: &[f64], delta: f64) -> SpectralData<f64> {
        let n = j.len() + 1;
        diagonalize(&ChainSpec::new(j.to_vec(), b[..n].to_vec(), delta).unwrap()).unwrap()
    }

    proptest! {
        #[test]
        fn bath_swap_antisymmetry_on_mirror_chains(
            j in proptest::collection::vec(0.5f64..1.5, 1..8),
            b in proptest::collection::vec(0.0f64..1.0, 9),
            b0 in 0.05f64..5.0, bn in 0.05f64..5.0,
        ) {
            let m = j.len();
            let couplings: Vec<f64> = j.iter().chain(j.iter().rev()).copied().collect();
            let fields: Vec<f64> = b[..m].iter().chain(std::iter::once(&b[m])).chain(b[..m].iter().rev()).copied().collect();
            let sd = diagonalize(&ChainSpec::new(couplings, fields, 4.0).unwrap()).unwrap();
            let fwd = bath(b0, bn);
            let rev = fwd.swapped();
            let (q, qr) = (spin_flow(&sd, &fwd).unwrap(), spin_flow(&sd, &rev).unwrap());
            let (h, hr) = (heat_flow(&sd, &fwd).unwrap(), heat_flow(&sd, &rev).unwrap());
            prop_assert!((q + qr).abs() <= 1e-14 * q.abs());
            prop_assert!((h + hr).abs() <= 1e-14 * h.abs());
        }

        #[test]
        fn flows_follow_temperature_difference(
            j in proptest::collection::vec(0.5f64..1.5, 1..12),
            b in proptest::collection::vec(0.0f64..1.0, 13),
            b0 in 0.05f64..5.0, bn in 0.05f64..5.0,
        ) {
            let sd = random_chain(&j, &b, 4.0);
            let q = spin_flow(&sd, &bath(b0, bn)).unwrap();
            let h = heat_flow(&sd, &bath(b0, bn)).unwrap();
            prop_assert!(q * (bn - b0) >= 0.0 && h * (bn - b0) >= 0.0);
        }

        #[test]
        fn occupations_below_half(
            j in proptest::collection::vec(0.5f64..1.5, 1..12),
            b in proptest::collection::vec(0.0f64..1.0, 13),
            b0 in 0.05f64..5.0, bn in 0.05f64..5.0,
        ) {
            let sd = random_chain(&j, &b, 4.0);
            let c = ness_coefficients(&sd, &bath(b0, bn)).unwrap();
            for k in 0..c.n_modes() {
                prop_assert!(c.occupations[k] > 0.0 && c.occupations[k] < 0.5);
                prop_assert!(c.d_tilde[k] < c.d[k]);
            }
        }

        #[test]
        fn flows_increase_with_left_temperature(
            j in proptest::collection::vec(0.5f64..1.5, 1..10),
            b in proptest::collection::vec(0.0f64..1.0, 11),
            tn in 0.1f64..10.0,
        ) {
            let sd = random_chain(&j, &b, 4.0);
            let mut last = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for i in 0..30 {
                let t0 = tn * 0.2 * 1.4f64.powi(i);
                let cfg = BathConfig::from_temperatures(t0, tn, 1.0, 1.0).unwrap();
                let now = (spin_flow(&sd, &cfg).unwrap(), heat_flow(&sd, &cfg).unwrap());
                prop_assert!(now.0 >= last.0 - 1e-15 && now.1 >= last.1 - 1e-15);
                last = now;
            }
        }

        #[test]
        fn mirror_forms_agree(n in 2usize..60, b0 in 0.05f64..5.0, bn in 0.05f64..5.0) {
            let sd = diagonalize(&ChainSpec::krawtchouk(n, 0.5, 0.3).unwrap()).unwrap();
            let cfg = bath(b0, bn);
            let (ms, mh) = mirror_flows(&sd, &cfg).unwrap();
            prop_assert!(relative_difference(ms, spin_flow(&sd, &cfg).unwrap()) < 1e-9);
            prop_assert!(relative_difference(mh, heat_flow(&sd, &cfg).unwrap()) < 1e-9);
        }

        #[test]
        fn bounds_dominate(
            j in proptest::collection::vec(0.5f64..1.5, 1..12),
            b in proptest::collection::vec(0.0f64..1.0, 13),
            t_right in 0.1f64..5.0, ratio in 1.0f64..20.0,
        ) {
            let sd = random_chain(&j, &b, 3.0);
            let cfg = BathConfig::from_temperatures(t_right * ratio, t_right, 1.0, 1.0).unwrap();
            let bd = flow_bounds(&sd, &cfg).unwrap();
            prop_assert!(bd.spin_mode - spin_flow(&sd, &cfg).unwrap() >= -1e-12);
            prop_assert!(bd.heat_mode - heat_flow(&sd, &cfg).unwrap() >= -1e-12);
            prop_assert!(bd.spin_matrix - bd.spin_mode >= -1e-12);
            prop_assert!(bd.heat_matrix - bd.heat_mode >= -1e-12);
            // right-hot evaluates swapped and negates
            let rev = flow_bounds(&sd, &cfg.swapped()).unwrap();
            prop_assert!(rev.spin_mode <= 0.0);
        }
    }

    #[test]
    fn small_gap_heat_flow_is_linear() {
        let sd = diagonalize(&ChainSpec::krawtchouk(15, 0.5, 0.5).unwrap()).unwrap();
        let t = 2.0;
        let slopes: Vec<f64> = [1e-3, 1e-4, 1e-5]
            .iter()
            .map(|r| {
                let dt = r * t;
                let cfg = BathConfig::from_temperatures(t + dt / 2.0, t - dt / 2.0, 1.0, 1.0).unwrap();
                heat_flow(&sd, &cfg).unwrap() / dt
            })
            .collect();
        for s in &slopes[1..] {
            assert_relative_eq!(*s, slopes[0], max_relative = 1e-3);
        }
    }

    #[test]
    fn flows_survive_large_reduced_energies() {
        let sd = diagonalize(&ChainSpec::homogeneous(6, 3.0).unwrap()).unwrap();
        let cfg = bath(600.0 / sd.energies()[0], 700.0 / sd.energies()[0]);
        let q = spin_flow(&sd, &cfg).unwrap();
        assert!(q.is_finite() && q > 0.0);
        let (ms, _) = mirror_flows(&sd, &cfg).unwrap();
        assert_relative_eq!(ms, q, max_relative = 1e-9);
        let bd = flow_bounds(&sd, &cfg).unwrap();
        assert!(bd.spin_mode.is_finite() && bd.spin_mode >= q);
    }

    #[test]
    fn single_precision_flows() {
        let sd = diagonalize(&ChainSpec::<f32>::homogeneous(5, 3.0).unwrap()).unwrap();
        let cfg = BathConfig::<f32>::symmetric(0.2, 0.4, 1.0, 1.0).unwrap();
        let q = spin_flow(&sd, &cfg).unwrap();
        let (ms, _) = mirror_flows(&sd, &cfg).unwrap();
        assert!(((q - ms) / q).abs() < 1e-4);
    }
}
