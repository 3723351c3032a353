//! Single-particle spectral data `x_k`, `phi_n(x_k)` and functions of `H + delta`.

mod closed_form;

use std::io::Write;

use ndarray::{Array2, ArrayView1};

pub use closed_form::{closed_form_homogeneous, closed_form_krawtchouk};

use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigen;
use crate::scalar::Scalar;

/// Eigenvalue spacing below which a spectrum is reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Eigen-decomposition of the single-particle matrix `H`.
///
/// `wavefunctions[[n, k]] = phi_n(x_k)`, eigenvalues ascending, `phi_0(x_k) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData<S> {
    eigenvalues: Vec<S>,
    wavefunctions: Array2<S>,
    delta: S,
    log_coupling_product: S,
}

/// Diagonalizes `H` for `chain`.
pub fn diagonalize<S: Scalar>(chain: &ChainSpec<S>) -> Result<SpectralData<S>> {
    let eig = tridiagonal_eigen(chain.fields(), chain.couplings())?;
    let mut phi = eig.vectors;
    for (k, &x) in eig.values.iter().enumerate() {
        let mut col = phi.column_mut(k);
        let m = argmax_abs(col.view());
        if col[m] == S::zero() {
            return Err(Error::Numeric(format!("eigenvector {k} vanishes")));
        }
        let want = polynomial_sign(chain, x, m);
        if (col[m] > S::zero()) != want {
            col.mapv_inplace(|v| -v);
        }
    }
    let log_j = log_coupling_product(chain.couplings());
    refine_last_row(chain, &eig.values, log_j, &mut phi);
    SpectralData::new(eig.values, phi, chain.delta(), log_j)
}

/// QL eigenvectors carry tiny first components with full relative accuracy,
/// but not tiny last components. Where it is the better estimate, `phi_N(x_k)`
/// is rebuilt from `phi_0(x_k) phi_N(x_k) = prod_n J_n / prod_{j != k} (x_k - x_j)`,
/// provided the result agrees with the eigenvector to its absolute accuracy.
fn refine_last_row<S: Scalar>(chain: &ChainSpec<S>, x: &[S], log_j: S, phi: &mut Array2<S>) {
    let n = x.len();
    let last = n - 1;
    let eps = S::epsilon();
    let scale = x[0].abs().max(x[last].abs()).max(S::one());
    let root_n = S::from_usize_lossy(n).sqrt();
    let negative_couplings = chain.couplings().iter().filter(|v| **v < S::zero()).count() % 2 == 1;
    for k in 0..n {
        let (ln_den, cond) = x
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .fold((S::zero(), S::zero()), |(ln, cond), (_, &xj)| {
                let d = (x[k] - xj).abs();
                (ln + d.ln(), cond + d.recip())
            });
        let first = phi[[0, k]];
        let current = phi[[last, k]].abs();
        let est_identity = eps * (S::from_usize_lossy(n) + scale * cond);
        let est_numeric = if current > S::zero() { eps * root_n / current } else { S::infinity() };
        if !(est_identity < est_numeric) || first == S::zero() {
            continue;
        }
        let magnitude = (log_j - ln_den).exp() / first.abs();
        let flip = ((last - k) % 2 == 1) != negative_couplings;
        let candidate = if flip { -magnitude } else { magnitude };
        // only sharpen within the eigenvector's own absolute uncertainty
        if candidate.is_finite() && (candidate - phi[[last, k]]).abs() <= S::lit(64.0) * eps * root_n {
            phi[[last, k]] = candidate;
        }
    }
}

/// `sum_n ln |J_n|`.
pub fn log_coupling_product<S: Scalar>(couplings: &[S]) -> S {
    couplings.iter().map(|j| j.abs().ln()).sum()
}

fn argmax_abs<S: Scalar>(v: ArrayView1<S>) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

/// Sign of the orthogonal polynomial `p_m(x)` generated by the chain recurrence
/// with `p_0 = 1`, via ratios `p_n / p_{n-1}`. Returns `true` for positive.
fn polynomial_sign<S: Scalar>(chain: &ChainSpec<S>, x: S, m: usize) -> bool {
    let j = chain.couplings();
    let b = chain.fields();
    let tiny = S::min_positive_value().sqrt();
    let mut positive = true;
    let mut ratio = S::one();
    for n in 0..m {
        let mut r = x - b[n];
        if n > 0 {
            r -= j[n - 1] / ratio;
        }
        r /= j[n];
        if r == S::zero() {
            r = tiny;
        }
        if r < S::zero() {
            positive = !positive;
        }
        ratio = r;
    }
    positive
}

impl<S: Scalar> SpectralData<S> {
    /// Assembles spectral data, enforcing the gap condition `x_0 + delta > 0`.
    pub fn new(
        eigenvalues: Vec<S>,
        wavefunctions: Array2<S>,
        delta: S,
        log_coupling_product: S,
    ) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 || wavefunctions.dim() != (n, n) {
            return Err(Error::InvalidSize(format!(
                "{} eigenvalues with a {:?} wavefunction matrix",
                n,
                wavefunctions.dim()
            )));
        }
        if eigenvalues.iter().any(|x| !x.is_finite()) || wavefunctions.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite spectral data".into()));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("eigenvalues must be ascending".into()));
        }
        let lowest = eigenvalues[0] + delta;
        if !(lowest > S::zero()) {
            return Err(Error::Gap { energy: lowest.to_f64_lossy() });
        }
        Ok(SpectralData { eigenvalues, wavefunctions, delta, log_coupling_product })
    }

    pub fn n_sites(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn last_site(&self) -> usize {
        self.eigenvalues.len() - 1
    }

    pub fn eigenvalues(&self) -> &[S] {
        &self.eigenvalues
    }

    pub fn wavefunctions(&self) -> &Array2<S> {
        &self.wavefunctions
    }

    pub fn delta(&self) -> S {
        self.delta
    }

    pub fn log_coupling_product(&self) -> S {
        self.log_coupling_product
    }

    /// Mode energies `x_k + delta`.
    pub fn energies(&self) -> Vec<S> {
        self.eigenvalues.iter().map(|&x| x + self.delta).collect()
    }

    /// `phi_n(x_k)` for all `k`.
    pub fn site_row(&self, n: usize) -> ArrayView1<'_, S> {
        self.wavefunctions.row(n)
    }

    pub fn first_row(&self) -> ArrayView1<'_, S> {
        self.site_row(0)
    }

    pub fn last_row(&self) -> ArrayView1<'_, S> {
        self.site_row(self.last_site())
    }

    /// Smallest spacing between consecutive eigenvalues (infinite for one site).
    pub fn min_gap(&self) -> S {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(S::infinity(), |a, b| a.min(b))
    }

    pub fn is_degenerate(&self) -> bool {
        self.min_gap() < S::lit(DEGENERACY_GAP)
    }

    /// `max_k |phi_0(x_k)^2 - phi_N(x_k)^2|`.
    pub fn mirror_deviation(&self) -> S {
        self.first_row()
            .iter()
            .zip(self.last_row())
            .map(|(&a, &b)| (a * a - b * b).abs())
            .fold(S::zero(), |m, d| m.max(d))
    }

    /// Checks `phi_0^2 = phi_N^2` within `tol`.
    pub fn require_mirror(&self, tol: S) -> Result<()> {
        let dev = self.mirror_deviation();
        if dev > tol {
            return Err(Error::Symmetry { deviation: dev.to_f64_lossy() });
        }
        Ok(())
    }

    /// Values `f(x_k + delta)`, rejecting non-finite results.
    fn sample<F: Fn(S) -> S>(&self, f: F) -> Result<Vec<S>> {
        self.eigenvalues
            .iter()
            .map(|&x| {
                let v = f(x + self.delta);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Numeric(format!(
                        "matrix function is not finite at eigenvalue x = {x} (energy {})",
                        x + self.delta
                    )))
                }
            })
            .collect()
    }

    /// `U diag(f(x_k + delta)) U^T`.
    pub fn matrix_function<F: Fn(S) -> S>(&self, f: F) -> Result<Array2<S>> {
        let vals = self.sample(f)?;
        let mut scaled = self.wavefunctions.clone();
        for (k, v) in vals.iter().enumerate() {
            scaled.column_mut(k).mapv_inplace(|u| u * *v);
        }
        let mut out = scaled.dot(&self.wavefunctions.t());
        let n = out.nrows();
        for i in 0..n {
            for j in 0..i {
                let avg = (out[[i, j]] + out[[j, i]]) * S::lit(0.5);
                out[[i, j]] = avg;
                out[[j, i]] = avg;
            }
        }
        Ok(out)
    }

    /// `<n| f(H + delta) |m> = sum_k phi_n(x_k) phi_m(x_k) f(x_k + delta)`.
    pub fn matrix_element<F: Fn(S) -> S>(&self, n: usize, m: usize, f: F) -> Result<S> {
        let vals = self.sample(f)?;
        Ok(self
            .site_row(n)
            .iter()
            .zip(self.site_row(m))
            .zip(&vals)
            .map(|((&a, &b), &v)| a * b * v)
            .sum())
    }

    /// `|<0| exp(-i t H) |N>|`.
    pub fn transfer_fidelity(&self, time: S) -> S {
        let (mut re, mut im) = (S::zero(), S::zero());
        for ((&a, &b), &x) in self.first_row().iter().zip(self.last_row()).zip(&self.eigenvalues) {
            let w = a * b;
            let phase = time * x;
            re += w * phase.cos();
            im -= w * phase.sin();
        }
        re.hypot(im)
    }

    /// Affine map of the mode energies `E -> scale E + shift`, keeping `delta`.
    /// Wavefunctions are unchanged; couplings scale by `scale`.
    pub fn affine(&self, scale: S, shift: S) -> Result<Self> {
        if !(scale > S::zero()) {
            return Err(Error::InvalidParameter(format!("affine scale {scale} must be positive")));
        }
        let eigenvalues = self
            .eigenvalues
            .iter()
            .map(|&x| scale * (x + self.delta) + shift - self.delta)
            .collect();
        let log_j = self.log_coupling_product + S::from_usize_lossy(self.last_site()) * scale.ln();
        Self::new(eigenvalues, self.wavefunctions.clone(), self.delta, log_j)
    }

    /// Scale and shift parameters sending `[x_0 + delta, x_N + delta]` to
    /// `[e_min, e_max]`.
    pub fn rescale_parameters(&self, e_min: S, e_max: S) -> Result<(S, S)> {
        let lo = self.eigenvalues[0] + self.delta;
        let hi = self.eigenvalues[self.last_site()] + self.delta;
        if !(e_max > e_min) || !(hi > lo) {
            return Err(Error::InvalidParameter(format!(
                "cannot map [{lo}, {hi}] onto [{e_min}, {e_max}]"
            )));
        }
        let scale = (e_max - e_min) / (hi - lo);
        Ok((scale, e_min - scale * lo))
    }

    /// Spectrum affinely rescaled onto `[e_min, e_max]`.
    pub fn rescaled(&self, e_min: S, e_max: S) -> Result<Self> {
        let (scale, shift) = self.rescale_parameters(e_min, e_max)?;
        let mut out = self.affine(scale, shift)?;
        // pin the endpoints exactly
        let last = out.last_site();
        out.eigenvalues[0] = e_min - out.delta;
        out.eigenvalues[last] = e_max - out.delta;
        Ok(out)
    }

    /// Orthonormality and eigen-relation diagnostics against `chain`.
    pub fn check_invariants(&self, chain: &ChainSpec<S>) -> InvariantReport<S> {
        let n = self.n_sites();
        let u = &self.wavefunctions;
        let eye = Array2::<S>::eye(n);
        let max_abs = |a: Array2<S>| a.iter().fold(S::zero(), |m, &x| m.max(x.abs()));
        let column_orthonormality = max_abs(u.t().dot(u) - &eye);
        let row_orthonormality = max_abs(u.dot(&u.t()) - &eye);
        let h = chain.single_particle_matrix();
        let mut residual = S::zero();
        for (k, &x) in self.eigenvalues.iter().enumerate() {
            let col = u.column(k);
            let hv = h.dot(&col);
            for (a, b) in hv.iter().zip(col.iter()) {
                residual = residual.max((*a - x * *b).abs());
            }
        }
        let radius = self
            .eigenvalues
            .iter()
            .fold(S::zero(), |m, x| m.max(x.abs()))
            .max(S::one());
        let first_row_positive = self.first_row().iter().all(|&v| v > S::zero());
        InvariantReport {
            column_orthonormality,
            row_orthonormality,
            eigen_residual: residual / radius,
            first_row_positive,
        }
    }

    /// CSV with header `k,x_k,phi_0,...,phi_N` and one row per eigenvalue.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.n_sites();
        write!(out, "k,x_k")?;
        for i in 0..n {
            write!(out, ",phi_{i}")?;
        }
        writeln!(out)?;
        for k in 0..n {
            write!(out, "{k},{}", self.eigenvalues[k])?;
            for i in 0..n {
                write!(out, ",{}", self.wavefunctions[[i, k]])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Maximum elementwise difference of two spectral data sets of equal size.
    pub fn max_wavefunction_difference(&self, other: &Self) -> S {
        self.wavefunctions
            .iter()
            .zip(other.wavefunctions.iter())
            .fold(S::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn max_eigenvalue_difference(&self, other: &Self) -> S {
        self.eigenvalues
            .iter()
            .zip(&other.eigenvalues)
            .fold(S::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

/// Diagnostics from [`SpectralData::check_invariants`]. The eigen residual is
/// relative to `max(1, spectral radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport<S> {
    pub column_orthonormality: S,
    pub row_orthonormality: S,
    pub eigen_residual: S,
    pub first_row_positive: bool,
}

impl<S: Scalar> InvariantReport<S> {
    pub fn holds(&self, tol: S) -> bool {
        self.first_row_positive
            && self.column_orthonormality <= tol
            && self.row_orthonormality <= tol
            && self.eigen_residual <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn two_site() -> SpectralData<f64> {
        diagonalize(&ChainSpec::homogeneous(2, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn two_site_eigenpairs() {
        let sd = two_site();
        assert_abs_diff_eq!(sd.eigenvalues()[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sd.eigenvalues()[1], 1.0, epsilon = 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = ndarray::array![[s, s], [-s, s]];
        assert_abs_diff_eq!(sd.wavefunctions(), &expected, epsilon = 1e-15);
    }

    #[test]
    fn gap_violation_reports_energy() {
        let err = diagonalize(&ChainSpec::<f64>::homogeneous(2, 0.5).unwrap()).unwrap_err();
        match err {
            Error::Gap { energy } => assert_abs_diff_eq!(energy, -0.5, epsilon = 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn krawtchouk_spectrum_is_integer() {
        let chain = ChainSpec::krawtchouk(12, 0.3, 0.5).unwrap();
        let sd = diagonalize(&chain).unwrap();
        for (k, x) in sd.eigenvalues().iter().enumerate() {
            assert_abs_diff_eq!(*x, k as f64, epsilon = 1e-12);
        }
        assert!(sd.check_invariants(&chain).holds(1e-12));
    }

    #[test]
    fn matrix_function_examples() {
        let sd = two_site();
        let id = sd.matrix_function(|_| 1.0).unwrap();
        assert_abs_diff_eq!(id, Array2::eye(2), epsilon = 1e-15);
        let sq = sd.matrix_function(|e| e * e).unwrap();
        assert_abs_diff_eq!(sq, ndarray::array![[5.0, 4.0], [4.0, 5.0]], epsilon = 1e-13);
        let chain = ChainSpec::krawtchouk(7, 0.4, 1.0).unwrap();
        let sd = diagonalize(&chain).unwrap();
        let h = sd.matrix_function(|e| e).unwrap();
        let expected = chain.single_particle_matrix() + Array2::<f64>::eye(7);
        assert_abs_diff_eq!(h, expected, epsilon = 1e-12);
        assert!(sd.matrix_function(|e| if e < 1.5 { f64::NAN } else { e }).is_err());
    }

    #[test]
    fn tiny_end_weights_keep_relative_accuracy() {
        // phi_0(x_0)^2 = phi_N(x_0)^2 = 2^-N for the p = 1/2 Krawtchouk chain
        let sd: SpectralData<f64> = diagonalize(&ChainSpec::krawtchouk(121, 0.5, 1.0).unwrap()).unwrap();
        assert!((sd.first_row()[0].powi(2) * 2f64.powi(120) - 1.0).abs() < 1e-11);
        assert!((sd.last_row()[0].powi(2) * 2f64.powi(120) - 1.0).abs() < 1e-11);
        assert!(sd.last_row()[0] > 0.0);
        assert!(sd.last_row()[1] < 0.0);
    }

    #[test]
    fn transfer_fidelity_at_zero_time_vanishes() {
        let sd = diagonalize(&ChainSpec::krawtchouk(9, 0.3, 1.0).unwrap()).unwrap();
        assert!(sd.transfer_fidelity(0.0) < 1e-13);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        two_site().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "k,x_k,phi_0,phi_1");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,-1"));
    }

    #[test]
    fn rescaling_pins_endpoints() {
        let sd = diagonalize(&ChainSpec::krawtchouk(11, 0.5, 0.0).unwrap().with_delta(1.0).unwrap()).unwrap();
        let r = sd.rescaled(1.0, 2.0).unwrap();
        let e = r.energies();
        assert_eq!(e[0], 1.0);
        assert_eq!(e[10], 2.0);
        assert_abs_diff_eq!(e[5], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r.log_coupling_product() - sd.log_coupling_product(), 10.0 * 0.1f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let chain = ChainSpec::<f32>::homogeneous(6, 3.0).unwrap();
        let sd = diagonalize(&chain).unwrap();
        assert!(sd.check_invariants(&chain).holds(1e-5));
    }

    proptest! {
        #[test]
        fn random_chains_satisfy_invariants(
            j in proptest::collection::vec(0.2f64..2.0, 1..30),
            b in proptest::collection::vec(-1.0f64..1.0, 31),
        ) {
            let n = j.len() + 1;
            let chain = ChainSpec::new(j, b[..n].to_vec(), 8.0).unwrap();
            let sd = diagonalize(&chain).unwrap();
            let report = sd.check_invariants(&chain);
            prop_assert!(report.holds(1e-10), "{report:?}");
            let energies = sd.energies();
            let trace: f64 = energies.iter().zip(sd.last_row()).map(|(e, p)| e * p * p).sum();
            prop_assert!((trace - chain.fields()[n - 1] - 8.0).abs() < 1e-10);
        }

        #[test]
        fn polynomial_functions_multiply(
            j in proptest::collection::vec(0.2f64..2.0, 1..15),
            b in proptest::collection::vec(-1.0f64..1.0, 16),
            c in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let n = j.len() + 1;
            let sd = diagonalize(&ChainSpec::new(j, b[..n].to_vec(), 6.0).unwrap()).unwrap();
            let f = |e: f64| c[0] + c[1] * e;
            let g = |e: f64| c[2] * e * e - e;
            let lhs = sd.matrix_function(f).unwrap().dot(&sd.matrix_function(g).unwrap());
            let rhs = sd.matrix_function(|e| f(e) * g(e)).unwrap();
            let err = (lhs - rhs).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            prop_assert!(err < 1e-9);
        }
    }
}
