//! Closed-form spectra of the homogeneous and Krawtchouk chains.

use ndarray::Array2;

use super::{log_coupling_product, SpectralData};
use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest eigen-relation residual accepted from the Krawtchouk recurrence.
const KRAWTCHOUK_RESIDUAL: f64 = 1e-8;

/// Homogeneous chain (`J_n = 1`, `B_n = 0`):
/// `x_k = -2 cos((k+1) pi / (N+2))`,
/// `phi_n(x_k) = (-1)^n sqrt(2/(N+2)) sin((n+1)(k+1) pi / (N+2))`.
pub fn closed_form_homogeneous<S: Scalar>(n_sites: usize, delta: S) -> Result<SpectralData<S>> {
    if n_sites < 2 {
        return Err(Error::InvalidSize(format!("a chain needs at least 2 sites, got {n_sites}")));
    }
    let denom = S::from_usize_lossy(n_sites + 1);
    let norm = (S::lit(2.0) / denom).sqrt();
    let angle = |i: usize| S::PI() * S::from_usize_lossy(i) / denom;
    let eigenvalues = (0..n_sites).map(|k| -S::lit(2.0) * angle(k + 1).cos()).collect();
    let wavefunctions = Array2::from_shape_fn((n_sites, n_sites), |(n, k)| {
        // reduce the argument before taking sin to keep it accurate for large N
        let m = ((n + 1) * (k + 1)) % (2 * (n_sites + 1));
        let v = norm * angle(m).sin();
        if n % 2 == 0 {
            v
        } else {
            -v
        }
    });
    SpectralData::new(eigenvalues, wavefunctions, delta, S::zero())
}

/// Krawtchouk chain with parameter `p`: `x_k = k` and
/// `phi_n(x_k) = (-1)^n sqrt(C(N,k) C(N,n) p^(k+n) (1-p)^(N-k-n)) K_n(k; p, N)`.
///
/// The wavefunctions are generated by the three-term recurrence run forward
/// from the exact `phi_0(x_k)` and backward from the exact `phi_N(x_k)`, joined
/// inside the classically allowed region, with log-space prefactors.
pub fn closed_form_krawtchouk<S: Scalar>(n_sites: usize, p: S, delta: S) -> Result<SpectralData<S>> {
    let chain = ChainSpec::krawtchouk(n_sites, p, delta)?;
    let last = n_sites - 1;
    let q = S::one() - p;
    let (ln_p, ln_q) = (p.ln(), q.ln());
    let ln_fact: Vec<S> = std::iter::once(S::zero())
        .chain((1..=last).scan(S::zero(), |acc, i| {
            *acc += S::from_usize_lossy(i).ln();
            Some(*acc)
        }))
        .collect();
    let ln_binom = |k: usize| ln_fact[last] - ln_fact[k] - ln_fact[last - k];
    let j = chain.couplings();
    let b = chain.fields();
    let coupling = |n: isize| -> S {
        if n < 0 || n as usize >= last {
            S::zero()
        } else {
            j[n as usize]
        }
    };

    let mut phi = Array2::zeros((n_sites, n_sites));
    for k in 0..n_sites {
        let x = S::from_usize_lossy(k);
        let kf = S::from_usize_lossy(k);
        let rest = S::from_usize_lossy(last - k);
        let ln_first = S::lit(0.5) * (ln_binom(k) + kf * ln_p + rest * ln_q);
        let ln_last = S::lit(0.5) * (ln_binom(k) + rest * ln_p + kf * ln_q);

        let split = (0..n_sites)
            .min_by(|&a, &c| {
                let score = |n: usize| {
                    (x - b[n]).abs() - coupling(n as isize - 1) - coupling(n as isize)
                };
                score(a).partial_cmp(&score(c)).expect("finite scores")
            })
            .expect("non-empty chain");

        let mut col = vec![S::zero(); n_sites];
        forward(&mut col, split, x, b, &coupling, ln_first);
        let sign_last = if (last - k).is_multiple_of(2) { S::one() } else { -S::one() };
        backward(&mut col, split, x, b, &coupling, ln_last, sign_last);
        for (n, v) in col.into_iter().enumerate() {
            phi[[n, k]] = v;
        }
    }

    let eigenvalues: Vec<S> = (0..n_sites).map(S::from_usize_lossy).collect();
    let residual = recurrence_residual(&phi, &eigenvalues, b, j);
    if !(residual <= S::tolerance(KRAWTCHOUK_RESIDUAL)) {
        return Err(Error::Numeric(format!(
            "Krawtchouk closed form lost precision at N = {last} (residual {residual:e})"
        )));
    }
    SpectralData::new(eigenvalues, phi, delta, log_coupling_product(j))
}

const RESCALE_ABOVE: f64 = 1e64;

/// Fills `col[0..=split]` from `phi_0 = exp(ln_first)`.
fn forward<S: Scalar>(
    col: &mut [S],
    split: usize,
    x: S,
    b: &[S],
    coupling: &impl Fn(isize) -> S,
    ln_first: S,
) {
    let mut offset = ln_first;
    let (mut prev, mut cur) = (S::zero(), S::one());
    col[0] = offset.exp();
    for n in 0..split {
        let next = ((x - b[n]) * cur - coupling(n as isize - 1) * prev) / coupling(n as isize);
        prev = cur;
        cur = next;
        if cur.abs() > S::lit(RESCALE_ABOVE) {
            let s = cur.abs();
            prev /= s;
            cur /= s;
            offset += s.ln();
        }
        col[n + 1] = cur * offset.exp();
    }
}

/// Fills `col[split+1..]` from `phi_N = sign * exp(ln_last)`.
fn backward<S: Scalar>(
    col: &mut [S],
    split: usize,
    x: S,
    b: &[S],
    coupling: &impl Fn(isize) -> S,
    ln_last: S,
    sign: S,
) {
    let last = col.len() - 1;
    if split == last {
        return;
    }
    let mut offset = ln_last;
    let (mut prev, mut cur) = (S::zero(), sign);
    col[last] = sign * offset.exp();
    for n in ((split + 2)..=last).rev() {
        let next = ((x - b[n]) * cur - coupling(n as isize) * prev) / coupling(n as isize - 1);
        prev = cur;
        cur = next;
        if cur.abs() > S::lit(RESCALE_ABOVE) {
            let s = cur.abs();
            prev /= s;
            cur /= s;
            offset += s.ln();
        }
        col[n - 1] = cur * offset.exp();
    }
}

fn recurrence_residual<S: Scalar>(phi: &Array2<S>, x: &[S], b: &[S], j: &[S]) -> S {
    let n = x.len();
    let mut worst = S::zero();
    for k in 0..n {
        for i in 0..n {
            let mut r = (b[i] - x[k]) * phi[[i, k]];
            if i > 0 {
                r += j[i - 1] * phi[[i - 1, k]];
            }
            if i + 1 < n {
                r += j[i] * phi[[i + 1, k]];
            }
            worst = worst.max(r.abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::diagonalize;
    use approx::assert_abs_diff_eq;

    #[test]
    fn homogeneous_two_sites_matches_hand_result() {
        let sd = closed_form_homogeneous::<f64>(2, 2.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(sd.eigenvalues()[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sd.wavefunctions(), &ndarray::array![[s, s], [-s, s]], epsilon = 1e-15);
    }

    #[test]
    fn homogeneous_matches_numeric() {
        let closed = closed_form_homogeneous::<f64>(10, 2.5).unwrap();
        let numeric = diagonalize(&ChainSpec::homogeneous(10, 2.5).unwrap()).unwrap();
        assert!(closed.max_wavefunction_difference(&numeric) < 1e-12);
        assert!(closed.max_eigenvalue_difference(&numeric) < 1e-13);
        for k in 0..10 {
            let norm: f64 = closed.wavefunctions().column(k).iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn krawtchouk_two_sites_matches_hand_result() {
        let sd = closed_form_krawtchouk::<f64>(2, 0.5, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // H = [[1/2, 1/2], [1/2, 1/2]]: x = (0, 1)
        assert_abs_diff_eq!(sd.wavefunctions(), &ndarray::array![[s, s], [-s, s]], epsilon = 1e-15);
    }

    #[test]
    fn krawtchouk_matches_numeric() {
        let closed = closed_form_krawtchouk::<f64>(21, 0.3, 1.0).unwrap();
        let numeric = diagonalize(&ChainSpec::krawtchouk(21, 0.3, 1.0).unwrap()).unwrap();
        assert!(closed.max_wavefunction_difference(&numeric) < 1e-10);
        for k in 0..21 {
            let binom: f64 = (0..k).map(|i| (20 - i) as f64 / (i + 1) as f64).product();
            let expected = binom * 0.3f64.powi(k as i32) * 0.7f64.powi(20 - k as i32);
            assert_abs_diff_eq!(closed.first_row()[k].powi(2), expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn krawtchouk_survives_two_hundred_sites() {
        let sd = closed_form_krawtchouk::<f64>(200, 0.5, 1.0).unwrap();
        assert!(sd.first_row().iter().all(|v| *v > 0.0));
        assert!(sd.mirror_deviation() < 1e-12);
    }
}
