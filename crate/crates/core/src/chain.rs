//! Chain parameter sets: couplings `J_0..J_{N-1}`, fields `B_0..B_N` and the
//! background field `delta`.
//!
//! Sites are indexed `0..=N`; [`ChainSpec::n_sites`] is `N + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::keyed_uniform;
use crate::scalar::Scalar;

/// Relative tolerance for the mirror-symmetry test on chain coefficients.
pub const MIRROR_COEFFICIENT_TOLERANCE: f64 = 1e-12;

/// Nearest-neighbour couplings, local fields and background field of an open
/// XX chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChain<S>", into = "RawChain<S>")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct ChainSpec<S> {
    couplings: Vec<S>,
    fields: Vec<S>,
    delta: S,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
struct RawChain<S> {
    couplings: Vec<S>,
    fields: Vec<S>,
    delta: S,
}

impl<S: Scalar> TryFrom<RawChain<S>> for ChainSpec<S> {
    type Error = Error;

    fn try_from(raw: RawChain<S>) -> Result<Self> {
        ChainSpec::new(raw.couplings, raw.fields, raw.delta)
    }
}

impl<S: Scalar> From<ChainSpec<S>> for RawChain<S> {
    fn from(c: ChainSpec<S>) -> Self {
        RawChain { couplings: c.couplings, fields: c.fields, delta: c.delta }
    }
}

impl<S: Scalar> ChainSpec<S> {
    pub fn new(couplings: Vec<S>, fields: Vec<S>, delta: S) -> Result<Self> {
        if fields.len() < 2 {
            return Err(Error::InvalidSize(format!(
                "a chain needs at least 2 sites, got {}",
                fields.len()
            )));
        }
        if couplings.len() + 1 != fields.len() {
            return Err(Error::InvalidSize(format!(
                "{} fields require {} couplings, got {}",
                fields.len(),
                fields.len() - 1,
                couplings.len()
            )));
        }
        if let Some(n) = couplings.iter().position(|j| *j == S::zero()) {
            return Err(Error::InvalidParameter(format!(
                "coupling J_{n} is zero and would disconnect the chain"
            )));
        }
        if couplings.iter().chain(fields.iter()).any(|v| !v.is_finite()) || !delta.is_finite() {
            return Err(Error::InvalidParameter("chain coefficients must be finite".into()));
        }
        if delta < S::zero() {
            return Err(Error::InvalidParameter(format!("background field delta = {delta} is negative")));
        }
        Ok(ChainSpec { couplings, fields, delta })
    }

    /// `J_n = 1`, `B_n = 0`.
    pub fn homogeneous(n_sites: usize, delta: S) -> Result<Self> {
        check_size(n_sites)?;
        Self::new(vec![S::one(); n_sites - 1], vec![S::zero(); n_sites], delta)
    }

    /// `J_n = sqrt(p(1-p)) sqrt((n+1)(N-n))`, `B_n = p(N-n) + (1-p)n`.
    pub fn krawtchouk(n_sites: usize, p: S, delta: S) -> Result<Self> {
        check_size(n_sites)?;
        if !(p > S::zero() && p < S::one()) {
            return Err(Error::InvalidParameter(format!("Krawtchouk parameter p = {p} must lie in (0, 1)")));
        }
        let last = n_sites - 1;
        let q = S::one() - p;
        let amp = (p * q).sqrt();
        let couplings = (0..last)
            .map(|n| amp * S::from_usize_lossy((n + 1) * (last - n)).sqrt())
            .collect();
        let fields = (0..=last)
            .map(|n| p * S::from_usize_lossy(last - n) + q * S::from_usize_lossy(n))
            .collect();
        Self::new(couplings, fields, delta)
    }

    pub fn n_sites(&self) -> usize {
        self.fields.len()
    }

    /// Index `N` of the last site.
    pub fn last_site(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn couplings(&self) -> &[S] {
        &self.couplings
    }

    pub fn fields(&self) -> &[S] {
        &self.fields
    }

    pub fn delta(&self) -> S {
        self.delta
    }

    pub fn with_delta(&self, delta: S) -> Result<Self> {
        Self::new(self.couplings.clone(), self.fields.clone(), delta)
    }

    /// Returns a copy with the local fields modified by `pert`; couplings are
    /// untouched.
    pub fn perturbed(&self, pert: &PerturbationSpec<S>) -> Result<Self> {
        pert.validate()?;
        let last = S::from_usize_lossy(self.last_site());
        let fields = self
            .fields
            .iter()
            .enumerate()
            .map(|(i, &b)| match pert.kind {
                PerturbationKind::LinearField => b + pert.strength * S::from_usize_lossy(i) / last,
                PerturbationKind::RandomField => {
                    b + pert.strength * S::lit(keyed_uniform(pert.seed, i as u64, 0))
                }
            })
            .collect();
        Self::new(self.couplings.clone(), fields, self.delta)
    }

    /// Affine map of the single-particle operator, `H + delta -> scale (H + delta) + shift`,
    /// keeping `delta` fixed.
    pub fn affine(&self, scale: S, shift: S) -> Result<Self> {
        if !(scale > S::zero()) {
            return Err(Error::InvalidParameter(format!("affine scale {scale} must be positive")));
        }
        let couplings = self.couplings.iter().map(|&j| scale * j).collect();
        let fields = self
            .fields
            .iter()
            .map(|&b| scale * (b + self.delta) + shift - self.delta)
            .collect();
        Self::new(couplings, fields, self.delta)
    }

    /// `J_n = J_{N-1-n}` and `B_n = B_{N-n}` within a relative tolerance.
    pub fn is_mirror_symmetric(&self) -> bool {
        let tol = S::tolerance(MIRROR_COEFFICIENT_TOLERANCE);
        let close = |a: S, b: S| (a - b).abs() <= tol * a.abs().max(b.abs());
        let mirrored = |v: &[S]| v.iter().zip(v.iter().rev()).all(|(&a, &b)| close(a, b));
        mirrored(&self.couplings) && mirrored(&self.fields)
    }

    /// Dense single-particle matrix `H` (without `delta`).
    pub fn single_particle_matrix(&self) -> ndarray::Array2<S> {
        let n = self.n_sites();
        let mut h = ndarray::Array2::zeros((n, n));
        for (i, &b) in self.fields.iter().enumerate() {
            h[[i, i]] = b;
        }
        for (i, &j) in self.couplings.iter().enumerate() {
            h[[i, i + 1]] = j;
            h[[i + 1, i]] = j;
        }
        h
    }
}

fn check_size(n_sites: usize) -> Result<()> {
    if n_sites < 2 {
        return Err(Error::InvalidSize(format!("a chain needs at least 2 sites, got {n_sites}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    /// `B_i -> B_i + xi * i / N`
    LinearField,
    /// `B_i -> B_i + xi * X_i`, `X_i ~ U(0, 1)`
    RandomField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct PerturbationSpec<S> {
    pub kind: PerturbationKind,
    pub strength: S,
    #[serde(default)]
    pub seed: u64,
}

impl<S: Scalar> PerturbationSpec<S> {
    pub fn linear(strength: S) -> Self {
        PerturbationSpec { kind: PerturbationKind::LinearField, strength, seed: 0 }
    }

    pub fn random(strength: S, seed: u64) -> Self {
        PerturbationSpec { kind: PerturbationKind::RandomField, strength, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.strength.is_finite() {
            return Err(Error::InvalidParameter("perturbation strength must be finite".into()));
        }
        if self.kind == PerturbationKind::RandomField && self.strength < S::zero() {
            return Err(Error::InvalidParameter(format!(
                "random-field strength {} must be non-negative",
                self.strength
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn homogeneous_builder() {
        let c = ChainSpec::<f64>::homogeneous(3, 2.0).unwrap();
        assert_eq!(c.couplings(), &[1.0, 1.0]);
        assert_eq!(c.fields(), &[0.0, 0.0, 0.0]);
        assert_eq!(c.delta(), 2.0);

        let c = ChainSpec::<f64>::homogeneous(2, 0.0).unwrap();
        assert_eq!(c.couplings(), &[1.0]);
        assert_eq!(c.fields(), &[0.0, 0.0]);

        assert!(matches!(ChainSpec::<f64>::homogeneous(1, 0.0), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn krawtchouk_builder() {
        let c = ChainSpec::<f64>::krawtchouk(3, 0.5, 0.0).unwrap();
        // J_0 = sqrt(1/4) sqrt(1*2)
        for &j in c.couplings() {
            assert_relative_eq!(j, 0.5 * 2f64.sqrt(), max_relative = 1e-15);
        }
        assert_eq!(c.fields(), &[1.0, 1.0, 1.0]);

        let c = ChainSpec::<f64>::krawtchouk(2, 0.5, 0.0).unwrap();
        assert_relative_eq!(c.couplings()[0], 0.5);
        assert_eq!(c.fields(), &[0.5, 0.5]);

        assert!(matches!(ChainSpec::<f64>::krawtchouk(5, 0.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(ChainSpec::<f64>::krawtchouk(5, 1.0, 0.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(ChainSpec::new(vec![1.0, 0.0], vec![0.0; 3], 1.0).is_err());
        assert!(ChainSpec::new(vec![1.0], vec![0.0; 3], 1.0).is_err());
        assert!(ChainSpec::new(vec![1.0, 1.0], vec![0.0; 3], -1.0).is_err());
        assert!(ChainSpec::new(vec![1.0, f64::NAN], vec![0.0; 3], 1.0).is_err());
    }

    #[test]
    fn linear_perturbation() {
        let c = ChainSpec::<f64>::homogeneous(3, 2.0).unwrap();
        let p = c.perturbed(&PerturbationSpec::linear(1.0)).unwrap();
        assert_eq!(p.fields(), &[0.0, 0.5, 1.0]);
        assert_eq!(p.couplings(), c.couplings());
        // negative strength tilts the other way
        let p = c.perturbed(&PerturbationSpec::linear(-1.0)).unwrap();
        assert_eq!(p.fields(), &[0.0, -0.5, -1.0]);
    }

    #[test]
    fn zero_strength_is_identity() {
        let c = ChainSpec::<f64>::krawtchouk(7, 0.3, 1.0).unwrap();
        assert_eq!(c.perturbed(&PerturbationSpec::linear(0.0)).unwrap(), c);
        assert_eq!(c.perturbed(&PerturbationSpec::random(0.0, 9)).unwrap(), c);
    }

    #[test]
    fn random_perturbation_is_seeded() {
        let c = ChainSpec::<f64>::homogeneous(20, 2.0).unwrap();
        let a = c.perturbed(&PerturbationSpec::random(0.3, 42)).unwrap();
        let b = c.perturbed(&PerturbationSpec::random(0.3, 42)).unwrap();
        assert_eq!(a, b);
        let other = c.perturbed(&PerturbationSpec::random(0.3, 43)).unwrap();
        assert_ne!(a, other);
        assert!(a.fields().iter().all(|&b| (0.0..0.3).contains(&b)));
        // per-site draws do not depend on chain length
        let longer = ChainSpec::<f64>::homogeneous(30, 2.0)
            .unwrap()
            .perturbed(&PerturbationSpec::random(0.3, 42))
            .unwrap();
        assert_eq!(&longer.fields()[..20], a.fields());
        assert!(c.perturbed(&PerturbationSpec::random(-0.1, 1)).is_err());
    }

    #[test]
    fn mirror_symmetry() {
        assert!(ChainSpec::<f64>::homogeneous(9, 0.0).unwrap().is_mirror_symmetric());
        for n in 2..=200 {
            assert!(ChainSpec::<f64>::krawtchouk(n, 0.5, 0.0).unwrap().is_mirror_symmetric());
            assert!(!ChainSpec::<f64>::krawtchouk(n, 0.3, 0.0).unwrap().is_mirror_symmetric());
        }
        let c = ChainSpec::<f64>::homogeneous(5, 2.0).unwrap();
        assert!(!c.perturbed(&PerturbationSpec::linear(0.1)).unwrap().is_mirror_symmetric());
    }

    #[test]
    fn affine_rescale_maps_operator() {
        let c = ChainSpec::<f64>::krawtchouk(5, 0.5, 0.5).unwrap();
        let r = c.affine(0.5, 1.0).unwrap();
        assert_relative_eq!(r.couplings()[1], 0.5 * c.couplings()[1]);
        assert_relative_eq!(r.fields()[0] + r.delta(), 0.5 * (c.fields()[0] + 0.5) + 1.0);
        assert!(c.affine(0.0, 1.0).is_err());
    }

    #[test]
    fn serde_round_trip_and_validation() {
        let c = ChainSpec::<f64>::krawtchouk(4, 0.3, 0.25).unwrap();
        let text = toml::to_string(&c).unwrap();
        let back: ChainSpec<f64> = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
        let bad = "couplings = [1.0]\nfields = [0.0, 0.0, 0.0]\ndelta = 1.0\n";
        assert!(toml::from_str::<ChainSpec<f64>>(bad).is_err());
    }

    #[test]
    fn builders_are_generic() {
        let c = ChainSpec::<f32>::krawtchouk(4, 0.5, 1.0).unwrap();
        assert!(c.is_mirror_symmetric());
    }
}
