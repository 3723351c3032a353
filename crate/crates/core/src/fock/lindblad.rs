//! Frequency-resolved jump operators of the two end couplings.
//!
//! The end spins decompose as `sigma_0^+ = sum_k phi_0(x_k) b_k^+` and
//! `sigma_N^- = P sum_k phi_N(x_k) b_k` with `P` the number parity. Where the
//! parity factor sits is easy to get wrong, so two placements are built and
//! each is checked against the exact ladder operators.

use super::{Csr, FockOperatorSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityPlacement {
    /// Parity on both site-0 and site-`N` lowering parts and on neither raising
    /// part: `S_0 = phi_0 b^+`, `S_1 = phi_N b^+`, `S_2 = P phi_0 b`,
    /// `S_3 = P phi_N b`.
    LoweringOnly,
    /// Parity only on the site-`N` operators, arranged so that each raising
    /// part is the adjoint of a lowering part: `S_1 = phi_N b^+ P`,
    /// `S_3 = P phi_N b`.
    LastSite,
}

#[derive(Debug, Clone)]
pub struct LindbladOperator<S> {
    /// `"S_i(-E_k)"` or `"S_i(E_k)"`.
    pub label: String,
    /// Index `i` in `0..4`: 0, 2 act at site 0 and 1, 3 at site `N`.
    pub channel: usize,
    pub mode: usize,
    /// Bohr frequency, `-E_k` for raising and `E_k` for lowering.
    pub frequency: S,
    pub operator: Csr<S>,
}

/// `max |sum_omega S_i(omega) - sigma|` for the four end ladder operators.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Reconstruction<S> {
    pub sigma_plus_first: S,
    pub sigma_plus_last: S,
    pub sigma_minus_first: S,
    pub sigma_minus_last: S,
}

impl<S: Scalar> Reconstruction<S> {
    pub fn worst(&self) -> S {
        self.sigma_plus_first.max(self.sigma_plus_last).max(self.sigma_minus_first).max(self.sigma_minus_last)
    }
}

#[derive(Debug, Clone)]
pub struct LindbladSet<S> {
    pub placement: ParityPlacement,
    pub operators: Vec<LindbladOperator<S>>,
    pub reconstruction: Reconstruction<S>,
}

impl<S: Scalar> LindbladSet<S> {
    pub fn get(&self, channel: usize, mode: usize) -> Option<&LindbladOperator<S>> {
        self.operators.iter().find(|o| o.channel == channel && o.mode == mode)
    }
}

/// Exact spin ladder `sigma_n^-` from the Jordan-Wigner fermion.
fn sigma_minus<S: Scalar>(n_sites: usize, site: usize) -> Csr<S> {
    let dim = 1usize << n_sites;
    let bit = 1usize << site;
    Csr::from_triplets(dim, (0..dim).filter(|s| s & bit != 0).map(|s| (s ^ bit, s, S::one())).collect())
}

/// Builds both parity placements, each with its reconstruction error.
pub fn build_lindblad_operators<S: Scalar>(ops: &FockOperatorSet<S>) -> Vec<LindbladSet<S>> {
    [ParityPlacement::LoweringOnly, ParityPlacement::LastSite].into_iter().map(|p| build_set(ops, p)).collect()
}

fn build_set<S: Scalar>(ops: &FockOperatorSet<S>, placement: ParityPlacement) -> LindbladSet<S> {
    let n = ops.n_sites();
    let dim = ops.dimension();
    let parity = ops.number_parity();
    let (first, last) = ops.end_rows();
    let mut operators = Vec::with_capacity(4 * n);
    for k in 0..n {
        let b = &ops.mode_lowering()[k];
        let bd = b.transpose();
        let e = ops.energies()[k];
        let (s0, s1, s2, s3) = match placement {
            ParityPlacement::LoweringOnly => {
                (bd.scaled(first[k]), bd.scaled(last[k]), parity.matmul(b).scaled(first[k]), parity.matmul(b).scaled(last[k]))
            }
            ParityPlacement::LastSite => {
                (bd.scaled(first[k]), bd.matmul(parity).scaled(last[k]), b.scaled(first[k]), parity.matmul(b).scaled(last[k]))
            }
        };
        for (channel, op) in [(0, s0), (1, s1), (2, s2), (3, s3)] {
            let raising = channel < 2;
            let frequency = if raising { -e } else { e };
            let sign = if raising { "-" } else { "" };
            operators.push(LindbladOperator { label: format!("S_{channel}({sign}E_{k})"), channel, mode: k, frequency, operator: op });
        }
    }
    let total = |channel: usize| {
        operators
            .iter()
            .filter(|o| o.channel == channel)
            .fold(Csr::from_triplets(dim, Vec::new()), |acc, o| acc.add(&o.operator))
    };
    let minus_first = sigma_minus::<S>(n, 0);
    let minus_last = sigma_minus::<S>(n, n - 1);
    let reconstruction = Reconstruction {
        sigma_plus_first: total(0).sub(&minus_first.transpose()).max_abs(),
        sigma_plus_last: total(1).sub(&minus_last.transpose()).max_abs(),
        sigma_minus_first: total(2).sub(&minus_first).max_abs(),
        sigma_minus_last: total(3).sub(&minus_last).max_abs(),
    };
    LindbladSet { placement, operators, reconstruction }
}

#[cfg(test)]
mod tests {
    use super::super::build_fock_operators_for_chain;
    use super::*;
    use crate::chain::ChainSpec;
    use crate::linalg::spectral_norm;
    use approx::assert_abs_diff_eq;

    #[test]
    fn only_last_site_placement_reconstructs_the_spins() {
        let (ops, _) = build_fock_operators_for_chain(&ChainSpec::krawtchouk(4, 0.3, 1.0).unwrap()).unwrap();
        let sets = build_lindblad_operators(&ops);
        let typeset = &sets[0];
        let fixed = &sets[1];
        assert_eq!(fixed.placement, ParityPlacement::LastSite);
        assert!(fixed.reconstruction.worst() < 1e-12, "{:?}", fixed.reconstruction);
        assert!(typeset.reconstruction.sigma_plus_first < 1e-12);
        assert!(typeset.reconstruction.sigma_minus_last < 1e-12);
        assert!(typeset.reconstruction.sigma_minus_first > 0.5);
        assert!(typeset.reconstruction.sigma_plus_last > 0.5);
    }

    #[test]
    fn jump_operator_norms_are_end_weights() {
        let (ops, sd) = build_fock_operators_for_chain(&ChainSpec::homogeneous(3, 2.0).unwrap()).unwrap();
        let set = &build_lindblad_operators(&ops)[1];
        for k in 0..3 {
            let s3 = set.get(3, k).unwrap();
            assert_eq!(s3.label, format!("S_3(E_{k})"));
            let norm: f64 = spectral_norm(&s3.operator.to_dense()).unwrap();
            assert_abs_diff_eq!(norm, sd.last_row()[k].abs(), epsilon = 1e-13);
        }
    }
}
