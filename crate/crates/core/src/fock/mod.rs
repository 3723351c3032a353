//! Exact many-body representation of small open chains.
//!
//! Everything here is dense or sparse linear algebra on the full
//! `2^(N+1)`-dimensional Fock space and is meant as an independent check of
//! the closed-form results in [`crate::currents`]. Basis states are site
//! occupation bitstrings with site 0 as the least significant bit.

mod battery;
mod dissipator;
mod lindblad;
pub mod sparse;

use ndarray::{Array1, Array2};

pub use battery::{default_battery, run_battery, run_chain, run_entry, BatteryEntry, OracleFamily, OracleVerdict};
pub use dissipator::{
    build_dissipator_superoperator, gibbs_state, ness_density_matrix, oracle_currents, trace_distance,
    verify_stationarity, Dissipator, NessDensityMatrix, OracleCurrents, StationarityReport,
};
pub use lindblad::{build_lindblad_operators, LindbladOperator, LindbladSet, ParityPlacement, Reconstruction};
pub use sparse::Csr;

use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{diagonalize, SpectralData};

/// Largest number of sites the dense Fock representation accepts.
pub const MAX_SITES: usize = 12;

/// Fermionic operators of an `N+1`-site chain.
#[derive(Debug, Clone)]
pub struct FockOperatorSet<S> {
    n_sites: usize,
    site_lowering: Vec<Csr<S>>,
    mode_lowering: Vec<Csr<S>>,
    mode_number: Vec<Csr<S>>,
    hamiltonian: Csr<S>,
    number_parity: Csr<S>,
    energies: Vec<S>,
    first_row: Vec<S>,
    last_row: Vec<S>,
}

/// Worst deviations of the operator identities, all of which should be at
/// rounding level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockInvariantReport<S> {
    /// `max |{a_n^+, a_m} - delta_nm| + |{a_n, a_m}|`.
    pub anticommutator: S,
    /// `max |H_sites - sum_k E_k b_k^+ b_k|`.
    pub hamiltonian: S,
    /// `max |b_k |0>|`.
    pub vacuum: S,
}

/// Jordan-Wigner lowering operator of site `site`:
/// `a_n |s> = (-1)^(occupied sites below n) |s - e_n>`.
fn jordan_wigner<S: Scalar>(n_sites: usize, site: usize) -> Csr<S> {
    let dim = 1usize << n_sites;
    let bit = 1usize << site;
    let triplets = (0..dim)
        .filter(|s| s & bit != 0)
        .map(|s| {
            let sign = if (s & (bit - 1)).count_ones().is_multiple_of(2) { S::one() } else { -S::one() };
            (s ^ bit, s, sign)
        })
        .collect();
    Csr::from_triplets(dim, triplets)
}

fn linear_combination<S: Scalar>(dim: usize, terms: impl Iterator<Item = (S, Csr<S>)>) -> Csr<S> {
    let triplets = terms.flat_map(|(c, op)| op.triplets().map(move |(r, col, v)| (r, col, c * v)).collect::<Vec<_>>());
    Csr::from_triplets(dim, triplets.collect())
}

/// Builds the Fock operators from spectral data alone; the site-basis
/// Hamiltonian is reassembled from `H = Phi diag(x) Phi^T`.
pub fn build_fock_operators<S: Scalar>(sd: &SpectralData<S>) -> Result<FockOperatorSet<S>> {
    let phi = sd.wavefunctions();
    let x = Array2::from_diag(&Array1::from(sd.eigenvalues().to_vec()));
    let h = phi.dot(&x).dot(&phi.t());
    FockOperatorSet::assemble(sd, &h)
}

/// Builds the Fock operators of a chain, with the site-basis Hamiltonian
/// taken directly from its couplings and fields.
pub fn build_fock_operators_for_chain<S: Scalar>(chain: &ChainSpec<S>) -> Result<(FockOperatorSet<S>, SpectralData<S>)> {
    check_capacity(chain.n_sites())?;
    let sd = diagonalize(chain)?;
    let ops = FockOperatorSet::assemble(&sd, &chain.single_particle_matrix())?;
    Ok((ops, sd))
}

fn check_capacity(n_sites: usize) -> Result<()> {
    if n_sites > MAX_SITES {
        return Err(Error::Capacity { sites: n_sites, max: MAX_SITES });
    }
    Ok(())
}

impl<S: Scalar> FockOperatorSet<S> {
    fn assemble(sd: &SpectralData<S>, single_particle: &Array2<S>) -> Result<Self> {
        let n = sd.n_sites();
        check_capacity(n)?;
        let dim = 1usize << n;
        let site_lowering: Vec<Csr<S>> = (0..n).map(|i| jordan_wigner(n, i)).collect();
        let phi = sd.wavefunctions();
        let mode_lowering: Vec<Csr<S>> = (0..n)
            .map(|k| linear_combination(dim, (0..n).map(|i| (phi[[i, k]], site_lowering[i].clone()))))
            .collect();
        let mode_number = mode_lowering.iter().map(|b| b.transpose().matmul(b)).collect();

        let delta = sd.delta();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut c = single_particle[[i, j]];
                if i == j {
                    c += delta;
                }
                if c != S::zero() {
                    terms.push((c, site_lowering[i].transpose().matmul(&site_lowering[j])));
                }
            }
        }
        let hamiltonian = linear_combination(dim, terms.into_iter());
        let parity: Vec<S> =
            (0..dim).map(|s: usize| if s.count_ones().is_multiple_of(2) { S::one() } else { -S::one() }).collect();

        Ok(FockOperatorSet {
            n_sites: n,
            site_lowering,
            mode_lowering,
            mode_number,
            hamiltonian,
            number_parity: Csr::diagonal(&parity),
            energies: sd.energies(),
            first_row: sd.first_row().to_vec(),
            last_row: sd.last_row().to_vec(),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Hilbert space dimension `2^(N+1)`.
    pub fn dimension(&self) -> usize {
        1 << self.n_sites
    }

    pub fn site_lowering(&self) -> &[Csr<S>] {
        &self.site_lowering
    }

    pub fn mode_lowering(&self) -> &[Csr<S>] {
        &self.mode_lowering
    }

    /// `b_k^+ b_k`.
    pub fn mode_number(&self) -> &[Csr<S>] {
        &self.mode_number
    }

    /// Many-body Hamiltonian built in the site basis.
    pub fn hamiltonian(&self) -> &Csr<S> {
        &self.hamiltonian
    }

    /// `(-1)^(total particle number)`.
    pub fn number_parity(&self) -> &Csr<S> {
        &self.number_parity
    }

    /// Mode energies `x_k + delta`.
    pub fn energies(&self) -> &[S] {
        &self.energies
    }

    /// `phi_0(x_k)` and `phi_N(x_k)`.
    pub fn end_rows(&self) -> (&[S], &[S]) {
        (&self.first_row, &self.last_row)
    }

    /// Total number operator.
    pub fn number_operator(&self) -> Csr<S> {
        let counts: Vec<S> = (0..self.dimension()).map(|s: usize| S::from_usize_lossy(s.count_ones() as usize)).collect();
        Csr::diagonal(&counts)
    }

    /// `sum_k E_k b_k^+ b_k`.
    pub fn mode_hamiltonian(&self) -> Csr<S> {
        linear_combination(self.dimension(), self.energies.iter().copied().zip(self.mode_number.iter().cloned()))
    }

    /// `prod_k (b_k^+)^(n_k) |0>` for the occupation bitstring `bits`
    /// (mode `k` is bit `k`).
    pub fn mode_basis_state(&self, bits: usize) -> Array1<S> {
        let mut v = Array1::zeros(self.dimension());
        v[0] = S::one();
        for k in (0..self.n_sites).rev() {
            if bits & (1 << k) != 0 {
                v = self.mode_lowering[k].transpose().mul_vec(&v);
            }
        }
        v
    }

    pub fn check_invariants(&self) -> FockInvariantReport<S> {
        let dim = self.dimension();
        let id = Csr::identity(dim);
        let mut anticommutator = S::zero();
        for (i, ai) in self.site_lowering.iter().enumerate() {
            let ai_dag = ai.transpose();
            for (j, aj) in self.site_lowering.iter().enumerate() {
                let mut mixed = ai_dag.matmul(aj).add(&aj.matmul(&ai_dag));
                if i == j {
                    mixed = mixed.sub(&id);
                }
                let same = ai.matmul(aj).add(&aj.matmul(ai));
                anticommutator = anticommutator.max(mixed.max_abs() + same.max_abs());
            }
        }
        let hamiltonian = self.hamiltonian.sub(&self.mode_hamiltonian()).max_abs();
        let mut vacuum_state = Array1::zeros(dim);
        vacuum_state[0] = S::one();
        let vacuum = self
            .mode_lowering
            .iter()
            .map(|b| b.mul_vec(&vacuum_state).iter().fold(S::zero(), |m, v| m.max(v.abs())))
            .fold(S::zero(), S::max);
        FockInvariantReport { anticommutator, hamiltonian, vacuum }
    }
}
