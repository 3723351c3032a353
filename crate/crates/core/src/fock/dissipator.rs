use ndarray::Array2;

use super::{check_capacity, Csr, FockOperatorSet};
use crate::currents::NessCoefficients;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, symmetric_eigen};
use crate::rng::keyed_uniform;
use crate::scalar::Scalar;

/// Largest Hilbert dimension for which the superoperator is materialized as a
/// dense `dim^2 x dim^2` matrix.
const MATERIALIZE_MAX_DIM: usize = 16;

/// The bath dissipator
/// `D[rho] = lambda^2 sum_k d_k (b rho b^+ - {b^+ b, rho}/2) + d~_k (b^+ rho b - {b b^+, rho}/2)`.
#[derive(Debug, Clone)]
pub struct Dissipator<'a, S> {
    ops: &'a FockOperatorSet<S>,
    coeffs: &'a NessCoefficients<S>,
    lambda: S,
    raising: Vec<Csr<S>>,
    hole_number: Vec<Csr<S>>,
    superoperator: Option<Array2<S>>,
}

pub fn build_dissipator_superoperator<'a, S: Scalar>(
    ops: &'a FockOperatorSet<S>,
    coeffs: &'a NessCoefficients<S>,
    lambda: S,
) -> Result<Dissipator<'a, S>> {
    check_capacity(ops.n_sites())?;
    if coeffs.n_modes() != ops.n_sites() {
        return Err(Error::InvalidSize(format!(
            "{} rate pairs for {} modes",
            coeffs.n_modes(),
            ops.n_sites()
        )));
    }
    if coeffs.d.iter().chain(coeffs.d_tilde.iter()).any(|v| !(*v >= S::zero())) {
        return Err(Error::Domain("dissipator rates must be non-negative".into()));
    }
    let id = Csr::identity(ops.dimension());
    let raising = ops.mode_lowering().iter().map(Csr::transpose).collect();
    let hole_number = ops.mode_number().iter().map(|n| id.sub(n)).collect();
    let mut diss = Dissipator { ops, coeffs, lambda, raising, hole_number, superoperator: None };
    if ops.dimension() <= MATERIALIZE_MAX_DIM {
        diss.superoperator = Some(diss.materialize());
    }
    Ok(diss)
}

fn anticommutator<S: Scalar>(a: &Csr<S>, x: &Array2<S>) -> Array2<S> {
    a.mul_dense(x) + a.dense_mul(x)
}

impl<'a, S: Scalar> Dissipator<'a, S> {
    pub fn ops(&self) -> &FockOperatorSet<S> {
        self.ops
    }

    pub fn coefficients(&self) -> &NessCoefficients<S> {
        self.coeffs
    }

    pub fn lambda(&self) -> S {
        self.lambda
    }

    pub fn apply(&self, rho: &Array2<S>) -> Array2<S> {
        let half = S::lit(0.5);
        let mut out = Array2::zeros(rho.raw_dim());
        for k in 0..self.ops.n_sites() {
            let b = &self.ops.mode_lowering()[k];
            let bd = &self.raising[k];
            let loss = b.mul_dense(&bd.dense_mul(rho)) - anticommutator(&self.ops.mode_number()[k], rho) * half;
            let gain = bd.mul_dense(&b.dense_mul(rho)) - anticommutator(&self.hole_number[k], rho) * half;
            out = out + loss * self.coeffs.d[k] + gain * self.coeffs.d_tilde[k];
        }
        out * (self.lambda * self.lambda)
    }

    /// Heisenberg-picture dissipator of bath `alpha` (0 left, 1 right):
    /// `lambda^2 sum_k phi_a^2 [C (b^+ O b - {b^+ b, O}/2) + C~ (b O b^+ - {b b^+, O}/2)]`.
    pub fn adjoint_bath(&self, alpha: usize, op: &Csr<S>) -> Csr<S> {
        let row = if alpha == 0 { self.ops.end_rows().0 } else { self.ops.end_rows().1 };
        let half = S::lit(0.5);
        let dim = self.ops.dimension();
        let mut out = Csr::from_triplets(dim, Vec::new());
        for (k, &f) in row.iter().enumerate() {
            let w = f * f;
            let c = w * self.coeffs.big_c[[alpha, k]];
            let ct = w * self.coeffs.big_c_tilde[[alpha, k]];
            let b = &self.ops.mode_lowering()[k];
            let bd = &self.raising[k];
            let n = &self.ops.mode_number()[k];
            let m = &self.hole_number[k];
            let loss = bd.matmul(op).matmul(b).sub(&n.matmul(op).add(&op.matmul(n)).scaled(half));
            let gain = b.matmul(op).matmul(bd).sub(&m.matmul(op).add(&op.matmul(m)).scaled(half));
            out = out.add(&loss.scaled(c)).add(&gain.scaled(ct));
        }
        out.scaled(self.lambda * self.lambda)
    }

    fn materialize(&self) -> Array2<S> {
        let dim = self.ops.dimension();
        let mut m = Array2::zeros((dim * dim, dim * dim));
        for i in 0..dim {
            for j in 0..dim {
                let mut unit = Array2::zeros((dim, dim));
                unit[[i, j]] = S::one();
                let image = self.apply(&unit);
                for ((r, c), v) in image.indexed_iter() {
                    m[[r * dim + c, i * dim + j]] = *v;
                }
            }
        }
        m
    }

    /// Dense superoperator acting on row-major vectorized matrices, when the
    /// dimension is small enough to store it.
    pub fn superoperator(&self) -> Option<&Array2<S>> {
        self.superoperator.as_ref()
    }

    /// Spectral norm of the materialized superoperator, or the bound
    /// `2 lambda^2 sum_k (d_k + d~_k)` when it is applied functionally.
    pub fn norm(&self) -> Result<S> {
        match &self.superoperator {
            Some(m) => spectral_norm(m),
            None => {
                let total: S = self.coeffs.d.iter().zip(self.coeffs.d_tilde.iter()).map(|(a, b)| *a + *b).sum();
                Ok(S::lit(2.0) * self.lambda * self.lambda * total)
            }
        }
    }
}

/// Steady state `rho = prod_k (d_k + (d~_k - d_k) b_k^+ b_k) / (d_k + d~_k)`.
#[derive(Debug, Clone)]
pub struct NessDensityMatrix<S> {
    /// Weight of each mode-occupation bitstring (mode `k` is bit `k`).
    pub weights: Vec<S>,
    /// Dense matrix in the site-occupation basis.
    pub rho: Array2<S>,
}

pub fn ness_density_matrix<S: Scalar>(ops: &FockOperatorSet<S>, coeffs: &NessCoefficients<S>) -> Result<NessDensityMatrix<S>> {
    check_capacity(ops.n_sites())?;
    let n = ops.n_sites();
    if coeffs.n_modes() != n {
        return Err(Error::InvalidSize(format!("{} rate pairs for {n} modes", coeffs.n_modes())));
    }
    let weights = (0..1usize << n)
        .map(|bits| {
            (0..n)
                .map(|k| {
                    let (d, dt) = (coeffs.d[k], coeffs.d_tilde[k]);
                    if bits & (1 << k) != 0 {
                        dt / (d + dt)
                    } else {
                        d / (d + dt)
                    }
                })
                .product()
        })
        .collect();
    let dim = ops.dimension();
    let id = Csr::identity(dim);
    let mut rho = Array2::eye(dim);
    for k in 0..n {
        let (d, dt) = (coeffs.d[k], coeffs.d_tilde[k]);
        let factor = id.scaled(d).add(&ops.mode_number()[k].scaled(dt - d)).scaled(S::one() / (d + dt));
        rho = factor.mul_dense(&rho);
    }
    Ok(NessDensityMatrix { weights, rho })
}

impl<S: Scalar> NessDensityMatrix<S> {
    pub fn trace(&self) -> S {
        self.rho.diag().sum()
    }

    /// `Tr(b_k^+ b_k rho)` for every mode.
    pub fn mode_occupations(&self, ops: &FockOperatorSet<S>) -> Vec<S> {
        ops.mode_number().iter().map(|n| n.trace_with(&self.rho)).collect()
    }
}

/// Pieces of the stationarity residual of the NESS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityReport<S> {
    /// `max |D[rho]|`.
    pub dissipator: S,
    /// `max |[H, rho]|`.
    pub hamiltonian: S,
    /// `max |[sum_k c_k b_k^+ b_k, rho]|` for random `c_k`, standing in for
    /// the mode-diagonal Lamb shift.
    pub lamb_shift: S,
    pub dissipator_norm: S,
}

impl<S: Scalar> StationarityReport<S> {
    pub fn residual(&self) -> S {
        self.dissipator + self.hamiltonian + self.lamb_shift
    }

    /// Residual divided by the dissipator norm.
    pub fn relative(&self) -> S {
        self.residual() / self.dissipator_norm
    }
}

fn max_abs<S: Scalar>(a: &Array2<S>) -> S {
    a.iter().fold(S::zero(), |m, v| m.max(v.abs()))
}

fn commutator_norm<S: Scalar>(a: &Csr<S>, x: &Array2<S>) -> S {
    max_abs(&(a.mul_dense(x) - a.dense_mul(x)))
}

/// Evaluates every term of the Lindblad generator on `rho`.
pub fn verify_stationarity<S: Scalar>(diss: &Dissipator<'_, S>, rho: &Array2<S>, seed: u64) -> Result<StationarityReport<S>> {
    let ops = diss.ops();
    let shift = Csr::from_triplets(
        ops.dimension(),
        ops.mode_number()
            .iter()
            .enumerate()
            .flat_map(|(k, n)| {
                let c = S::lit(keyed_uniform(seed, 0, k as u64) * 2.0 - 1.0);
                n.triplets().map(move |(r, col, v)| (r, col, c * v)).collect::<Vec<_>>()
            })
            .collect(),
    );
    Ok(StationarityReport {
        dissipator: max_abs(&diss.apply(rho)),
        hamiltonian: commutator_norm(ops.hamiltonian(), rho),
        lamb_shift: commutator_norm(&shift, rho),
        dissipator_norm: diss.norm()?,
    })
}

/// Spin and heat flows out of each bath.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OracleCurrents<S> {
    pub spin_left: S,
    pub spin_right: S,
    pub heat_left: S,
    pub heat_right: S,
}

impl<S: Scalar> OracleCurrents<S> {
    pub fn spin_balance(&self) -> S {
        self.spin_left + self.spin_right
    }

    pub fn heat_balance(&self) -> S {
        self.heat_left + self.heat_right
    }
}

/// `Q_a = Tr(D~_a[sum_n sigma^z_n] rho)` and `h_a = Tr(D~_a[H] rho)`.
pub fn oracle_currents<S: Scalar>(diss: &Dissipator<'_, S>, rho: &Array2<S>) -> OracleCurrents<S> {
    let ops = diss.ops();
    let dim = ops.dimension();
    // sum_n sigma^z_n = 2 N - (N+1)
    let magnetization = ops
        .number_operator()
        .scaled(S::lit(2.0))
        .sub(&Csr::identity(dim).scaled(S::from_usize_lossy(ops.n_sites())));
    let flow = |alpha: usize, op: &Csr<S>| diss.adjoint_bath(alpha, op).trace_with(rho);
    OracleCurrents {
        spin_left: flow(0, &magnetization),
        spin_right: flow(1, &magnetization),
        heat_left: flow(0, ops.hamiltonian()),
        heat_right: flow(1, ops.hamiltonian()),
    }
}

fn sectors(n_sites: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n_sites + 1];
    for s in 0..1usize << n_sites {
        out[s.count_ones() as usize].push(s);
    }
    out
}

fn block<S: Scalar>(a: &Array2<S>, idx: &[usize]) -> Array2<S> {
    Array2::from_shape_fn((idx.len(), idx.len()), |(i, j)| a[[idx[i], idx[j]]])
}

/// `exp(-beta H) / Tr exp(-beta H)`, diagonalizing `H` one particle-number
/// sector at a time.
pub fn gibbs_state<S: Scalar>(ops: &FockOperatorSet<S>, beta: S) -> Result<Array2<S>> {
    let h = ops.hamiltonian().to_dense();
    let mut blocks = Vec::new();
    let mut lowest = S::infinity();
    for idx in sectors(ops.n_sites()) {
        let eig = symmetric_eigen(&block(&h, &idx))?;
        lowest = lowest.min(eig.values[0]);
        blocks.push((idx, eig));
    }
    let dim = ops.dimension();
    let mut rho = Array2::zeros((dim, dim));
    for (idx, eig) in blocks {
        let w = Array2::from_diag(&eig.values.iter().map(|e| (-beta * (*e - lowest)).exp()).collect::<ndarray::Array1<S>>());
        let sub = eig.vectors.dot(&w).dot(&eig.vectors.t());
        for (i, &r) in idx.iter().enumerate() {
            for (j, &c) in idx.iter().enumerate() {
                rho[[r, c]] = sub[[i, j]];
            }
        }
    }
    let z = rho.diag().sum();
    Ok(rho / z)
}

/// Trace distance `||a - b||_1 / 2` between two number-conserving states,
/// computed sector by sector. Any entry coupling different sectors is added
/// as a penalty, so the result never understates a violation of that
/// assumption.
pub fn trace_distance<S: Scalar>(ops: &FockOperatorSet<S>, a: &Array2<S>, b: &Array2<S>) -> Result<S> {
    let diff = a - b;
    let mut total = S::zero();
    for idx in sectors(ops.n_sites()) {
        let eig = symmetric_eigen(&block(&diff, &idx))?;
        total += eig.values.iter().map(|v| v.abs()).sum::<S>();
    }
    let mut leak = S::zero();
    for ((r, c), v) in diff.indexed_iter() {
        if r.count_ones() != c.count_ones() {
            leak = leak.max(v.abs());
        }
    }
    Ok(S::lit(0.5) * total + leak)
}
