//! Compressed sparse row matrices, just enough for Fock-space operators acting
//! on dense density matrices.

use ndarray::{Array1, Array2};

use crate::scalar::Scalar;

/// Square CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<S> {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> Csr<S> {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, S)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; dim + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<S> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *data.last_mut().expect("entry exists") += v;
                continue;
            }
            indices.push(c);
            data.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        Csr { dim, indptr, indices, data }.pruned()
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![S::one(); dim])
    }

    pub fn diagonal(values: &[S]) -> Self {
        Self::from_triplets(values.len(), values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    fn pruned(self) -> Self {
        if self.data.iter().all(|v| *v != S::zero()) {
            return self;
        }
        let triplets = self.triplets().filter(|t| t.2 != S::zero()).collect();
        Self::from_triplets(self.dim, triplets)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |i| (r, self.indices[i], self.data[i]))
        })
    }

    /// Transpose, which is the adjoint for real matrices.
    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v)).collect())
    }

    pub fn scaled(&self, s: S) -> Self {
        Csr { data: self.data.iter().map(|&v| v * s).collect(), ..self.clone() }.pruned()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-S::one()))
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            for i in self.indptr[r]..self.indptr[r + 1] {
                let (m, a) = (self.indices[i], self.data[i]);
                for j in other.indptr[m]..other.indptr[m + 1] {
                    triplets.push((r, other.indices[j], a * other.data[j]));
                }
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    /// `self * x` for a dense matrix `x`.
    pub fn mul_dense(&self, x: &Array2<S>) -> Array2<S> {
        let mut out = Array2::zeros((self.dim, x.ncols()));
        for r in 0..self.dim {
            let mut row = out.row_mut(r);
            for i in self.indptr[r]..self.indptr[r + 1] {
                row.scaled_add(self.data[i], &x.row(self.indices[i]));
            }
        }
        out
    }

    /// `x * self` for a dense matrix `x`.
    pub fn dense_mul(&self, x: &Array2<S>) -> Array2<S> {
        let mut out = Array2::zeros((x.nrows(), self.dim));
        for r in 0..self.dim {
            for i in self.indptr[r]..self.indptr[r + 1] {
                let (c, v) = (self.indices[i], self.data[i]);
                out.column_mut(c).scaled_add(v, &x.column(r));
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &Array1<S>) -> Array1<S> {
        Array1::from_shape_fn(self.dim, |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(|i| self.data[i] * x[self.indices[i]]).sum()
        })
    }

    pub fn to_dense(&self) -> Array2<S> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for (r, c, v) in self.triplets() {
            out[[r, c]] += v;
        }
        out
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |m, v| m.max(v.abs()))
    }

    /// `Tr(self * x)`.
    pub fn trace_with(&self, x: &Array2<S>) -> S {
        self.triplets().map(|(r, c, v)| v * x[[c, r]]).sum()
    }
}
