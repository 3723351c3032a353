//! Symmetric eigensolvers: implicit QL on tridiagonal matrices and Householder
//! reduction for dense symmetric matrices.
//!
//! Both follow the EISPACK `tred2`/`tql2` procedures (Martin, Reinsch and
//! Wilkinson), written generically over [`Scalar`].

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<S> {
    pub values: Vec<S>,
    pub vectors: Array2<S>,
}

/// Diagonalizes the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen<S: Scalar>(diag: &[S], off: &[S]) -> Result<SymmetricEigen<S>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::InvalidSize(format!(
            "tridiagonal matrix with {} diagonal and {} off-diagonal entries",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    // tql2 layout: e[i] couples i-1 and i, e[0] unused
    let mut e = vec![S::zero(); n];
    e[1..].copy_from_slice(off);
    let mut z = identity_col_major::<S>(n);
    tql2(&mut d, &mut e, Some(&mut z), n)?;
    Ok(sorted(d, z, n))
}

/// Eigenvalues only, ascending.
pub fn tridiagonal_eigenvalues<S: Scalar>(diag: &[S], off: &[S]) -> Result<Vec<S>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::InvalidSize(format!(
            "tridiagonal matrix with {} diagonal and {} off-diagonal entries",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = vec![S::zero(); n];
    e[1..].copy_from_slice(off);
    tql2(&mut d, &mut e, None, n)?;
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(d)
}

/// Diagonalizes a dense symmetric matrix. Only the lower triangle is read.
pub fn symmetric_eigen<S: Scalar>(a: &Array2<S>) -> Result<SymmetricEigen<S>> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::InvalidSize(format!("matrix of shape {:?} is not square", a.dim())));
    }
    if n == 1 {
        return Ok(SymmetricEigen { values: vec![a[[0, 0]]], vectors: Array2::from_elem((1, 1), S::one()) });
    }
    // row-major working copy
    let mut v: Vec<S> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| if j <= i { a[[i, j]] } else { a[[j, i]] })
        .collect();
    let mut d = vec![S::zero(); n];
    let mut e = vec![S::zero(); n];
    tred2(&mut v, &mut d, &mut e, n);
    // tql2 works on columns
    let mut z = vec![S::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            z[j * n + i] = v[i * n + j];
        }
    }
    tql2(&mut d, &mut e, Some(&mut z), n)?;
    Ok(sorted(d, z, n))
}

/// Largest singular value of `a`.
pub fn spectral_norm<S: Scalar>(a: &Array2<S>) -> Result<S> {
    let gram = a.t().dot(a);
    let eig = symmetric_eigen(&gram)?;
    Ok(eig.values.last().copied().unwrap_or_else(S::zero).max(S::zero()).sqrt())
}

fn identity_col_major<S: Scalar>(n: usize) -> Vec<S> {
    let mut z = vec![S::zero(); n * n];
    for i in 0..n {
        z[i * n + i] = S::one();
    }
    z
}

fn sorted<S: Scalar>(d: Vec<S>, z: Vec<S>, n: usize) -> SymmetricEigen<S> {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vectors[[row, col]] = z[k * n + row];
        }
    }
    SymmetricEigen { values, vectors }
}

/// Implicit QL with Wilkinson-style shifts. `z`, when given, is column-major
/// and is post-multiplied by the accumulated rotations.
fn tql2<S: Scalar>(d: &mut [S], e: &mut [S], mut z: Option<&mut [S]>, n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = S::zero();

    let two = S::lit(2.0);
    let eps = S::epsilon();
    let mut f = S::zero();
    let mut tst1 = S::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS_PER_EIGENVALUE {
                    return Err(Error::Numeric(format!(
                        "tridiagonal QL did not converge for eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(S::one());
                if p < S::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = S::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = S::zero();
                let mut s2 = S::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (left, right) = z.split_at_mut((i + 1) * n);
                        let col_i = &mut left[i * n..];
                        let col_next = &mut right[..n];
                        for (zi, zn) in col_i.iter_mut().zip(col_next.iter_mut()) {
                            let hh = *zn;
                            *zn = s * *zi + c * hh;
                            *zi = c * *zi - s * hh;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = S::zero();
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite eigenvalue".into()));
    }
    Ok(())
}

/// Householder reduction of the row-major symmetric matrix `v` to tridiagonal
/// form. On return `v` holds the orthogonal transformation, `d` the diagonal
/// and `e[1..]` the off-diagonal.
fn tred2<S: Scalar>(v: &mut [S], d: &mut [S], e: &mut [S], n: usize) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = S::zero();
        let mut h = S::zero();
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == S::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = S::zero();
                v[at(j, i)] = S::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > S::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = S::zero();
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = S::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[at(k, j)] -= upd;
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = S::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = S::one();
        let h = d[i + 1];
        if h != S::zero() {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = S::zero();
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[at(k, j)] -= upd;
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = S::zero();
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = S::zero();
    }
    v[at(n - 1, n - 1)] = S::one();
    e[0] = S::zero();
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn check_decomposition(a: &Array2<f64>, eig: &SymmetricEigen<f64>, tol: f64) {
        let n = a.nrows();
        let v = &eig.vectors;
        let orth = v.t().dot(v) - Array2::<f64>::eye(n);
        assert!(max_abs(&orth) < tol, "orthogonality {}", max_abs(&orth));
        let lam = Array2::from_diag(&ndarray::Array1::from(eig.values.clone()));
        let recon = v.dot(&lam).dot(&v.t()) - a;
        assert!(max_abs(&recon) < tol * (1.0 + max_abs(a)), "reconstruction {}", max_abs(&recon));
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn two_by_two() {
        let eig = tridiagonal_eigen::<f64>(&[0.0, 0.0], &[1.0]).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_by_one() {
        let eig = tridiagonal_eigen(&[3.0], &[]).unwrap();
        assert_eq!(eig.values, vec![3.0]);
        assert_eq!(tridiagonal_eigenvalues(&[3.0], &[]).unwrap(), vec![3.0]);
        assert!(tridiagonal_eigen::<f64>(&[], &[]).is_err());
    }

    #[test]
    fn dense_matches_tridiagonal() {
        let diag: [f64; 4] = [0.3, -1.0, 2.0, 0.5];
        let off: [f64; 3] = [1.0, 0.7, -0.2];
        let mut a = Array2::zeros((4, 4));
        for i in 0..4 {
            a[[i, i]] = diag[i];
        }
        for i in 0..3 {
            a[[i, i + 1]] = off[i];
            a[[i + 1, i]] = off[i];
        }
        let t = tridiagonal_eigen(&diag, &off).unwrap();
        let d = symmetric_eigen(&a).unwrap();
        for (x, y) in t.values.iter().zip(&d.values) {
            assert!((x - y).abs() < 1e-13);
        }
        check_decomposition(&a, &t, 1e-13);
        check_decomposition(&a, &d, 1e-13);
    }

    #[test]
    fn spectral_norm_of_rotation_and_scaling() {
        let a: Array2<f64> = ndarray::array![[0.0, 2.0], [-3.0, 0.0]];
        assert!((spectral_norm(&a).unwrap() - 3.0).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn dense_random_symmetric(entries in proptest::collection::vec(-2.0f64..2.0, 36)) {
            let mut a = Array2::zeros((6, 6));
            for i in 0..6 {
                for j in 0..=i {
                    a[[i, j]] = entries[i * 6 + j];
                    a[[j, i]] = entries[i * 6 + j];
                }
            }
            let eig = symmetric_eigen(&a).unwrap();
            check_decomposition(&a, &eig, 1e-12);
        }

        #[test]
        fn tridiagonal_random(diag in proptest::collection::vec(-3.0f64..3.0, 2..40),
                              seed in proptest::collection::vec(0.1f64..2.0, 39)) {
            let n = diag.len();
            let off = &seed[..n - 1];
            let eig = tridiagonal_eigen(&diag, off).unwrap();
            let mut a = Array2::zeros((n, n));
            for i in 0..n { a[[i, i]] = diag[i]; }
            for i in 0..n - 1 { a[[i, i + 1]] = off[i]; a[[i + 1, i]] = off[i]; }
            check_decomposition(&a, &eig, 1e-12);
            let vals = tridiagonal_eigenvalues(&diag, off).unwrap();
            for (x, y) in vals.iter().zip(&eig.values) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
