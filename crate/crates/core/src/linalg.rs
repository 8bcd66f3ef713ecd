//! Minimal dense linear algebra: symmetric matrices, Cholesky factorization,
//! triangular solves and a Jacobi eigensolver.
//!
//! Matrices here are small (Gram matrices of a few hundred training points at
//! most), so plain row-major storage and textbook algorithms are sufficient
//! and keep the code generic over the scalar type.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Sum of the diagonal.
    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn mean_diag(&self) -> T {
        let n = self.rows.min(self.cols);
        if n == 0 {
            T::zero()
        } else {
            self.trace() / T::of(n as f64)
        }
    }

    /// `self * v` for a square or rectangular matrix.
    pub fn mat_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum::<T>()
            })
            .collect()
    }

    /// Forces exact symmetry by mirroring the lower triangle upward.
    pub fn symmetrize_from_lower(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                self[(i, j)] = self[(j, i)];
            }
        }
    }
}

impl<T> core::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> core::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
///
/// Returns `Err(pivot)` with the index of the first nonpositive (or
/// non-finite) pivot when the matrix is not numerically positive definite.
pub fn cholesky<T: Real>(a: &Mat<T>) -> Result<Mat<T>, usize> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return Err(i);
                }
                l[(i, j)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn solve_lower<T: Real>(l: &Mat<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    for i in 0..n {
        let row = l.row(i);
        let mut s = x[i];
        for k in 0..i {
            s = s - row[k] * x[k];
        }
        x[i] = s / row[i];
    }
    x
}

/// Solves `L^T x = b` for lower-triangular `L`.
pub fn solve_lower_transpose<T: Real>(l: &Mat<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s = s - l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// Solves `(L L^T) x = b` given the Cholesky factor.
pub fn chol_solve<T: Real>(l: &Mat<T>, b: &[T]) -> Vec<T> {
    solve_lower_transpose(l, &solve_lower(l, b))
}

/// `log det(L L^T) = 2 sum_i log L_ii`.
pub fn chol_logdet<T: Real>(l: &Mat<T>) -> T {
    let two = T::of(2.0);
    two * (0..l.rows()).map(|i| l[(i, i)].ln()).sum::<T>()
}

/// Full symmetric inverse `(L L^T)^{-1}` from the Cholesky factor.
///
/// Computes `L^{-1}` by forward substitution, then forms `L^{-T} L^{-1}`.
pub fn chol_inverse<T: Real>(l: &Mat<T>) -> Mat<T> {
    let n = l.rows();
    // linv is lower triangular.
    let mut linv = Mat::zeros(n, n);
    for j in 0..n {
        linv[(j, j)] = T::one() / l[(j, j)];
        for i in j + 1..n {
            let mut s = T::zero();
            for k in j..i {
                s = s - l[(i, k)] * linv[(k, j)];
            }
            linv[(i, j)] = s / l[(i, i)];
        }
    }
    let mut inv = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            // (L^{-T} L^{-1})_{ij} = sum_k linv[k,i] * linv[k,j], k >= max(i,j)
            let mut s = T::zero();
            for k in i..n {
                s = s + linv[(k, i)] * linv[(k, j)];
            }
            inv[(i, j)] = s;
        }
    }
    inv.symmetrize_from_lower();
    inv
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, ascending.
///
/// Accurate to near machine precision for the small matrices used here.
pub fn sym_eigenvalues<T: Real>(a: &Mat<T>) -> Vec<T> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut m = a.clone();
    let eps = T::of(1e-14);
    let norm = m
        .as_slice()
        .iter()
        .map(|&x| x * x)
        .sum::<T>()
        .sqrt()
        .max(T::one());
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= eps * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (T::of(2.0) * apq);
                // Stable tangent of the rotation angle.
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| m[(i, i)]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    eig
}

/// Cholesky with an escalating diagonal jitter.
///
/// Tries the plain factorization first; on failure adds
/// `jitter * mean(diag)` starting at `start_rel` and escalating by 10x up to
/// `max_rel`. Returns the factor and the jitter actually applied (zero when
/// none was needed), or the last failing pivot.
pub fn cholesky_with_jitter<T: Real>(
    a: &Mat<T>,
    start_rel: T,
    max_rel: T,
) -> Result<(Mat<T>, T), usize> {
    match cholesky(a) {
        Ok(l) => return Ok((l, T::zero())),
        Err(_) => {}
    }
    let scale = a.mean_diag().abs().max(T::of(1e-300));
    let mut rel = start_rel;
    let mut last_pivot = 0;
    while rel <= max_rel * (T::one() + T::of(1e-12)) {
        let jitter = rel * scale;
        let mut aj = a.clone();
        for i in 0..aj.rows() {
            aj[(i, i)] = aj[(i, i)] + jitter;
        }
        match cholesky(&aj) {
            Ok(l) => return Ok((l, jitter)),
            Err(p) => last_pivot = p,
        }
        rel = rel * T::of(10.0);
    }
    Err(last_pivot)
}
