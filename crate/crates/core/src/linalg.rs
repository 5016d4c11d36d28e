//! Small dense square matrices: just enough for covariance work on a
//! handful of spectral bands.

use std::fmt;
use std::ops::{Index, IndexMut};

/// Row-major `n x n` matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds from row-major data; `None` unless `data.len() == n * n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == n * n).then_some(Matrix { n, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Matrix {
            n,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// True when every `|a_ij - a_ji| <= rel_tol * max(1, max|a|)`.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let scale = self.data.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        (0..self.n).all(|i| {
            (i + 1..self.n).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= rel_tol * scale)
        })
    }

    pub fn add_to_diagonal(&mut self, v: f64) {
        for i in 0..self.n {
            self[(i, i)] += v;
        }
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "matrix dimensions differ");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `vᵀ A v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.n);
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let mut dot = 0.0;
            for j in 0..n {
                dot += row[j] * v[j];
            }
            acc += v[i] * dot;
        }
        acc
    }

    /// Largest absolute entry of `self - I`.
    pub fn max_abs_deviation_from_identity(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// Lower-triangular `L` with `L Lᵀ = self`, or `None` when the matrix is
    /// not numerically positive definite.
    pub fn cholesky(&self) -> Option<Matrix> {
        let n = self.n;
        let mut l = Matrix::zeros(n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let ljj = d.sqrt();
            l[(j, j)] = ljj;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Some(l)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = self.clone();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)] * a[(i, j)])
                .sum();
            let scale: f64 = a.data.iter().map(|v| v * v).sum();
            if off <= f64::EPSILON * f64::EPSILON * scale || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        eig.sort_by(f64::total_cmp);
        eig
    }
}

/// Inverse and log-determinant from a Cholesky factor `L` of `A`.
pub(crate) fn cholesky_inverse_and_log_det(l: &Matrix) -> (Matrix, f64) {
    let n = l.dim();
    let log_det = 2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>();

    // L⁻¹ by forward substitution, column by column.
    let mut linv = Matrix::zeros(n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                s -= l[(i, k)] * linv[(k, col)];
            }
            linv[(i, col)] = s / l[(i, i)];
        }
    }
    // A⁻¹ = L⁻ᵀ L⁻¹, symmetric by construction.
    let mut inv = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (i..n).map(|k| linv[(k, i)] * linv[(k, j)]).sum();
            inv[(i, j)] = s;
            inv[(j, i)] = s;
        }
    }
    (inv, log_det)
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.n).map(|i| self.row(i)))
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_of_known_matrix() {
        let a = Matrix::from_rows(&[&[4.0, 2.0], &[2.0, 3.0]]).unwrap();
        let l = a.cholesky().unwrap();
        assert_eq!(l[(0, 0)], 2.0);
        assert_eq!(l[(1, 0)], 1.0);
        assert!((l[(1, 1)] - 2.0_f64.sqrt()).abs() < 1e-15);
        let (inv, log_det) = cholesky_inverse_and_log_det(&l);
        assert!((log_det - 8.0_f64.ln()).abs() < 1e-14);
        assert!(a.mul(&inv).max_abs_deviation_from_identity() < 1e-15);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(a.cholesky().is_none());
        assert!(Matrix::zeros(3).cholesky().is_none());
    }

    #[test]
    fn jacobi_eigenvalues() {
        let a = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let e = a.symmetric_eigenvalues();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
        let d = Matrix::diagonal(&[5.0, -1.0, 0.0]);
        assert_eq!(d.symmetric_eigenvalues(), vec![-1.0, 0.0, 5.0]);
    }

    #[test]
    fn quadratic_form_and_symmetry() {
        let a = Matrix::diagonal(&[0.25, 1.0]);
        assert_eq!(a.quadratic_form(&[2.0, 0.0]), 1.0);
        assert!(a.is_symmetric(1e-12));
        let b = Matrix::from_rows(&[&[1.0, 0.5], &[0.4, 1.0]]).unwrap();
        assert!(!b.is_symmetric(1e-9));
        assert_eq!(Matrix::identity(3).trace(), 3.0);
    }
}
