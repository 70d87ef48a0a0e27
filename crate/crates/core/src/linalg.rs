//! Dense linear-algebra kernels used by the section solvers.
//!
//! Factorizations are delegated to `nalgebra`; this module fixes the
//! contracts the solvers rely on (rank checks, minimum-norm form, sorted
//! singular values) and keeps every matrix finite and non-empty.

use std::fmt;

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};

/// Default relative threshold `sigma_min / sigma_max` below which a matrix
/// is treated as rank deficient.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// A finite, non-empty dense real matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(rows.len(), cols, &flat)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_matrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::DimensionMismatch("matrix must have at least one row and column".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_matrix(DMatrix::identity(n, n))
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(&self.0 * c)
    }

    pub fn mul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.cols() != x.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows(),
                self.cols(),
                x.len()
            )));
        }
        Ok((&self.0 * DVector::from_column_slice(x)).as_slice().to_vec())
    }

    /// Rows `rows` and columns `cols` selected by index.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.0[(rows[i], cols[j])])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Spectral norm (largest singular value).
    pub fn spectral_norm(&self) -> f64 {
        singular_values(self)[0]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix {}x{} {:?}", self.rows(), self.cols(), self.row_major())
    }
}

/// Singular values (nonincreasing) and optionally the thin factors
/// `A = U diag(s) V^T`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub u: Option<DenseMatrix>,
    pub v_t: Option<DenseMatrix>,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.last().expect("svd of non-empty matrix")
    }

    /// `U diag(s) V^T`, when factors were requested.
    pub fn reconstruct(&self) -> Option<DenseMatrix> {
        let (u, v_t) = (self.u.as_ref()?, self.v_t.as_ref()?);
        let s = DMatrix::from_diagonal(&DVector::from_column_slice(&self.singular_values));
        Some(DenseMatrix(u.as_matrix() * s * v_t.as_matrix()))
    }
}

pub fn svd(a: &DenseMatrix, with_factors: bool) -> Svd {
    let dec = SVD::new(a.0.clone(), with_factors, with_factors);
    let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
    order.sort_by(|&x, &y| dec.singular_values[y].total_cmp(&dec.singular_values[x]));
    let singular_values = order.iter().map(|&k| dec.singular_values[k].max(0.0)).collect();
    let u = dec.u.map(|u| {
        DenseMatrix(DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]))
    });
    let v_t = dec.v_t.map(|v| {
        DenseMatrix(DMatrix::from_fn(order.len(), v.ncols(), |i, j| v[(order[i], j)]))
    });
    Svd { singular_values, u, v_t }
}

pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    svd(a, false).singular_values
}

fn check_rank(a: &DenseMatrix, rank_tol: f64) -> Result<()> {
    let s = singular_values(a);
    let (sigma_max, sigma_min) = (s[0], *s.last().unwrap());
    if sigma_max == 0.0 || sigma_min < rank_tol * sigma_max {
        return Err(Error::RankDeficient { sigma_min, sigma_max });
    }
    Ok(())
}

/// Least-squares minimizer of `|A w - b|` for a tall matrix of full column
/// rank, computed from a Householder QR factorization of `A`.
pub fn least_squares(a: &DenseMatrix, b: &[f64], rank_tol: f64) -> Result<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::DimensionMismatch(format!("least squares needs rows >= cols, got {m}x{n}")));
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!("rhs length {} != rows {m}", b.len())));
    }
    check_rank(a, rank_tol)?;
    let qr = a.0.clone().qr();
    let qtb = qr.q().transpose() * DVector::from_column_slice(b);
    let w = qr
        .r()
        .solve_upper_triangular(&qtb)
        .ok_or(Error::RankDeficient { sigma_min: 0.0, sigma_max: a.spectral_norm() })?;
    Ok(w.as_slice().to_vec())
}

/// Minimum-norm solution `u = A^T z` of `A u = b` with `(A A^T) z = b`, for a
/// wide matrix of full row rank.
///
/// `A A^T` is never formed: with `A^T = Q R` the Gram system becomes
/// `R^T R z = b`, so `u = Q R^{-T} b`.
pub fn min_norm_solve(a: &DenseMatrix, b: &[f64], rank_tol: f64) -> Result<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    if m > n {
        return Err(Error::DimensionMismatch(format!("min-norm solve needs rows <= cols, got {m}x{n}")));
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!("rhs length {} != rows {m}", b.len())));
    }
    check_rank(a, rank_tol)?;
    let qr = a.0.transpose().qr();
    let w = qr
        .r()
        .transpose()
        .solve_lower_triangular(&DVector::from_column_slice(b))
        .ok_or(Error::RankDeficient { sigma_min: 0.0, sigma_max: a.spectral_norm() })?;
    Ok((qr.q() * w).as_slice().to_vec())
}

/// Orthonormal basis of the null space of `A`, one vector per entry.
pub fn nullspace_basis(a: &DenseMatrix, rank_tol: f64) -> Vec<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    // Pad to at least n rows so the SVD returns a full n x n right factor.
    let rows = m.max(n);
    let padded = DMatrix::from_fn(rows, n, |i, j| if i < m { a.0[(i, j)] } else { 0.0 });
    let dec = svd(&DenseMatrix(padded), true);
    let v_t = dec.v_t.expect("factors requested");
    let cutoff = rank_tol * dec.singular_values[0].max(f64::MIN_POSITIVE);
    dec.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(k, _)| v_t.row(k))
        .collect()
}

/// Determinant of a square matrix: closed forms up to 3x3, LU above.
pub fn determinant(a: &DenseMatrix) -> Result<f64> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch(format!("determinant of {}x{} matrix", a.rows(), a.cols())));
    }
    let m = &a.0;
    Ok(match a.rows() {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => m.clone().lu().determinant(),
    })
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `|x - y|` after zero-padding the shorter vector.
pub fn padded_distance(x: &[f64], y: &[f64]) -> f64 {
    let len = x.len().max(y.len());
    (0..len)
        .map(|k| {
            let d = x.get(k).copied().unwrap_or(0.0) - y.get(k).copied().unwrap_or(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}
