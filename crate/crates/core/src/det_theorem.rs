//! Gram-determinant inequality `det(AᵀBᵀBA) <= d_1²···d_n² det(AᵀA) <=
//! |B|_2^{2n} det(AᵀA)` and the minor-sum identity behind it,
//! `det(CᵀC) = Σ (n x n minors of C)²`.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{determinant, svd, DenseMatrix};

/// Largest number of row subsets [`sum_squared_minors`] will enumerate.
pub const MINOR_LIMIT: u128 = 1_000_000;

/// Default seed for randomized trials.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetCheckResult {
    /// `det(AᵀBᵀBA)`
    pub lhs: f64,
    /// `d_1²···d_n² det(AᵀA)` with the `n` largest singular values of `B`
    pub mid: f64,
    /// `|B|_2^{2n} det(AᵀA)`
    pub rhs: f64,
    /// `Σ minors(VᵀA)²`, equal to `det(AᵀA)`
    pub minor_sum: f64,
    /// `Σ minors(D VᵀA)²`, equal to `lhs`
    pub scaled_minor_sum: f64,
}

impl DetCheckResult {
    pub fn tolerance(&self) -> f64 {
        1e-9 * self.rhs.abs().max(1.0)
    }

    /// `lhs <= mid + tol` and `mid <= rhs + tol`.
    pub fn holds(&self) -> bool {
        let tol = self.tolerance();
        self.lhs <= self.mid + tol && self.mid <= self.rhs + tol
    }
}

fn gram(a: &DenseMatrix) -> Result<DenseMatrix> {
    a.transpose().mul(a)
}

pub fn binomial(m: usize, n: usize) -> u128 {
    if n > m {
        return 0;
    }
    let k = n.min(m - n) as u128;
    (0..k).fold(1u128, |acc, i| acc * (m as u128 - i) / (i + 1))
}

/// Sum of squared `n x n` minors over all `n`-row subsets of an `m x n`
/// matrix.
pub fn sum_squared_minors(c: &DenseMatrix) -> Result<f64> {
    let (m, n) = (c.rows(), c.cols());
    if m < n {
        return Err(Error::DimensionMismatch(format!("minor sum needs rows >= cols, got {m}x{n}")));
    }
    let count = binomial(m, n);
    if count > MINOR_LIMIT {
        return Err(Error::TooManyMinors { count, limit: MINOR_LIMIT });
    }
    let cols: Vec<usize> = (0..n).collect();
    let mut sum = 0.0;
    for rows in (0..m).combinations(n) {
        sum += determinant(&c.select(&rows, &cols)?)?.powi(2);
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinorSumIdentity {
    pub det_gram: f64,
    pub minor_sum: f64,
}

impl MinorSumIdentity {
    pub fn relative_gap(&self) -> f64 {
        (self.det_gram - self.minor_sum).abs() / self.det_gram.abs().max(self.minor_sum.abs()).max(f64::MIN_POSITIVE)
    }
}

pub fn minor_sum_identity(c: &DenseMatrix) -> Result<MinorSumIdentity> {
    let minor_sum = sum_squared_minors(c)?;
    Ok(MinorSumIdentity { det_gram: determinant(&gram(c)?)?, minor_sum })
}

/// Evaluates every quantity of the inequality chain for `A` (`m x n`) and
/// square `B` (`m x m`).
pub fn check_det_inequality(a: &DenseMatrix, b: &DenseMatrix) -> Result<DetCheckResult> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::DimensionMismatch(format!("A must have rows >= cols, got {m}x{n}")));
    }
    if b.rows() != m || b.cols() != m {
        return Err(Error::DimensionMismatch(format!("B must be {m}x{m}, got {}x{}", b.rows(), b.cols())));
    }
    let det_ata = determinant(&gram(a)?)?;
    let lhs = determinant(&gram(&b.mul(a)?)?)?;

    let dec = svd(b, true);
    let d = &dec.singular_values;
    let mid = d[..n].iter().map(|x| x * x).product::<f64>() * det_ata;
    let rhs = d[0].powi(2 * n as i32) * det_ata;

    // B = U D Vᵀ gives det(AᵀBᵀBA) = det((D Vᵀ A)ᵀ (D Vᵀ A)).
    let c = dec.v_t.as_ref().expect("factors requested").mul(a)?;
    let dc = DenseMatrix::from_fn(m, n, |i, j| d[i] * c.get(i, j))?;
    Ok(DetCheckResult {
        lhs,
        mid,
        rhs,
        minor_sum: sum_squared_minors(&c)?,
        scaled_minor_sum: sum_squared_minors(&dc)?,
    })
}

/// Matrix with entries uniform on `[-1, 1]`.
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..=1.0)).expect("finite entries")
}

/// One randomized trial of each check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetTrial {
    pub index: usize,
    pub inequality: DetCheckResult,
    pub identity: MinorSumIdentity,
}

impl DetTrial {
    pub fn identity_holds(&self) -> bool {
        self.identity.relative_gap() <= 1e-9
    }
}

/// `trials` random draws of `A: 5x3`, `B: 5x5` for the inequality and
/// `C: 6x3` for the identity, from a ChaCha8 stream seeded with `seed`.
pub fn run_trials(trials: usize, seed: u64) -> Result<Vec<DetTrial>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|index| {
            let a = random_matrix(&mut rng, 5, 3);
            let b = random_matrix(&mut rng, 5, 5);
            let c = random_matrix(&mut rng, 6, 3);
            Ok(DetTrial { index, inequality: check_det_inequality(&a, &b)?, identity: minor_sum_identity(&c)? })
        })
        .collect()
}
