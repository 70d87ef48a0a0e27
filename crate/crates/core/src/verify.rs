//! Built-in verification suites. Every check is reported as
//! `value <= limit`, so a suite passes when all of its rows do.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::Basis;
use crate::comp_op::Catalog;
use crate::det_theorem::{random_matrix, run_trials};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm, DenseMatrix, DEFAULT_RANK_TOL};
use crate::matrix_rep::represent;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub suite: Suite,
    pub case: String,
    pub value: f64,
    pub limit: f64,
}

impl CheckRow {
    pub fn new(suite: Suite, case: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { suite, case: case.into(), value, limit }
    }

    pub fn pass(&self) -> bool {
        self.value <= self.limit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    DetTheorem,
    Pythagoras,
    NormBounds,
    Schur,
    ColumnTails,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::DetTheorem, Suite::Pythagoras, Suite::NormBounds, Suite::Schur, Suite::ColumnTails];

    pub fn name(self) -> &'static str {
        match self {
            Suite::DetTheorem => "det-theorem",
            Suite::Pythagoras => "pythagoras",
            Suite::NormBounds => "norm-bounds",
            Suite::Schur => "schur",
            Suite::ColumnTails => "column-tails",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown verification suite `{s}`")))
    }
}

/// Runs one suite. `trials` and `seed` drive the randomized suites.
pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<Vec<CheckRow>> {
    match suite {
        Suite::DetTheorem => det_theorem(trials, seed),
        Suite::Pythagoras => pythagoras(trials, seed),
        Suite::NormBounds => norm_bounds(64),
        Suite::Schur => schur(32),
        Suite::ColumnTails => column_tails(8, 256),
    }
}

pub fn det_theorem(trials: usize, seed: u64) -> Result<Vec<CheckRow>> {
    let s = Suite::DetTheorem;
    let mut rows = Vec::with_capacity(3 * trials);
    for t in run_trials(trials, seed)? {
        let r = t.inequality;
        let tol = r.tolerance();
        rows.push(CheckRow::new(s, format!("{} lhs<=mid", t.index), r.lhs - r.mid, tol));
        rows.push(CheckRow::new(s, format!("{} mid<=rhs", t.index), r.mid - r.rhs, tol));
        rows.push(CheckRow::new(s, format!("{} minor-sum", t.index), t.identity.relative_gap(), 1e-9));
    }
    Ok(rows)
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn random_vec(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// Least-squares Pythagoras on tall instances up to 32x16 and the
/// minimum-norm Pythagoras on wide ones up to 16x32, `trials` each.
pub fn pythagoras(trials: usize, seed: u64) -> Result<Vec<CheckRow>> {
    let s = Suite::Pythagoras;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(2 * trials);
    for t in 0..trials {
        let n = rng.gen_range(1..=16);
        let m = rng.gen_range(n..=32);
        let a = random_matrix(&mut rng, m, n);
        let b = random_vec(&mut rng, m);
        let w0 = linalg::least_squares(&a, &b, DEFAULT_RANK_TOL)?;
        let w = random_vec(&mut rng, n);
        let lhs = norm(&sub(&a.mul_vec(&w)?, &b)).powi(2);
        let rhs = norm(&a.mul_vec(&sub(&w, &w0))?).powi(2) + norm(&sub(&a.mul_vec(&w0)?, &b)).powi(2);
        rows.push(CheckRow::new(s, format!("{t} least-squares {m}x{n}"), relative_gap(lhs, rhs), 1e-9));
    }
    for t in 0..trials {
        let m = rng.gen_range(1..=16);
        let n = rng.gen_range(m..=32);
        let a = random_matrix(&mut rng, m, n);
        let b = random_vec(&mut rng, m);
        let u0 = linalg::min_norm_solve(&a, &b, DEFAULT_RANK_TOL)?;
        let u = perturb_in_nullspace(&mut rng, &a, &u0);
        let lhs = norm(&sub(&u, &u0)).powi(2);
        let rhs = norm(&u).powi(2) - norm(&u0).powi(2);
        let scale = norm(&u).powi(2).max(f64::MIN_POSITIVE);
        rows.push(CheckRow::new(s, format!("{t} min-norm {m}x{n}"), (lhs - rhs).abs() / scale, 1e-9));
    }
    Ok(rows)
}

/// `u0` plus a random combination of a null-space basis of `a`.
pub fn perturb_in_nullspace(rng: &mut impl Rng, a: &DenseMatrix, u0: &[f64]) -> Vec<f64> {
    let mut u = u0.to_vec();
    for v in linalg::nullspace_basis(a, 1e-10) {
        let c: f64 = rng.gen_range(-2.0..=2.0);
        for (x, y) in u.iter_mut().zip(&v) {
            *x += c * y;
        }
    }
    u
}

/// `sigma_max(C^{(m,n)}) <= sqrt(beta) + 1e-6` for every catalog map and
/// every `m, n <= max_size`.
pub fn norm_bounds(max_size: usize) -> Result<Vec<CheckRow>> {
    let s = Suite::NormBounds;
    let mut rows = Vec::new();
    for entry in Catalog::all() {
        let rep = represent(entry.build()?, Basis::Fourier)?;
        let bound = rep.operator().expect("composition").norm_bounds().upper;
        let full = rep.section(max_size, max_size)?;
        let mut worst: f64 = 0.0;
        for m in 1..=max_size {
            for n in 1..=max_size {
                let idx: (Vec<usize>, Vec<usize>) = ((0..m).collect(), (0..n).collect());
                let block = full.select(&idx.0, &idx.1)?;
                worst = worst.max(linalg::singular_values(&block)[0]);
            }
        }
        rows.push(CheckRow::new(s, format!("{} max sigma_max over m,n<={max_size}", rep.name()), worst, bound + 1e-6));
    }
    Ok(rows)
}

/// Truncated Schur bound against the section's largest singular value.
pub fn schur(truncation: usize) -> Result<Vec<CheckRow>> {
    let s = Suite::Schur;
    let mut rows = Vec::new();
    for entry in Catalog::all() {
        let rep = represent(entry.build()?, Basis::Fourier)?;
        let report = rep.schur_test(truncation)?;
        let sigma_max = linalg::singular_values(&rep.section(truncation, truncation)?)[0];
        rows.push(CheckRow::new(s, format!("{} sigma_max<=schur N={truncation}", rep.name()), sigma_max, report.bound + 1e-8));
    }
    Ok(rows)
}

/// Column tails `sqrt(sum_{i=m..to_row} c_ij^2)` must not increase with `m`
/// and must end below `1e-4`, for columns `j <= columns`.
pub fn column_tails(columns: usize, to_row: usize) -> Result<Vec<CheckRow>> {
    let s = Suite::ColumnTails;
    let mut rows = Vec::new();
    for entry in Catalog::all() {
        let rep = represent(entry.build()?, Basis::Fourier)?;
        for j in 1..=columns {
            let tails = rep.column_tails(j, to_row)?;
            let max_increase = tails.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            rows.push(CheckRow::new(s, format!("{} j={j} monotone", rep.name()), max_increase, 0.0));
            rows.push(CheckRow::new(s, format!("{} j={j} final", rep.name()), tails[to_row - 1], 1e-4));
        }
    }
    Ok(rows)
}

/// Largest `|(v, u)|` over an orthonormal null-space basis of `a`.
pub fn max_nullspace_inner_product(a: &DenseMatrix, u: &[f64]) -> f64 {
    linalg::nullspace_basis(a, 1e-10).iter().map(|v| dot(v, u).abs()).fold(0.0, f64::max)
}
