//! Rectangular finite-section solvers for `C x = y` and the convergence
//! sweeps built on them.
//!
//! * Overdetermined: for `m >= n`, minimize `|C^{(m,n)} u - y^{(m)}|`.
//! * Underdetermined: for `n >= m`, the minimum-norm `u` with
//!   `C_{(m,n)} u = y_{(m)}`.
//!
//! Vectors of different lengths are compared after zero-padding, which is
//! the embedding of `R^n` into `l_2`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{coefficients, QuadratureRule};
use crate::error::{Error, Result};
use crate::linalg::{self, padded_distance, DEFAULT_RANK_TOL};
use crate::matrix_rep::{InfiniteMatrixRep, PointFn, Rhs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Overdetermined,
    Underdetermined,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Overdetermined => "over",
            Method::Underdetermined => "under",
        }
    }

    /// Whether `(m, n)` has the ordering this method needs.
    pub fn admits(self, m: usize, n: usize) -> bool {
        m >= 1
            && n >= 1
            && match self {
                Method::Overdetermined => m >= n,
                Method::Underdetermined => n >= m,
            }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "over" | "overdetermined" => Ok(Method::Overdetermined),
            "under" | "underdetermined" => Ok(Method::Underdetermined),
            other => Err(Error::InvalidInput(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectionSolution {
    pub coeffs: Vec<f64>,
    pub m: usize,
    pub n: usize,
    /// `|C u - y^{(m)}|` over the `m` rows used.
    pub residual_norm: f64,
    pub solution_norm: f64,
    /// Smallest singular value of the section.
    pub sigma_min: f64,
    pub method: Method,
}

/// One row of a convergence sweep. Metrics are NaN when the row failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub m: usize,
    pub n: usize,
    pub error_to_reference: f64,
    pub residual_norm: f64,
    pub solution_norm: f64,
    pub sigma_min: f64,
    pub failure: Option<String>,
}

impl ConvergenceRecord {
    pub fn failed(m: usize, n: usize, why: String) -> Self {
        Self {
            m,
            n,
            error_to_reference: f64::NAN,
            residual_norm: f64::NAN,
            solution_norm: f64::NAN,
            sigma_min: f64::NAN,
            failure: Some(why),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Ordered list of `(m, n)` section sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule(Vec<(usize, usize)>);

impl Schedule {
    pub fn new(method: Method, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidInput("schedule is empty".into()));
        }
        if let Some(&(m, n)) = pairs.iter().find(|&&(m, n)| !method.admits(m, n)) {
            return Err(Error::InvalidInput(format!("section {m}x{n} is not valid for the {method} method")));
        }
        Ok(Self(pairs))
    }

    /// Sizes `k = start, 2 start, 4 start, ... <= end`; the free dimension is
    /// `ratio * k` (rows for `over`, columns for `under`).
    pub fn doubling(method: Method, ratio: usize, start: usize, end: usize) -> Result<Self> {
        if start == 0 || ratio == 0 || end < start {
            return Err(Error::InvalidInput(format!("bad doubling schedule ratio {ratio}, {start}..{end}")));
        }
        let mut pairs = Vec::new();
        let mut k = start;
        while k <= end {
            pairs.push(match method {
                Method::Overdetermined => (ratio * k, k),
                Method::Underdetermined => (k, ratio * k),
            });
            k *= 2;
        }
        Self::new(method, pairs)
    }

    /// Ratio 2 over `4, 8, 16, 32, 64`.
    pub fn default_for(method: Method) -> Self {
        Self::doubling(method, 2, 4, 64).expect("valid default")
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn max_m(&self) -> usize {
        self.0.iter().map(|p| p.0).max().unwrap_or(0)
    }

    pub fn max_n(&self) -> usize {
        self.0.iter().map(|p| p.1).max().unwrap_or(0)
    }
}

/// Finite-section solver over one representation.
#[derive(Debug, Clone, Copy)]
pub struct Solver<'a> {
    rep: &'a InfiniteMatrixRep,
    rank_tol: f64,
}

impl<'a> Solver<'a> {
    pub fn new(rep: &'a InfiniteMatrixRep) -> Self {
        Self { rep, rank_tol: DEFAULT_RANK_TOL }
    }

    pub fn with_rank_tol(mut self, rank_tol: f64) -> Self {
        self.rank_tol = rank_tol;
        self
    }

    pub fn rep(&self) -> &'a InfiniteMatrixRep {
        self.rep
    }

    pub fn solve(&self, method: Method, rhs: &Rhs, m: usize, n: usize) -> Result<SectionSolution> {
        if !method.admits(m, n) {
            return Err(Error::InvalidInput(format!("section {m}x{n} is not valid for the {method} method")));
        }
        let c = self.rep.section(m, n)?;
        let y = self.rep.rhs_coefficients(rhs, m)?;
        let coeffs = match method {
            Method::Overdetermined => linalg::least_squares(&c, &y, self.rank_tol)?,
            Method::Underdetermined => linalg::min_norm_solve(&c, &y, self.rank_tol)?,
        };
        let cu = c.mul_vec(&coeffs)?;
        let residual_norm = cu.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let sigma_min = *linalg::singular_values(&c).last().expect("non-empty section");
        Ok(SectionSolution { solution_norm: linalg::norm(&coeffs), coeffs, m, n, residual_norm, sigma_min, method })
    }

    pub fn solve_overdetermined(&self, rhs: &Rhs, m: usize, n: usize) -> Result<SectionSolution> {
        self.solve(Method::Overdetermined, rhs, m, n)
    }

    pub fn solve_underdetermined(&self, rhs: &Rhs, m: usize, n: usize) -> Result<SectionSolution> {
        self.solve(Method::Underdetermined, rhs, m, n)
    }

    /// Solves every scheduled section and measures the distance to
    /// `reference`. Rows are solved in parallel and reported in schedule
    /// order; a failing row is recorded, not propagated.
    pub fn converge(
        &self,
        method: Method,
        rhs: &Rhs,
        schedule: &Schedule,
        reference: &[f64],
    ) -> Result<Vec<ConvergenceRecord>> {
        if let Some(&(m, n)) = schedule.pairs().iter().find(|&&(m, n)| !method.admits(m, n)) {
            return Err(Error::InvalidInput(format!("section {m}x{n} is not valid for the {method} method")));
        }
        if reference.len() < 2 * schedule.max_n() {
            return Err(Error::InvalidInput(format!(
                "reference has {} coefficients, at least {} needed",
                reference.len(),
                2 * schedule.max_n()
            )));
        }
        Ok(schedule
            .pairs()
            .par_iter()
            .map(|&(m, n)| match self.solve(method, rhs, m, n) {
                Ok(sol) => ConvergenceRecord {
                    m,
                    n,
                    error_to_reference: padded_distance(&sol.coeffs, reference),
                    residual_norm: sol.residual_norm,
                    solution_norm: sol.solution_norm,
                    sigma_min: sol.sigma_min,
                    failure: None,
                },
                Err(e) => ConvergenceRecord::failed(m, n, e.to_string()),
            })
            .collect())
    }

    pub fn converge_over(&self, rhs: &Rhs, schedule: &Schedule, reference: &[f64]) -> Result<Vec<ConvergenceRecord>> {
        self.converge(Method::Overdetermined, rhs, schedule, reference)
    }

    pub fn converge_under(&self, rhs: &Rhs, schedule: &Schedule, reference: &[f64]) -> Result<Vec<ConvergenceRecord>> {
        self.converge(Method::Underdetermined, rhs, schedule, reference)
    }

    /// Stand-in for the exact solution when none is known: the ratio-2
    /// underdetermined solve with `n = REFERENCE_COLS`.
    pub fn reference_solution(&self, rhs: &Rhs) -> Result<Vec<f64>> {
        Ok(self.solve_underdetermined(rhs, REFERENCE_COLS / 2, REFERENCE_COLS)?.coeffs)
    }
}

pub const REFERENCE_COLS: usize = 256;

pub fn solve_overdetermined(rep: &InfiniteMatrixRep, rhs: &Rhs, m: usize, n: usize) -> Result<SectionSolution> {
    Solver::new(rep).solve_overdetermined(rhs, m, n)
}

pub fn solve_underdetermined(rep: &InfiniteMatrixRep, rhs: &Rhs, m: usize, n: usize) -> Result<SectionSolution> {
    Solver::new(rep).solve_underdetermined(rhs, m, n)
}

pub fn converge_over(
    rep: &InfiniteMatrixRep,
    rhs: &Rhs,
    schedule: &Schedule,
    reference: &[f64],
) -> Result<Vec<ConvergenceRecord>> {
    Solver::new(rep).converge_over(rhs, schedule, reference)
}

pub fn converge_under(
    rep: &InfiniteMatrixRep,
    rhs: &Rhs,
    schedule: &Schedule,
    reference: &[f64],
) -> Result<Vec<ConvergenceRecord>> {
    Solver::new(rep).converge_under(rhs, schedule, reference)
}

/// Known solution `x` of a manufactured problem.
#[derive(Clone)]
pub enum TrueSolution {
    /// Finitely supported coefficient vector in the input basis.
    Coefficients(Vec<f64>),
    /// `x(s)` as a function on `[0, 1]`.
    Function(PointFn),
}

impl TrueSolution {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        TrueSolution::Function(Arc::new(f))
    }
}

impl fmt::Debug for TrueSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrueSolution::Coefficients(c) => f.debug_tuple("Coefficients").field(c).finish(),
            TrueSolution::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// A problem built from a chosen `x`: `rhs` holds the leading coefficients of
/// `y = T x`, `reference` those of `x`.
#[derive(Debug, Clone)]
pub struct Manufactured {
    pub rhs: Rhs,
    pub reference: Vec<f64>,
}

/// Forward-applies the operator to `truth`.
///
/// For a composition operator `y(t) = x(τ⁻¹(t))` is formed pointwise and
/// projected onto the output basis; explicit matrices need a coefficient
/// `truth` and use `y_i = Σ_j c_ij x_j`.
pub fn manufacture(
    rep: &InfiniteMatrixRep,
    truth: &TrueSolution,
    rhs_len: usize,
    resolution: usize,
) -> Result<Manufactured> {
    if rhs_len == 0 || resolution == 0 {
        return Err(Error::InvalidInput("manufactured problem needs positive sizes".into()));
    }
    match (rep.operator(), truth) {
        (Some(op), _) => {
            let rule = rep.rule().expect("composition source carries a rule");
            let basis_in = op.basis_in();
            let x: PointFn = match truth {
                TrueSolution::Function(f) => f.clone(),
                TrueSolution::Coefficients(c) => {
                    let c = c.clone();
                    Arc::new(move |s| c.iter().enumerate().map(|(k, v)| v * basis_in.eval_unchecked(k + 1, s)).sum())
                }
            };
            let y = forward_coefficients(rep, &x, rhs_len, rule)?;
            let reference = match truth {
                TrueSolution::Coefficients(c) => padded(c, resolution),
                TrueSolution::Function(f) => coefficients(|s| f(s), basis_in, resolution, rule)?,
            };
            Ok(Manufactured { rhs: Rhs::Coefficients(y), reference })
        }
        (None, TrueSolution::Coefficients(c)) => {
            let y = (1..=rhs_len)
                .map(|i| c.iter().enumerate().map(|(j, v)| Ok(rep.entry(i, j + 1)? * v)).sum::<Result<f64>>())
                .collect::<Result<Vec<_>>>()?;
            Ok(Manufactured { rhs: Rhs::Coefficients(y), reference: padded(c, resolution) })
        }
        (None, TrueSolution::Function(_)) => Err(Error::InvalidInput(format!(
            "function true solution needs a composition operator, `{}` is an explicit matrix",
            rep.name()
        ))),
    }
}

fn forward_coefficients(rep: &InfiniteMatrixRep, x: &PointFn, count: usize, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let op = rep.operator().expect("composition source");
    let samples = rule.nodes().iter().map(|&t| op.apply(|s| x(s), t)).collect::<Result<Vec<_>>>()?;
    if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { at: rule.nodes()[pos] });
    }
    (1..=count).map(|k| Ok(rule.dot_sampled(&samples, &op.basis_out().sample(k, rule.nodes())?))).collect()
}

fn padded(c: &[f64], len: usize) -> Vec<f64> {
    let mut v = c.to_vec();
    if v.len() < len {
        v.resize(len, 0.0);
    }
    v
}
