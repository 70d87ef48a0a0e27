//! Infinite matrix representations `c_ij = (T φ_j, ψ_i)` as lazily
//! evaluated, cached entry oracles.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;
use rayon::prelude::*;

use crate::basis::{coefficients, Basis, QuadratureRule};
use crate::comp_op::{CompositionOperator, Diffeomorphism};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub type EntryFn = Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>;
pub type SequenceFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
pub type PointFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Right-hand side of `C x = y`, given by its coefficients or as a function
/// in the output space.
#[derive(Clone)]
pub enum Rhs {
    /// Finitely many leading coefficients `y_1, y_2, ...`.
    Coefficients(Vec<f64>),
    /// The coefficient sequence `k ↦ y_k`, `k >= 1`.
    Sequence(SequenceFn),
    /// `y(t)`, projected onto the output basis by quadrature.
    Function(PointFn),
}

impl Rhs {
    pub fn unit(k: usize) -> Self {
        Rhs::Sequence(Arc::new(move |i| if i == k { 1.0 } else { 0.0 }))
    }

    pub fn sequence(f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Rhs::Sequence(Arc::new(f))
    }

    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Rhs::Function(Arc::new(f))
    }
}

impl fmt::Debug for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Coefficients(c) => f.debug_tuple("Coefficients").field(c).finish(),
            Rhs::Sequence(_) => f.write_str("Sequence(..)"),
            Rhs::Function(_) => f.write_str("Function(..)"),
        }
    }
}

struct Quadrature {
    op: CompositionOperator,
    rule: QuadratureRule,
    // τ⁻¹ at the quadrature nodes
    preimages: Vec<f64>,
    // w_q ψ_i(t_q), keyed by i
    out_samples: RwLock<HashMap<usize, Arc<[f64]>>>,
    // φ_j(τ⁻¹(t_q)), keyed by j
    in_samples: RwLock<HashMap<usize, Arc<[f64]>>>,
}

impl Quadrature {
    fn cached(map: &RwLock<HashMap<usize, Arc<[f64]>>>, k: usize, make: impl FnOnce() -> Vec<f64>) -> Arc<[f64]> {
        if let Some(v) = map.read().get(&k) {
            return v.clone();
        }
        let v: Arc<[f64]> = make().into();
        map.write().entry(k).or_insert(v).clone()
    }

    fn out_weighted(&self, i: usize) -> Arc<[f64]> {
        let basis = self.op.basis_out();
        Self::cached(&self.out_samples, i, || {
            self.rule
                .nodes()
                .iter()
                .zip(self.rule.weights())
                .map(|(&t, &w)| w * basis.eval_unchecked(i, t))
                .collect()
        })
    }

    fn composed(&self, j: usize) -> Arc<[f64]> {
        let basis = self.op.basis_in();
        Self::cached(&self.in_samples, j, || self.preimages.iter().map(|&s| basis.eval_unchecked(j, s)).collect())
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.out_weighted(i), self.composed(j));
        a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
    }
}

enum Source {
    Composition(Box<Quadrature>),
    Explicit { name: String, entry: EntryFn },
}

/// Lazily evaluated infinite matrix with a monotonically growing cache.
pub struct InfiniteMatrixRep {
    source: Source,
    cache: RwLock<HashMap<(usize, usize), f64>>,
}

impl fmt::Debug for InfiniteMatrixRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InfiniteMatrixRep({}, {} cached)", self.name(), self.cached_entries())
    }
}

impl InfiniteMatrixRep {
    /// Representation of a composition operator with entries by quadrature.
    pub fn from_operator(op: CompositionOperator, rule: QuadratureRule) -> Result<Self> {
        let preimages = rule.nodes().iter().map(|&t| op.tau().invert(t)).collect::<Result<Vec<_>>>()?;
        Ok(Self::with_source(Source::Composition(Box::new(Quadrature {
            op,
            rule,
            preimages,
            out_samples: RwLock::default(),
            in_samples: RwLock::default(),
        }))))
    }

    /// Explicit infinite matrix given by an entry formula, 1-based indices.
    pub fn explicit(name: impl Into<String>, entry: impl Fn(usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        Self::with_source(Source::Explicit { name: name.into(), entry: Arc::new(entry) })
    }

    pub fn identity() -> Self {
        Self::explicit("matrix-identity", |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(name: impl Into<String>, diag: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Self::explicit(name, move |i, j| if i == j { diag(i) } else { 0.0 })
    }

    /// `c_kk = diag`, `c_{k+1,k} = sub`: a banded lower-bidiagonal fixture.
    pub fn shift_diagonal(diag: f64, sub: f64) -> Self {
        Self::explicit("matrix-shift", move |i, j| {
            if i == j {
                diag
            } else if i == j + 1 {
                sub
            } else {
                0.0
            }
        })
    }

    fn with_source(source: Source) -> Self {
        Self { source, cache: RwLock::default() }
    }

    pub fn name(&self) -> &str {
        match &self.source {
            Source::Composition(q) => q.op.tau().name(),
            Source::Explicit { name, .. } => name,
        }
    }

    pub fn operator(&self) -> Option<&CompositionOperator> {
        match &self.source {
            Source::Composition(q) => Some(&q.op),
            Source::Explicit { .. } => None,
        }
    }

    pub fn rule(&self) -> Option<&QuadratureRule> {
        match &self.source {
            Source::Composition(q) => Some(&q.rule),
            Source::Explicit { .. } => None,
        }
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.read().len()
    }

    fn compute(&self, i: usize, j: usize) -> Result<f64> {
        let v = match &self.source {
            Source::Composition(q) => q.entry(i, j),
            Source::Explicit { entry, .. } => entry(i, j),
        };
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("entry ({i}, {j}) of {} is not finite", self.name())));
        }
        Ok(v)
    }

    /// `c_ij`, computed once and cached.
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        if i == 0 || j == 0 {
            return Err(Error::IndexOutOfRange(i.min(j)));
        }
        if let Some(&v) = self.cache.read().get(&(i, j)) {
            return Ok(v);
        }
        let v = self.compute(i, j)?;
        self.cache.write().insert((i, j), v);
        Ok(v)
    }

    /// Entry bypassing the cache.
    pub fn fresh_entry(&self, i: usize, j: usize) -> Result<f64> {
        if i == 0 || j == 0 {
            return Err(Error::IndexOutOfRange(i.min(j)));
        }
        self.compute(i, j)
    }

    /// Upper-left `m x n` block.
    pub fn section(&self, m: usize, n: usize) -> Result<DenseMatrix> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput(format!("section size must be positive, got {m}x{n}")));
        }
        let rows: Vec<Vec<f64>> = (1..=m)
            .into_par_iter()
            .map(|i| (1..=n).map(|j| self.entry(i, j)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        DenseMatrix::from_rows(&rows)
    }

    /// Leading `m` coefficients of `y`.
    pub fn rhs_coefficients(&self, rhs: &Rhs, m: usize) -> Result<Vec<f64>> {
        match rhs {
            Rhs::Coefficients(c) if c.len() >= m => Ok(c[..m].to_vec()),
            Rhs::Coefficients(c) => {
                Err(Error::InvalidInput(format!("right-hand side has {} coefficients, {m} needed", c.len())))
            }
            Rhs::Sequence(f) => Ok((1..=m).map(|k| f(k)).collect()),
            Rhs::Function(f) => match &self.source {
                Source::Composition(q) => coefficients(|t| f(t), q.op.basis_out(), m, &q.rule),
                Source::Explicit { name, .. } => Err(Error::InvalidInput(format!(
                    "function right-hand side needs a composition operator, `{name}` is an explicit matrix"
                ))),
            },
        }
    }

    /// Truncated Schur sums over the leading `truncation x truncation` block.
    pub fn schur_test(&self, truncation: usize) -> Result<SchurReport> {
        let c = self.section(truncation, truncation)?;
        let col_sum = |j: usize| (0..truncation).map(|i| c.get(i, j).abs()).sum::<f64>();
        let row_sum = |i: usize| (0..truncation).map(|j| c.get(i, j).abs()).sum::<f64>();
        let alpha_hat = (0..truncation).map(col_sum).fold(0.0, f64::max);
        let beta_hat = (0..truncation).map(row_sum).fold(0.0, f64::max);
        Ok(SchurReport { alpha_hat, beta_hat, bound: (alpha_hat * beta_hat).sqrt(), truncation })
    }

    /// `sqrt(sum_{i = from_row..=to_row} c_ij^2)`.
    pub fn column_tail(&self, j: usize, from_row: usize, to_row: usize) -> Result<f64> {
        if from_row == 0 || from_row > to_row {
            return Err(Error::InvalidInput(format!("need 1 <= from_row <= to_row, got {from_row}..{to_row}")));
        }
        let mut sum = 0.0;
        for i in from_row..=to_row {
            sum += self.entry(i, j)?.powi(2);
        }
        Ok(sum.sqrt())
    }

    /// Column tails `column_tail(j, m, to_row)` for every `m` in `1..=to_row`,
    /// accumulated from the bottom in one pass.
    pub fn column_tails(&self, j: usize, to_row: usize) -> Result<Vec<f64>> {
        let mut tails = vec![0.0; to_row];
        let mut sum = 0.0;
        for i in (1..=to_row).rev() {
            sum += self.entry(i, j)?.powi(2);
            tails[i - 1] = sum.sqrt();
        }
        Ok(tails)
    }
}

/// Convenience: representation of a catalog diffeomorphism with the same
/// basis on both sides and the default quadrature.
pub fn represent(tau: Diffeomorphism, basis: Basis) -> Result<InfiniteMatrixRep> {
    InfiniteMatrixRep::from_operator(CompositionOperator::new(tau, basis, basis), QuadratureRule::default())
}

/// Truncated Schur-test sums; a diagnostic, not a certified bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurReport {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub bound: f64,
    pub truncation: usize,
}
