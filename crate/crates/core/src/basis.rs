//! Orthonormal bases of `L^2[0,1]` and the composite Gauss–Legendre rule
//! used for every inner product in the crate.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_PANELS: usize = 64;
pub const DEFAULT_NODES_PER_PANEL: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// `P_n` from the Chebyshev-like initial guesses.
fn gauss_legendre_reference(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
        p_prev = p;
        p = next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// Composite Gauss–Legendre rule on `[0, 1]` with equal panels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    panels: usize,
    nodes_per_panel: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn composite_gauss_legendre(panels: usize, nodes_per_panel: usize) -> Result<Self> {
        if panels == 0 || nodes_per_panel == 0 {
            return Err(Error::InvalidInput("quadrature needs at least one panel and one node".into()));
        }
        let (ref_nodes, ref_weights) = gauss_legendre_reference(nodes_per_panel);
        let h = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(panels * nodes_per_panel);
        let mut weights = Vec::with_capacity(panels * nodes_per_panel);
        for p in 0..panels {
            let left = p as f64 * h;
            for (x, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(left + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Ok(Self { panels, nodes_per_panel, nodes, weights })
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn design_degree(&self) -> usize {
        2 * self.nodes_per_panel - 1
    }

    /// Same rule with twice the panel count.
    pub fn refined(&self) -> Self {
        Self::composite_gauss_legendre(2 * self.panels, self.nodes_per_panel).expect("valid sizes")
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (&s, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(s);
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { at: s });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// Weighted sum against values already sampled at the nodes.
    pub fn sum_sampled(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Weighted inner product of two sampled functions.
    pub fn dot_sampled(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::composite_gauss_legendre(DEFAULT_PANELS, DEFAULT_NODES_PER_PANEL).expect("valid sizes")
    }
}

/// Orthonormal basis family of `L^2[0,1]`, indexed from 1.
///
/// * Fourier: `phi_1 = 1`, `phi_{2k} = sqrt(2) cos(2 pi k s)`,
///   `phi_{2k+1} = sqrt(2) sin(2 pi k s)`.
/// * Legendre: `phi_k(s) = sqrt(2k - 1) P_{k-1}(2s - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Basis {
    #[default]
    Fourier,
    Legendre,
}

impl Basis {
    pub fn eval(self, k: usize, s: f64) -> Result<f64> {
        if k == 0 {
            return Err(Error::IndexOutOfRange(k));
        }
        Ok(self.eval_unchecked(k, s))
    }

    pub(crate) fn eval_unchecked(self, k: usize, s: f64) -> f64 {
        match self {
            Basis::Fourier => {
                if k == 1 {
                    1.0
                } else {
                    let freq = (k / 2) as f64;
                    let arg = 2.0 * PI * freq * s;
                    if k.is_multiple_of(2) {
                        SQRT_2 * arg.cos()
                    } else {
                        SQRT_2 * arg.sin()
                    }
                }
            }
            Basis::Legendre => {
                let (p, _) = legendre_with_derivative(k - 1, 2.0 * s - 1.0);
                ((2 * k - 1) as f64).sqrt() * p
            }
        }
    }

    /// `phi_k` sampled at every point of `at`.
    pub fn sample(self, k: usize, at: &[f64]) -> Result<Vec<f64>> {
        if k == 0 {
            return Err(Error::IndexOutOfRange(k));
        }
        Ok(at.iter().map(|&s| self.eval_unchecked(k, s)).collect())
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::Fourier => "fourier",
            Basis::Legendre => "legendre",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fourier" => Ok(Basis::Fourier),
            "legendre" => Ok(Basis::Legendre),
            other => Err(Error::InvalidInput(format!("unknown basis `{other}`"))),
        }
    }
}

/// A quadrature value with an estimate of its error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// `(f, g)` under `rule`.
pub fn inner_product(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, rule: &QuadratureRule) -> Result<f64> {
    let mut acc = 0.0;
    for (&s, &w) in rule.nodes().iter().zip(rule.weights()) {
        let (a, b) = (f(s), g(s));
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFiniteValue { at: s });
        }
        acc += w * a * b;
    }
    Ok(acc)
}

/// `(f, g)` under `rule` with an error estimate from the panel-doubled rule.
///
/// The estimate is twice the observed change plus a rounding floor, so the
/// change on refinement is always below it.
pub fn inner_product_with_estimate(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    rule: &QuadratureRule,
) -> Result<Estimate> {
    let value = inner_product(&f, &g, rule)?;
    let fine = inner_product(&f, &g, &rule.refined())?;
    let error = 2.0 * (fine - value).abs() + 4.0 * f64::EPSILON * (1.0 + value.abs());
    Ok(Estimate { value, error })
}

/// First `count` generalized Fourier coefficients `(f, phi_k)`.
pub fn coefficients(f: impl Fn(f64) -> f64, basis: Basis, count: usize, rule: &QuadratureRule) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidInput("coefficient count must be at least 1".into()));
    }
    let samples: Vec<f64> = rule.nodes().iter().map(|&s| f(s)).collect();
    if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { at: rule.nodes()[pos] });
    }
    (1..=count)
        .map(|k| Ok(rule.dot_sampled(&samples, &basis.sample(k, rule.nodes())?)))
        .collect()
}
