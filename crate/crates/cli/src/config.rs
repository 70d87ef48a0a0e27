//! Experiment configuration: raw settings from flags and an optional TOML
//! file, and their parsed, validated form.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use finsec_core::basis::{DEFAULT_NODES_PER_PANEL, DEFAULT_PANELS};
use finsec_core::{
    Basis, Catalog, CompositionOperator, InfiniteMatrixRep, Method, QuadratureRule, Rhs, Schedule, TrueSolution,
};
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Settings shared by every subcommand. Each field may come from the command
/// line or from the config file; the command line wins.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// identity | poly-quadratic | exp[:GAMMA] | matrix-identity | matrix-harmonic | matrix-shift
    #[arg(long)]
    pub op: Option<String>,
    /// fourier | legendre, or IN:OUT for distinct input and output bases
    #[arg(long)]
    pub basis: Option<String>,
    /// over | under
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// ratioR:START..END, or an explicit list M:N,M:N,...
    #[arg(long)]
    pub schedule: Option<String>,
    /// e<K> | ones | geometric | fn:<NAME>
    #[arg(long)]
    pub rhs: Option<String>,
    /// <NAME>, or a coefficient list INDEX:VALUE,... (1-based)
    #[arg(long)]
    pub true_solution: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub quad_panels: Option<usize>,
    #[arg(long)]
    pub quad_nodes: Option<usize>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Fields set in `self` take precedence over `base`.
    pub fn over(self, base: Settings) -> Settings {
        Settings {
            op: self.op.or(base.op),
            basis: self.basis.or(base.basis),
            method: self.method.or(base.method),
            m: self.m.or(base.m),
            n: self.n.or(base.n),
            schedule: self.schedule.or(base.schedule),
            rhs: self.rhs.or(base.rhs),
            true_solution: self.true_solution.or(base.true_solution),
            out: self.out.or(base.out),
            seed: self.seed.or(base.seed),
            trials: self.trials.or(base.trials),
            quad_panels: self.quad_panels.or(base.quad_panels),
            quad_nodes: self.quad_nodes.or(base.quad_nodes),
        }
    }
}

/// Which operator to discretize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpSpec {
    Composition(Catalog),
    MatrixIdentity,
    /// `diag(1, 1/2, 1/3, ...)`
    MatrixHarmonic,
    /// Main diagonal 1, first subdiagonal 1/2.
    MatrixShift,
}

impl OpSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "matrix-identity" => Ok(OpSpec::MatrixIdentity),
            "matrix-harmonic" => Ok(OpSpec::MatrixHarmonic),
            "matrix-shift" => Ok(OpSpec::MatrixShift),
            other => other.parse().map(OpSpec::Composition).map_err(|_| {
                CliError::config(format!(
                    "unknown operator `{other}`; expected identity, poly-quadratic, exp[:GAMMA], \
                     matrix-identity, matrix-harmonic or matrix-shift"
                ))
            }),
        }
    }

    pub fn is_composition(self) -> bool {
        matches!(self, OpSpec::Composition(_))
    }
}

/// Smooth test functions selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedFn {
    /// `exp(cos 2πs)`
    Smooth,
    /// `sin(3s) + s²`
    SinSquare,
    /// `s`
    Ramp,
    /// `log(1 + s) + cos 3s`
    LogCos,
}

impl NamedFn {
    pub const ALL: [NamedFn; 4] = [NamedFn::Smooth, NamedFn::SinSquare, NamedFn::Ramp, NamedFn::LogCos];

    pub fn name(self) -> &'static str {
        match self {
            NamedFn::Smooth => "smooth",
            NamedFn::SinSquare => "sin-square",
            NamedFn::Ramp => "ramp",
            NamedFn::LogCos => "log-cos",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn eval(self, s: f64) -> f64 {
        match self {
            NamedFn::Smooth => (2.0 * std::f64::consts::PI * s).cos().exp(),
            NamedFn::SinSquare => (3.0 * s).sin() + s * s,
            NamedFn::Ramp => s,
            NamedFn::LogCos => s.ln_1p() + (3.0 * s).cos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RhsSpec {
    Unit(usize),
    Ones,
    /// `y_k = 2^{1-k}`
    Geometric,
    Function(NamedFn),
}

impl RhsSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || CliError::config(format!("unknown rhs `{s}`; expected e<K>, ones, geometric or fn:<NAME>"));
        match s {
            "ones" => Ok(RhsSpec::Ones),
            "geometric" => Ok(RhsSpec::Geometric),
            _ => {
                if let Some(k) = s.strip_prefix('e') {
                    let k: usize = k.parse().map_err(|_| bad())?;
                    if k == 0 {
                        return Err(CliError::config("unit rhs index starts at 1"));
                    }
                    Ok(RhsSpec::Unit(k))
                } else if let Some(name) = s.strip_prefix("fn:") {
                    NamedFn::parse(name).map(RhsSpec::Function).ok_or_else(bad)
                } else {
                    Err(bad())
                }
            }
        }
    }

    pub fn to_rhs(&self) -> Rhs {
        match *self {
            RhsSpec::Unit(k) => Rhs::unit(k),
            RhsSpec::Ones => Rhs::sequence(|_| 1.0),
            RhsSpec::Geometric => Rhs::sequence(|k| 0.5f64.powi(k as i32 - 1)),
            RhsSpec::Function(f) => Rhs::function(move |t| f.eval(t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrueSpec {
    Named(NamedFn),
    /// Dense coefficients, index 0 holding the first basis element.
    Coefficients(Vec<f64>),
}

impl TrueSpec {
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(f) = NamedFn::parse(s) {
            return Ok(TrueSpec::Named(f));
        }
        let bad = |why: &str| CliError::config(format!("true solution `{s}`: {why}"));
        let mut coeffs = Vec::new();
        for item in s.split(',') {
            let (idx, val) = item.split_once(':').ok_or_else(|| bad("expected a function name or INDEX:VALUE list"))?;
            let idx: usize = idx.trim().parse().map_err(|_| bad("index is not a positive integer"))?;
            let val: f64 = val.trim().parse().map_err(|_| bad("value is not a number"))?;
            if idx == 0 {
                return Err(bad("indices start at 1"));
            }
            if !val.is_finite() {
                return Err(bad("value must be finite"));
            }
            if coeffs.len() < idx {
                coeffs.resize(idx, 0.0);
            }
            coeffs[idx - 1] = val;
        }
        Ok(TrueSpec::Coefficients(coeffs))
    }

    pub fn to_truth(&self) -> TrueSolution {
        match self {
            TrueSpec::Named(f) => {
                let f = *f;
                TrueSolution::Function(Arc::new(move |s| f.eval(s)))
            }
            TrueSpec::Coefficients(c) => TrueSolution::Coefficients(c.clone()),
        }
    }
}

pub fn parse_method(s: &str) -> Result<Method> {
    s.parse().map_err(|_| CliError::config(format!("unknown method `{s}`; expected over or under")))
}

pub fn parse_basis_pair(s: &str) -> Result<(Basis, Basis)> {
    let one = |b: &str| b.parse::<Basis>().map_err(|_| CliError::config(format!("unknown basis `{b}`")));
    match s.split_once(':') {
        Some((a, b)) => Ok((one(a)?, one(b)?)),
        None => {
            let b = one(s)?;
            Ok((b, b))
        }
    }
}

pub fn parse_schedule(s: &str, method: Method) -> Result<Schedule> {
    let bad = |why: &str| CliError::config(format!("schedule `{s}`: {why}"));
    let pairs = if let Some(rest) = s.strip_prefix("ratio") {
        let (ratio, range) = rest.split_once(':').ok_or_else(|| bad("expected ratioR:START..END"))?;
        let (start, end) = range.split_once("..").ok_or_else(|| bad("expected START..END"))?;
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad("not a positive integer"));
        return Schedule::doubling(method, num(ratio)?, num(start)?, num(end)?).map_err(|e| bad(&e.to_string()));
    } else {
        s.split(',')
            .map(|item| {
                let (m, n) = item.split_once(':').ok_or_else(|| bad("expected M:N pairs"))?;
                let m = m.trim().parse::<usize>().map_err(|_| bad("not a positive integer"))?;
                let n = n.trim().parse::<usize>().map_err(|_| bad("not a positive integer"))?;
                Ok((m, n))
            })
            .collect::<Result<Vec<_>>>()?
    };
    if pairs.iter().any(|&(m, n)| m == 0 || n == 0) {
        return Err(bad("sizes must be positive"));
    }
    Schedule::new(method, pairs).map_err(|e| bad(&e.to_string()))
}

pub const DEFAULT_SEED: u64 = 1;

/// Parsed settings. Fields a subcommand does not need stay optional and are
/// checked by the subcommand.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub op: OpSpec,
    pub basis_in: Basis,
    pub basis_out: Basis,
    pub quad_panels: usize,
    pub quad_nodes: usize,
    pub method: Option<Method>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub schedule: Option<Schedule>,
    pub rhs: Option<RhsSpec>,
    pub true_solution: Option<TrueSpec>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub trials: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let op = OpSpec::parse(s.op.as_deref().unwrap_or("poly-quadratic"))?;
        let (basis_in, basis_out) = parse_basis_pair(s.basis.as_deref().unwrap_or("fourier"))?;
        let method = s.method.as_deref().map(parse_method).transpose()?;
        let schedule = match &s.schedule {
            Some(text) => {
                let method = method.ok_or_else(|| CliError::config("--schedule needs --method"))?;
                Some(parse_schedule(text, method)?)
            }
            None => None,
        };
        for (flag, v) in [("--m", s.m), ("--n", s.n), ("--trials", s.trials), ("--quad-panels", s.quad_panels), ("--quad-nodes", s.quad_nodes)] {
            if v == Some(0) {
                return Err(CliError::config(format!("{flag} must be positive")));
            }
        }
        if let (Some(method), Some(m), Some(n)) = (method, s.m, s.n) {
            if !method.admits(m, n) {
                return Err(CliError::config(format!("section {m}x{n} is not valid for the {method} method")));
            }
        }
        let true_solution = s.true_solution.as_deref().map(TrueSpec::parse).transpose()?;
        if !op.is_composition() && matches!(true_solution, Some(TrueSpec::Named(_))) {
            return Err(CliError::config("a named true solution needs a composition operator"));
        }
        Ok(Self {
            op,
            basis_in,
            basis_out,
            quad_panels: s.quad_panels.unwrap_or(DEFAULT_PANELS),
            quad_nodes: s.quad_nodes.unwrap_or(DEFAULT_NODES_PER_PANEL),
            method,
            m: s.m,
            n: s.n,
            schedule,
            rhs: s.rhs.as_deref().map(RhsSpec::parse).transpose()?,
            true_solution,
            out: s.out.clone(),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            trials: s.trials,
        })
    }

    pub fn rule(&self) -> Result<QuadratureRule> {
        Ok(QuadratureRule::composite_gauss_legendre(self.quad_panels, self.quad_nodes)?)
    }

    pub fn representation(&self) -> Result<InfiniteMatrixRep> {
        Ok(match self.op {
            OpSpec::Composition(entry) => {
                let op = CompositionOperator::new(entry.build()?, self.basis_in, self.basis_out);
                InfiniteMatrixRep::from_operator(op, self.rule()?)?
            }
            OpSpec::MatrixIdentity => InfiniteMatrixRep::identity(),
            OpSpec::MatrixHarmonic => InfiniteMatrixRep::diagonal("matrix-harmonic", |k| 1.0 / k as f64),
            OpSpec::MatrixShift => InfiniteMatrixRep::shift_diagonal(1.0, 0.5),
        })
    }
}
