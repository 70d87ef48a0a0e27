use std::fs::File;
use std::io::{BufWriter, Write};

use finsec_core::verify::{run_suite, CheckRow, Suite};
use finsec_core::{manufacture, Method, Rhs, Schedule, Solver};

use crate::config::{ExperimentConfig, NamedFn, TrueSpec};
use crate::csv_io;
use crate::error::{exit, CliError, Result};

/// Where CSV and the human-readable summary go. CSV goes to `--out` when
/// set, otherwise to stdout, and then the summary moves to stderr.
pub struct Sink<'a> {
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

impl Sink<'_> {
    fn emit(
        &mut self,
        cfg: &ExperimentConfig,
        write: impl FnOnce(&mut dyn Write) -> Result<()>,
    ) -> Result<&mut dyn Write> {
        match &cfg.out {
            Some(path) => {
                let file = File::create(path).map_err(|e| CliError::io(path, e))?;
                let mut w = BufWriter::new(file);
                write(&mut w)?;
                w.flush().map_err(|e| CliError::io(path, e))?;
                Ok(&mut *self.stdout)
            }
            None => {
                write(&mut *self.stdout)?;
                Ok(&mut *self.stderr)
            }
        }
    }
}

fn say(w: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    w.write_fmt(text).and_then(|_| w.write_all(b"\n")).map_err(|e| CliError::io("<summary>", e))
}

macro_rules! say {
    ($w:expr, $($t:tt)*) => { say($w, format_args!($($t)*)) };
}

fn need<T: Copy>(v: Option<T>, flag: &str, cmd: &str) -> Result<T> {
    v.ok_or_else(|| CliError::config(format!("`{cmd}` needs {flag}")))
}

pub fn represent(cfg: &ExperimentConfig, sink: &mut Sink<'_>) -> Result<i32> {
    let m = need(cfg.m, "--m", "represent")?;
    let n = need(cfg.n, "--n", "represent")?;
    let rep = cfg.representation()?;
    let section = rep.section(m, n)?;
    let w = sink.emit(cfg, |w| csv_io::write_matrix(w, &section))?;
    say!(w, "section {m}x{n} of {}", rep.name())?;
    say!(w, "frobenius_norm {}", csv_io::fmt_real(section.frobenius_norm()))?;
    Ok(exit::OK)
}

pub fn solve(cfg: &ExperimentConfig, sink: &mut Sink<'_>) -> Result<i32> {
    let method = need(cfg.method, "--method", "solve")?;
    let m = need(cfg.m, "--m", "solve")?;
    let n = need(cfg.n, "--n", "solve")?;
    let rep = cfg.representation()?;
    let (rhs, truth) = match (&cfg.rhs, &cfg.true_solution) {
        (Some(_), Some(_)) => return Err(CliError::config("give either --rhs or --true-solution, not both")),
        (Some(r), None) => (r.to_rhs(), None),
        (None, Some(t)) => {
            let resolution = match t {
                TrueSpec::Coefficients(c) => n.max(c.len()),
                TrueSpec::Named(_) => n,
            };
            let made = manufacture(&rep, &t.to_truth(), m, resolution)?;
            (made.rhs, Some(made.reference))
        }
        (None, None) => return Err(CliError::config("`solve` needs --rhs or --true-solution")),
    };
    let sol = Solver::new(&rep).solve(method, &rhs, m, n)?;
    let w = sink.emit(cfg, |w| csv_io::write_solution(w, &sol))?;
    say!(w, "operator {}", rep.name())?;
    say!(w, "method {method}")?;
    say!(w, "section {m}x{n}")?;
    say!(w, "residual_norm {}", csv_io::fmt_real(sol.residual_norm))?;
    say!(w, "solution_norm {}", csv_io::fmt_real(sol.solution_norm))?;
    say!(w, "sigma_min {}", csv_io::fmt_real(sol.sigma_min))?;
    if let Some(reference) = truth {
        let err = finsec_core::linalg::padded_distance(&sol.coeffs, &reference);
        say!(w, "error_to_truth {}", csv_io::fmt_real(err))?;
    }
    Ok(exit::OK)
}

/// Right-hand side and reference coefficients for a sweep.
fn sweep_problem(cfg: &ExperimentConfig, rep: &finsec_core::InfiniteMatrixRep, schedule: &Schedule) -> Result<(Rhs, Vec<f64>)> {
    match (&cfg.rhs, &cfg.true_solution) {
        (Some(_), Some(_)) => Err(CliError::config("give either --rhs or --true-solution, not both")),
        (Some(r), None) => {
            let rhs = r.to_rhs();
            let reference = Solver::new(rep).reference_solution(&rhs)?;
            Ok((rhs, reference))
        }
        (None, truth) => {
            let truth = match truth {
                Some(t) => t.clone(),
                None if cfg.op.is_composition() => TrueSpec::Named(NamedFn::SinSquare),
                None => return Err(CliError::config("`converge` on an explicit matrix needs --rhs or --true-solution")),
            };
            let mut resolution = 2 * schedule.max_n();
            if let TrueSpec::Coefficients(c) = &truth {
                resolution = resolution.max(c.len());
            }
            let made = manufacture(rep, &truth.to_truth(), schedule.max_m(), resolution)?;
            Ok((made.rhs, made.reference))
        }
    }
}

pub fn converge(cfg: &ExperimentConfig, sink: &mut Sink<'_>) -> Result<i32> {
    let method: Method = need(cfg.method, "--method", "converge")?;
    let schedule = cfg.schedule.clone().unwrap_or_else(|| Schedule::default_for(method));
    let rep = cfg.representation()?;
    let (rhs, reference) = sweep_problem(cfg, &rep, &schedule)?;
    let records = Solver::new(&rep).converge(method, &rhs, &schedule, &reference)?;
    let w = sink.emit(cfg, |w| csv_io::write_convergence(w, &records))?;
    say!(w, "operator {} method {method}, {} sections", rep.name(), records.len())?;
    for r in &records {
        match &r.failure {
            Some(why) => say!(w, "  {}x{} failed: {why}", r.m, r.n)?,
            None => say!(w, "  {}x{} error {:.3e} residual {:.3e}", r.m, r.n, r.error_to_reference, r.residual_norm)?,
        }
    }
    Ok(exit::OK)
}

pub fn default_trials(suite: Suite) -> usize {
    match suite {
        Suite::DetTheorem => 1000,
        Suite::Pythagoras => 200,
        _ => 0,
    }
}

pub fn verify(suite: &str, cfg: &ExperimentConfig, sink: &mut Sink<'_>) -> Result<i32> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse().map_err(|_| {
            let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
            CliError::config(format!("unknown suite `{suite}`; expected all or one of {}", names.join(", ")))
        })?]
    };
    let mut rows: Vec<CheckRow> = Vec::new();
    let mut tallies = Vec::new();
    for s in suites {
        let got = run_suite(s, cfg.trials.unwrap_or_else(|| default_trials(s)), cfg.seed)?;
        tallies.push((s, got.iter().filter(|r| r.pass()).count(), got.len()));
        rows.extend(got);
    }
    let w = sink.emit(cfg, |w| csv_io::write_verify(w, &rows))?;
    for (s, passed, total) in &tallies {
        say!(w, "{s}: {passed}/{total} checks passed")?;
    }
    let failed: Vec<&CheckRow> = rows.iter().filter(|r| !r.pass()).collect();
    for r in failed.iter().take(10) {
        say!(w, "  FAIL {} {}: {:e} > {:e}", r.suite, r.case, r.value, r.limit)?;
    }
    Ok(if failed.is_empty() { exit::OK } else { exit::VERIFICATION_FAILED })
}
