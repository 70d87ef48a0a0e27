//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use finsec_core::det_theorem::{random_matrix, run_trials};
use finsec_core::verify::{self, CheckRow};
use finsec_core::{
    manufacture, represent, Basis, Catalog, ConvergenceRecord, Diffeomorphism, InfiniteMatrixRep, Method, Rhs,
    Schedule, Solver, TrueSolution,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: usize,
    name: &'static str,
    run: fn() -> Outcome,
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn all_pass(rows: &[CheckRow]) -> (bool, String) {
    let failed: Vec<&CheckRow> = rows.iter().filter(|r| !r.pass()).collect();
    let worst = rows.iter().map(|r| r.value / r.limit.abs().max(f64::MIN_POSITIVE)).fold(f64::NEG_INFINITY, f64::max);
    let mut msg = format!("{} of {} checks pass", rows.len() - failed.len(), rows.len());
    if let Some(r) = failed.first() {
        msg += &format!("; first failure {} {}: {:e} > {:e}", r.suite, r.case, r.value, r.limit);
    } else if !rows.is_empty() {
        msg += &format!("; worst value/limit {worst:.3e}");
    }
    (failed.is_empty() && !rows.is_empty(), msg)
}

/// Every ratio-2 section with `m, n <= 64`; each draws a truth that fits it.
fn identity_exactness() -> Outcome {
    let (worst, took) = timed(|| -> Result<f64, String> {
        let reps = [represent(Diffeomorphism::identity(), Basis::Fourier).map_err(e)?, InfiniteMatrixRep::identity()];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for rep in &reps {
            let solver = Solver::new(rep);
            for method in [Method::Overdetermined, Method::Underdetermined] {
                for &(m, n) in Schedule::doubling(method, 2, 1, 32).map_err(e)?.pairs() {
                    let truth = random_matrix(&mut rng, 1, m.min(n)).row(0);
                    let made = manufacture(rep, &TrueSolution::Coefficients(truth), m, n).map_err(e)?;
                    let sol = solver.solve(method, &made.rhs, m, n).map_err(e)?;
                    let err = sol.coeffs.iter().zip(&made.reference).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    worst = worst.max(err);
                }
            }
        }
        Ok(worst)
    });
    let worst = worst?;
    let ok = worst <= 1e-10 && took < Duration::from_secs(1);
    Ok((ok, format!("max error {worst:.3e} (limit 1e-10), {:.3} s (limit 1 s)", secs(took))))
}

fn sweep_verdict(records: &[ConvergenceRecord]) -> (bool, String) {
    let errs: Vec<f64> = records.iter().map(|r| r.error_to_reference).collect();
    let strictly = errs.windows(2).all(|w| w[1] < w[0]);
    let (first, last) = (errs[0], errs[errs.len() - 1]);
    let drop = last < first / 10.0;
    let list: Vec<String> = errs.iter().map(|x| format!("{x:.3e}")).collect();
    (
        strictly && drop,
        format!(
            "errors [{}]: strictly decreasing {strictly}, final < first/10 {drop} (ratio {:.3})",
            list.join(", "),
            first / last
        ),
    )
}

fn poly_fourier() -> Result<InfiniteMatrixRep, String> {
    represent(Diffeomorphism::poly_quadratic(), Basis::Fourier).map_err(e)
}

fn phi2_plus_half_phi3() -> TrueSolution {
    TrueSolution::Coefficients(vec![0.0, 1.0, 0.5])
}

fn overdetermined_sweep() -> Outcome {
    let (out, took) = timed(|| -> Result<(bool, String), String> {
        let rep = poly_fourier()?;
        let schedule = Schedule::default_for(Method::Overdetermined);
        let made = manufacture(&rep, &phi2_plus_half_phi3(), schedule.max_m(), 2 * schedule.max_n()).map_err(e)?;
        let recs = Solver::new(&rep).converge_over(&made.rhs, &schedule, &made.reference).map_err(e)?;
        Ok(sweep_verdict(&recs))
    });
    let (ok, msg) = out?;
    let fast = took < Duration::from_secs(30);
    Ok((ok && fast, format!("{msg}; {:.2} s (limit 30 s)", secs(took))))
}

fn underdetermined_sweep() -> Outcome {
    let (out, took) = timed(|| -> Result<(bool, String), String> {
        let rep = poly_fourier()?;
        let schedule = Schedule::default_for(Method::Underdetermined);
        let made = manufacture(&rep, &phi2_plus_half_phi3(), schedule.max_m(), 2 * schedule.max_n()).map_err(e)?;
        let recs = Solver::new(&rep).converge_under(&made.rhs, &schedule, &made.reference).map_err(e)?;
        let (ok, msg) = sweep_verdict(&recs);
        let norms: Vec<f64> = recs.iter().map(|r| r.solution_norm).collect();
        let monotone = norms.windows(2).all(|w| w[1] >= w[0] - 1e-10);
        Ok((ok && monotone, format!("{msg}; solution_norm nondecreasing {monotone}")))
    });
    let (ok, msg) = out?;
    let fast = took < Duration::from_secs(30);
    Ok((ok && fast, format!("{msg}; {:.2} s (limit 30 s)", secs(took))))
}

fn norm_bound() -> Outcome {
    Ok(all_pass(&verify::norm_bounds(64).map_err(e)?))
}

fn pythagoras() -> Outcome {
    Ok(all_pass(&verify::pythagoras(200, 1).map_err(e)?))
}

fn det_theorem() -> Outcome {
    let (trials, took) = timed(|| run_trials(1000, 1));
    let trials = trials.map_err(e)?;
    let identity_bad = trials.iter().take(100).filter(|t| !t.identity_holds()).count();
    let worst_gap = trials.iter().take(100).map(|t| t.identity.relative_gap()).fold(0.0, f64::max);
    let violations = trials.iter().filter(|t| !t.inequality.holds()).count();
    let ok = identity_bad == 0 && violations == 0 && took < Duration::from_secs(10);
    Ok((
        ok,
        format!(
            "minor-sum identity worst relative gap {worst_gap:.3e} over 100 (limit 1e-9), \
             inequality violations {violations} of 1000, {:.2} s (limit 10 s)",
            secs(took)
        ),
    ))
}

fn column_tails() -> Outcome {
    Ok(all_pass(&verify::column_tails(8, 256).map_err(e)?))
}

fn square_corner() -> Outcome {
    let rhs = Rhs::function(|t| t.ln_1p() + (3.0 * t).cos());
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for entry in Catalog::all() {
        let rep = represent(entry.build().map_err(e)?, Basis::Fourier).map_err(e)?;
        let solver = Solver::new(&rep);
        for n in [1, 2, 3, 4, 8, 16, 32, 64] {
            let over = solver.solve(Method::Overdetermined, &rhs, n, n).map_err(e)?;
            if over.sigma_min <= 1e-6 {
                continue;
            }
            let under = solver.solve(Method::Underdetermined, &rhs, n, n).map_err(e)?;
            let d = over.coeffs.iter().zip(&under.coeffs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(d);
            checked += 1;
        }
    }
    Ok((checked > 0 && worst <= 1e-8, format!("max difference {worst:.3e} over {checked} squares (limit 1e-8)")))
}

fn run_cli(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_finsec"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(e)?;
    if !status.status.success() {
        return Err(format!("`finsec {}` exited with {}", args.join(" "), status.status));
    }
    std::fs::read(out).map_err(e)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let invocations: [&[&str]; 4] = [
        &["verify", "det-theorem", "--trials", "200", "--seed", "7"],
        &["verify", "pythagoras", "--trials", "50", "--seed", "3"],
        &["converge", "--op", "poly-quadratic", "--method", "over", "--schedule", "ratio2:4..64"],
        &["converge", "--op", "exp:2", "--basis", "legendre", "--method", "under", "--rhs", "fn:log-cos"],
    ];
    let mut same = 0;
    for (k, args) in invocations.iter().enumerate() {
        let a = run_cli(args, &dir.path().join(format!("{k}a.csv")))?;
        let b = run_cli(args, &dir.path().join(format!("{k}b.csv")))?;
        if a == b && !a.is_empty() {
            same += 1;
        }
    }
    Ok((same == invocations.len(), format!("{same} of {} invocations byte-identical across runs", invocations.len())))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "identity-operator exactness", run: identity_exactness },
        Criterion { id: 2, name: "overdetermined convergence sweep", run: overdetermined_sweep },
        Criterion { id: 3, name: "underdetermined convergence sweep", run: underdetermined_sweep },
        Criterion { id: 4, name: "operator norm bound", run: norm_bound },
        Criterion { id: 5, name: "least-squares and min-norm Pythagoras", run: pythagoras },
        Criterion { id: 6, name: "minor-sum identity and determinant inequality", run: det_theorem },
        Criterion { id: 7, name: "column tails", run: column_tails },
        Criterion { id: 8, name: "square-corner agreement", run: square_corner },
        Criterion { id: 9, name: "determinism", run: determinism },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let (ok, msg) = match (c.run)() {
            Ok(v) => v,
            Err(err) => (false, format!("error: {err}")),
        };
        if !ok {
            failed += 1;
        }
        println!("[{}] {} {}: {msg}", if ok { "PASS" } else { "FAIL" }, c.id, c.name);
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
