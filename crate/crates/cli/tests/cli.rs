use std::process::Command;

use finsec_cli::csv_io::{read_convergence, read_matrix, read_solution, read_verify};
use finsec_cli::{exit, main_with};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn finsec(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(std::iter::once("finsec").chain(args.iter().copied()), &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

#[test]
fn verify_det_theorem_exits_zero() {
    let r = finsec(&["verify", "det-theorem", "--trials", "100", "--seed", "1"]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let rows = read_verify(r.stdout.as_bytes()).unwrap();
    assert_eq!(rows.len(), 300);
    assert!(rows.iter().all(|row| row.pass && row.suite == "det-theorem"));
    assert!(r.stderr.contains("300/300"));
}

#[test]
fn solve_identity_under_recovers_unit_vector() {
    let r = finsec(&["solve", "--op", "identity", "--method", "under", "--m", "4", "--n", "8", "--rhs", "e1"]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let coeffs = read_solution(r.stdout.as_bytes()).unwrap();
    assert_eq!(coeffs.len(), 8);
    for (k, c) in coeffs.iter().enumerate() {
        let want = if k == 0 { 1.0 } else { 0.0 };
        assert!((c - want).abs() < 1e-12, "{coeffs:?}");
    }
    assert!(r.stderr.contains("method under"));
}

#[test]
fn converge_poly_over_error_strictly_decreases() {
    let r = finsec(&["converge", "--op", "poly-quadratic", "--method", "over", "--schedule", "ratio2:4..64"]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let rows = read_convergence(r.stdout.as_bytes()).unwrap();
    assert_eq!(rows.iter().map(|x| (x.m, x.n)).collect::<Vec<_>>(), [(8, 4), (16, 8), (32, 16), (64, 32), (128, 64)]);
    assert!(rows.windows(2).all(|w| w[1].error < w[0].error), "{rows:?}");
}

#[test]
fn manufactured_solve_reports_error() {
    let r = finsec(&["solve", "--method", "over", "--m", "16", "--n", "8", "--true-solution", "2:1,3:0.5"]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let line = r.stderr.lines().find(|l| l.starts_with("error_to_truth")).unwrap();
    let err: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(err < 1e-12);
}

#[test]
fn represent_writes_row_major_section() {
    let r = finsec(&["represent", "--op", "matrix-shift", "--m", "3", "--n", "2"]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    let rows = read_matrix(r.stdout.as_bytes()).unwrap();
    assert_eq!(rows, vec![vec![1.0, 0.0], vec![0.5, 1.0], vec![0.0, 0.5]]);
}

#[test]
fn out_file_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &std::path::Path| {
        vec!["converge", "--op", "exp:1.5", "--method", "under", "--schedule", "2:4,4:8,8:16", "--out"]
            .into_iter()
            .map(String::from)
            .chain([p.to_string_lossy().into_owned()])
            .collect::<Vec<_>>()
    };
    for p in [&a, &b] {
        let argv = args(p);
        let r = finsec(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(r.code, exit::OK, "{}", r.stderr);
        assert!(r.stdout.contains("3 sections"));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let rows = read_convergence(bytes.as_slice()).unwrap();
    let mut again = Vec::new();
    let recs: Vec<finsec_core::ConvergenceRecord> = rows
        .iter()
        .map(|r| finsec_core::ConvergenceRecord {
            m: r.m,
            n: r.n,
            error_to_reference: r.error,
            residual_norm: r.residual,
            solution_norm: r.solution_norm,
            sigma_min: r.sigma_min,
            failure: None,
        })
        .collect();
    finsec_cli::csv_io::write_convergence(&mut again, &recs).unwrap();
    assert_eq!(again, bytes);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "op = \"matrix-identity\"\nmethod = \"over\"\nm = 6\nn = 3\nrhs = \"e2\"\n").unwrap();
    let path = cfg.to_str().unwrap();
    let r = finsec(&["solve", "--config", path]);
    assert_eq!(r.code, exit::OK, "{}", r.stderr);
    assert_eq!(read_solution(r.stdout.as_bytes()).unwrap(), vec![0.0, 1.0, 0.0]);
    let r = finsec(&["solve", "--config", path, "--n", "4", "--rhs", "e4"]);
    assert_eq!(read_solution(r.stdout.as_bytes()).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
}

#[test]
fn exit_codes_by_category() {
    assert_eq!(finsec(&["solve", "--op", "nope", "--method", "over", "--m", "2", "--n", "1", "--rhs", "e1"]).code, exit::CONFIG);
    assert_eq!(finsec(&["solve", "--method", "over", "--m", "1", "--n", "2", "--rhs", "e1"]).code, exit::CONFIG);
    assert_eq!(finsec(&["verify", "bogus"]).code, exit::CONFIG);
    assert_eq!(finsec(&["frobnicate"]).code, exit::CONFIG);
    assert_eq!(finsec(&["solve", "--config", "/nonexistent/x.toml"]).code, exit::IO);
    let r = finsec(&["solve", "--op", "exp:0", "--method", "over", "--m", "3", "--n", "3", "--rhs", "ones"]);
    assert_eq!(r.code, exit::DOMAIN, "{}", r.stderr);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("out.csv");
    let r = finsec(&["represent", "--m", "2", "--n", "2", "--out", bad.to_str().unwrap()]);
    assert_eq!(r.code, exit::IO);
}

#[test]
fn binary_runs_and_sets_exit_status() {
    let bin = env!("CARGO_BIN_EXE_finsec");
    let ok = Command::new(bin).args(["verify", "schur"]).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("suite,case,value,limit,pass\n"));
    let bad = Command::new(bin).args(["solve", "--m", "0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(exit::CONFIG));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("--m must be positive"));
}
