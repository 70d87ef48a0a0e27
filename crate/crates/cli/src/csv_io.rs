//! CSV artifacts. Reals are written as `{:.16e}` (17 significant digits),
//! which parses back to the identical `f64`.

use std::io::{Read, Write};

use finsec_core::{CheckRow, ConvergenceRecord, DenseMatrix, SectionSolution};

use crate::error::{CliError, Result};

pub const CONVERGENCE_HEADER: [&str; 6] = ["m", "n", "error", "residual", "solution_norm", "sigma_min"];
pub const SOLUTION_HEADER: [&str; 2] = ["index", "coefficient"];
pub const VERIFY_HEADER: [&str; 5] = ["suite", "case", "value", "limit", "pass"];

pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_real(s: &str) -> Result<f64> {
    s.parse().map_err(|_| CliError::config(format!("`{s}` is not a real number")))
}

fn parse_index(s: &str) -> Result<usize> {
    s.parse().map_err(|_| CliError::config(format!("`{s}` is not an index")))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| CliError::io("<csv output>", e))
}

/// One parsed convergence row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub m: usize,
    pub n: usize,
    pub error: f64,
    pub residual: f64,
    pub solution_norm: f64,
    pub sigma_min: f64,
}

impl From<&ConvergenceRecord> for ConvergenceRow {
    fn from(r: &ConvergenceRecord) -> Self {
        Self {
            m: r.m,
            n: r.n,
            error: r.error_to_reference,
            residual: r.residual_norm,
            solution_norm: r.solution_norm,
            sigma_min: r.sigma_min,
        }
    }
}

impl ConvergenceRow {
    /// Field-wise bit equality, so NaN rows compare equal.
    pub fn same_bits(&self, other: &Self) -> bool {
        let bits = |r: &Self| [r.error, r.residual, r.solution_norm, r.sigma_min].map(f64::to_bits);
        self.m == other.m && self.n == other.n && bits(self) == bits(other)
    }
}

pub fn write_convergence<W: Write>(w: W, records: &[ConvergenceRecord]) -> Result<()> {
    let mut w = writer(w);
    w.write_record(CONVERGENCE_HEADER)?;
    for r in records {
        let row = ConvergenceRow::from(r);
        w.write_record([
            row.m.to_string(),
            row.n.to_string(),
            fmt_real(row.error),
            fmt_real(row.residual),
            fmt_real(row.solution_norm),
            fmt_real(row.sigma_min),
        ])?;
    }
    finish(w)
}

fn records<R: Read>(r: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let found = rdr.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(CliError::config(format!("unexpected csv header `{}`", found.iter().collect::<Vec<_>>().join(","))));
    }
    rdr.records().map(|r| r.map_err(CliError::from)).collect()
}

pub fn read_convergence<R: Read>(r: R) -> Result<Vec<ConvergenceRow>> {
    records(r, &CONVERGENCE_HEADER)?
        .iter()
        .map(|rec| {
            Ok(ConvergenceRow {
                m: parse_index(&rec[0])?,
                n: parse_index(&rec[1])?,
                error: parse_real(&rec[2])?,
                residual: parse_real(&rec[3])?,
                solution_norm: parse_real(&rec[4])?,
                sigma_min: parse_real(&rec[5])?,
            })
        })
        .collect()
}

pub fn write_solution<W: Write>(w: W, sol: &SectionSolution) -> Result<()> {
    let mut w = writer(w);
    w.write_record(SOLUTION_HEADER)?;
    for (k, c) in sol.coeffs.iter().enumerate() {
        w.write_record([(k + 1).to_string(), fmt_real(*c)])?;
    }
    finish(w)
}

/// Coefficients in index order.
pub fn read_solution<R: Read>(r: R) -> Result<Vec<f64>> {
    let rows = records(r, &SOLUTION_HEADER)?;
    let mut out = Vec::with_capacity(rows.len());
    for (k, rec) in rows.iter().enumerate() {
        if parse_index(&rec[0])? != k + 1 {
            return Err(CliError::config(format!("solution row {} out of order", k + 1)));
        }
        out.push(parse_real(&rec[1])?);
    }
    Ok(out)
}

/// Row-major dump without a header.
pub fn write_matrix<W: Write>(w: W, a: &DenseMatrix) -> Result<()> {
    let mut w = writer(w);
    for i in 0..a.rows() {
        w.write_record(a.row(i).into_iter().map(fmt_real))?;
    }
    finish(w)
}

pub fn read_matrix<R: Read>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    rdr.records().map(|rec| rec?.iter().map(parse_real).collect()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub suite: String,
    pub case: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl From<&CheckRow> for VerifyRow {
    fn from(r: &CheckRow) -> Self {
        Self { suite: r.suite.name().to_string(), case: r.case.clone(), value: r.value, limit: r.limit, pass: r.pass() }
    }
}

pub fn write_verify<W: Write>(w: W, rows: &[CheckRow]) -> Result<()> {
    let mut w = writer(w);
    w.write_record(VERIFY_HEADER)?;
    for r in rows {
        w.write_record([r.suite.name().to_string(), r.case.clone(), fmt_real(r.value), fmt_real(r.limit), r.pass().to_string()])?;
    }
    finish(w)
}

pub fn read_verify<R: Read>(r: R) -> Result<Vec<VerifyRow>> {
    records(r, &VERIFY_HEADER)?
        .iter()
        .map(|rec| {
            Ok(VerifyRow {
                suite: rec[0].to_string(),
                case: rec[1].to_string(),
                value: parse_real(&rec[2])?,
                limit: parse_real(&rec[3])?,
                pass: rec[4].parse().map_err(|_| CliError::config(format!("`{}` is not a bool", &rec[4])))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.0, -0.0, 1.0, 1.0 / 3.0, std::f64::consts::PI, 1e-300, 5e-324, f64::MAX, -2.5e17] {
            assert_eq!(parse_real(&fmt_real(x)).unwrap().to_bits(), x.to_bits(), "{x}");
        }
        assert!(parse_real(&fmt_real(f64::NAN)).unwrap().is_nan());
        assert_eq!(fmt_real(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn convergence_round_trip() {
        let recs = vec![
            ConvergenceRecord {
                m: 8,
                n: 4,
                error_to_reference: 0.1,
                residual_norm: 1.0 / 7.0,
                solution_norm: 2.0,
                sigma_min: 0.7,
                failure: None,
            },
            ConvergenceRecord::failed(16, 8, "singular".into()),
        ];
        let mut buf = Vec::new();
        write_convergence(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("m,n,error,residual,solution_norm,sigma_min\n"));
        assert!(text.contains("16,8,NaN,NaN,NaN,NaN"));
        let back = read_convergence(buf.as_slice()).unwrap();
        for (a, b) in back.iter().zip(&recs) {
            assert!(a.same_bits(&ConvergenceRow::from(b)));
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(read_convergence("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_solution("index,coefficient\n2,1.0\n".as_bytes()).is_err());
    }
}
