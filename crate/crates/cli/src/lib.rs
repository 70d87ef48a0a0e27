//! Command-line driver for finite-section experiments.
//!
//! Exit statuses: 0 success, 1 a verification check failed, 2 bad
//! configuration, 3 numerical failure, 4 I/O failure, 5 domain error.

pub mod commands;
pub mod config;
pub mod csv_io;
pub mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::Sink;
use crate::config::{ExperimentConfig, Settings};
pub use crate::error::{exit, CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "finsec", version, about = "Rectangular finite-section solvers for composition operators")]
pub struct Cli {
    /// TOML file with default settings; command-line flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the m x n section of the matrix representation as CSV
    Represent(Settings),
    /// Solve one finite section and write its coefficients
    Solve(Settings),
    /// Run a convergence sweep over a schedule of section sizes
    Converge(Settings),
    /// Run verification suites; exits 1 if any check fails
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// det-theorem, pythagoras, norm-bounds, schur, column-tails or all
    pub suite: String,
    #[command(flatten)]
    pub settings: Settings,
}

impl Cli {
    fn settings(&self) -> &Settings {
        match &self.command {
            Command::Represent(s) | Command::Solve(s) | Command::Converge(s) => s,
            Command::Verify(v) => &v.settings,
        }
    }

    /// Flags merged over the config file, if any.
    pub fn resolved_settings(&self) -> Result<Settings> {
        let base = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        Ok(self.settings().clone().over(base))
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let cfg = ExperimentConfig::from_settings(&cli.resolved_settings()?)?;
    let mut sink = Sink { stdout, stderr };
    match &cli.command {
        Command::Represent(_) => commands::represent(&cfg, &mut sink),
        Command::Solve(_) => commands::solve(&cfg, &mut sink),
        Command::Converge(_) => commands::converge(&cfg, &mut sink),
        Command::Verify(v) => commands::verify(&v.suite, &cfg, &mut sink),
    }
}

/// Parses `args`, runs, reports errors on `stderr` and returns the exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
