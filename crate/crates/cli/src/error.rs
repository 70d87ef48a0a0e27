use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const IO: i32 = 4;
    pub const DOMAIN: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] finsec_core::Error),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use finsec_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::InvalidInput(_)) => exit::CONFIG,
            CliError::Core(
                E::RankDeficient { .. } | E::NonFiniteValue { .. } | E::InverseNotConverged { .. } | E::TooManyMinors { .. },
            ) => exit::NUMERICAL,
            CliError::Core(_) => exit::DOMAIN,
            CliError::Io { .. } | CliError::Csv(_) => exit::IO,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
