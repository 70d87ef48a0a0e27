use thiserror::Error;

/// Errors produced by the numerical kernels and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is numerically rank deficient (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("basis index {0} out of range (indices start at 1)")]
    IndexOutOfRange(usize),

    #[error("non-finite value encountered at s = {at}")]
    NonFiniteValue { at: f64 },

    #[error("inverse map did not converge at t = {at}")]
    InverseNotConverged { at: f64 },

    #[error("invalid diffeomorphism: {0}")]
    InvalidDiffeomorphism(String),

    #[error("minor enumeration needs {count} subsets, limit is {limit}")]
    TooManyMinors { count: u128, limit: u128 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
