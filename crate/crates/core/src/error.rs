use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("functions are defined on different grids")]
    GridMismatch,

    #[error("degenerate function: {0}")]
    DegenerateFunction(String),

    #[error("numerical instability at raising step {step}: {detail}")]
    Instability { step: usize, detail: String },

    #[error("eigensolver failed for level {level} after {iterations} iterations (residual {residual:e})")]
    Solver {
        level: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("seed fails eigen-residual validation: residual {residual:e} exceeds {tolerance:e}")]
    InvalidSeed { residual: f64, tolerance: f64 },

    #[error("degenerate seed: {0}")]
    DegenerateSeed(String),

    #[error("equal factorization energies ({0}); use the confluent transform")]
    WrongAlgorithm(f64),

    #[error("seeds are proportional; their Wronskian vanishes identically")]
    DegenerateWronskian,

    #[error("operation requires a non-confluent transform")]
    WrongMode,

    #[error("no regular subdomain: {0}")]
    NoRegularSubdomain(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
