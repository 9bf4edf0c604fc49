use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-physical state: {0}")]
    NonPhysicalState(String),
    #[error("matrix is not Hermitian: max |M - M^dagger| = {0:e}")]
    NotHermitian(f64),
    #[error("trace violation: trace = {0:e}")]
    TraceViolation(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("negative evolution time {0} s")]
    NegativeTime(f64),
    #[error("zero relaxation rate: {0}")]
    ZeroRate(&'static str),
    #[error("optimizer failed to converge: {0}")]
    OptimizerFailure(String),
    #[error("exponential fit diverged: {0}")]
    FitDivergence(String),
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),
    #[error("empty time series")]
    EmptySeries,
    #[error("inconsistent fits: consistency gap {gap:.3} exceeds threshold {threshold:.3}")]
    InconsistentFits { gap: f64, threshold: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
