use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole of the gamma function at z = {0}")]
    Pole(f64),
    #[error("series did not converge within {terms} terms (last term {last_term:e})")]
    NonConvergence { terms: usize, last_term: f64 },
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("coupling nu = {nu} outside the admissible range: {reason}")]
    CouplingOutOfRange { nu: f64, reason: String },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("profile does not vanish at the grid ends: {0}")]
    SupportViolation(String),
    #[error("truncation error: tail fraction {tail:e} exceeds {limit:e} ({side})")]
    Truncation { tail: f64, limit: f64, side: String },
    #[error("nonzero radial channel: {0}")]
    NonzeroRadialChannel(String),
    #[error("input is not Dirac-radial: {0}")]
    NonRadial(String),
    #[error("kernel not in L^{p}")]
    KernelNotInLp { p: f64 },
    #[error("Picard iteration failed to contract: factors {factors:?}")]
    NonContraction { factors: Vec<f64> },
    #[error("serialization: {0}")]
    Serialization(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
