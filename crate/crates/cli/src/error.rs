//! Errors of the driver and their exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration; nothing was computed.
    #[error("config error: {0}")]
    Config(String),
    /// A computation failed.
    #[error(transparent)]
    Compute(#[from] dirac_coulomb::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// `2` for configuration errors, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
