//! Error type shared by the library and the CLI.
//!
//! The CLI maps variants to exit codes: configuration problems exit 2,
//! numerical failures exit 3, a failed compare threshold exits 4. I/O and
//! serialization problems exit 1.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration file or CLI arguments.
    #[error("configuration error: {0}")]
    Config(String),

    /// Structurally valid input rejected by a precondition.
    #[error("rejected input: {0}")]
    Input(String),

    /// Overflow, non-convergence, or numerical degeneracy.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An engine-comparison threshold was not met.
    #[error("threshold failure: {0}")]
    Threshold(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Input(_) => 2,
            Error::Numerical(_) => 3,
            Error::Threshold(_) => 4,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}
