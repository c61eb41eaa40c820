//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration struct violated one of its invariants.
    #[error("invalid configuration: field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    /// Data failed structural validation (bad label, chronology gap, ...).
    #[error("validation failed: {0}")]
    Validation(String),

    /// A container file is malformed.
    #[error("bad container format: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// A function argument contract was broken (dimension mismatch, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An operation needing both labels saw only one.
    #[error("stratification failed: {0}")]
    Stratification(String),

    /// An operation precondition was not met (input too short, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
