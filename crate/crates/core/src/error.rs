use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the simulation suite.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a constraint.
    #[error("configuration error: {0}")]
    Config(String),

    /// A function argument is outside its domain.
    #[error("argument error: {0}")]
    Argument(String),

    /// A filter cannot be designed from the requested band.
    #[error("filter design error: {0}")]
    Design(String),

    /// A run file does not conform to the CSV schema.
    #[error("format error in {path} (row {row}): {message}")]
    Format { path: PathBuf, row: usize, message: String },

    /// Dataset generation could not proceed.
    #[error("dataset generation error: {0}")]
    Generation(String),

    /// A dataset file does not match its manifest.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure_arg {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::Argument(format!($($fmt)+)));
        }
    };
}

pub(crate) use ensure_arg;
