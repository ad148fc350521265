use std::path::PathBuf;

use thiserror::Error;

use crate::engine::TimeStepRecord;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("non-finite numeric input: {0}")]
    NumericInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid system size: {0}")]
    InvalidSize(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid block mask: {0}")]
    InvalidMask(String),

    #[error("observable is not Hermitian: {0}")]
    NonHermitian(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("comparison error: {0}")]
    Comparison(String),

    #[error("run aborted after {} completed steps: {source}", .completed.len())]
    PartialRun {
        completed: Vec<TimeStepRecord>,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
