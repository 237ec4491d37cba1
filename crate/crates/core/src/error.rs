use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
///
/// Variants are grouped by recovery class: bad caller input
/// (`InvalidArgument`), malformed data on disk (`Format`, `Io`), and
/// numerical/stochastic failures (`Estimation`, `SamplingExhausted`,
/// `ChainState`, `Training`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("sampling budget of {attempts} attempts exhausted: accepted {accepted} of {requested} samples")]
    SamplingExhausted {
        attempts: u64,
        accepted: u64,
        requested: u64,
    },

    #[error("chain state error: {0}")]
    ChainState(String),

    #[error("training error: {0}")]
    Training(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
