use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested state needs more Fock levels than the hard cap allows.
    #[error("truncation overflow: state needs n_max > {cap}")]
    TruncationOverflow { cap: usize },

    #[error("divergent quantity: {0}")]
    Divergence(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("certification failed: {0}")]
    CertificationFailed(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Process exit status for the CLI: 2 for certification failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CertificationFailed(_) => 2,
            _ => 1,
        }
    }
}
