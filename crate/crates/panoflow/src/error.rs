//! Error type shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition of an operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed file contents (bad magic, bad dimensions, corrupt payload).
    #[error("format error: {0}")]
    Format(String),

    /// Underlying I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A numeric procedure failed to converge or left its valid domain.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A keyed resource (e.g. a precomputed flow file) was not found.
    #[error("lookup error: {0}")]
    Lookup(String),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 3 contract, 4 format, 5 I/O, 6 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Contract(_) => 3,
            Error::Format(_) => 4,
            Error::Io { .. } | Error::Lookup(_) => 5,
            Error::Numeric(_) => 6,
        }
    }
}
