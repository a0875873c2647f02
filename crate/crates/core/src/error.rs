use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A real value does not fit the fixed-point range.
    #[error("range error: {0}")]
    Range(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Replicated components that should agree did not.
    #[error("share consistency check failed: {0}")]
    Consistency(String),

    #[error("communication error: {0}")]
    Communication(String),

    /// A peer sent something the protocol does not allow (bad handshake,
    /// unexpected frame type, round counter mismatch).
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("format error: {0}")]
    Format(String),

    /// Malformed or non-conforming input data.
    #[error("data error: {0}")]
    Data(String),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Range(_) => 1,
            Error::Consistency(_) | Error::Communication(_) | Error::Protocol(_) => 2,
            Error::Format(_) | Error::Data(_) | Error::Io(_) => 3,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Data(e.to_string())
    }
}
