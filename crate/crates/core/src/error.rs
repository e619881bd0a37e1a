use std::io;

use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text, with 1-based line and column.
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    /// Well-formed input that violates a semantic rule.
    #[error("{0}")]
    Validation(String),

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error("operator has zero norm")]
    ZeroNorm,

    /// Binary file with a bad magic number, version or truncated payload.
    #[error("bad file format: {0}")]
    Format(String),

    #[error("increment {increment}, scan {scan}: {source}")]
    Propagation {
        increment: usize,
        scan: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Syntax { line, col, msg: msg.into() }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
