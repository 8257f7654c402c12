//! Error taxonomy shared by every command, mapped onto the documented exit
//! codes: 1 for usage problems, 2 for bad or missing data, 3 for internal
//! invariant violations.

use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum PipelineError {
    /// Caller misuse: bad flags, malformed config, impossible requests.
    Usage(String),
    /// Input files that are missing, unreadable, or violate a contract.
    Data(String),
    /// Broken internal invariants; always a bug.
    Internal(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Internal(_) => 3,
        }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(msg) => write!(f, "usage error: {msg}"),
            Self::Data(msg) => write!(f, "data error: {msg}"),
            Self::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for PipelineError {}

pub type Result<T> = std::result::Result<T, PipelineError>;

pub fn usage(msg: impl Into<String>) -> PipelineError {
    PipelineError::Usage(msg.into())
}

pub fn data(msg: impl Into<String>) -> PipelineError {
    PipelineError::Data(msg.into())
}

pub fn internal(msg: impl Into<String>) -> PipelineError {
    PipelineError::Internal(msg.into())
}

/// Wraps an I/O failure with the path it concerns.
pub fn io_data(path: &Path, err: std::io::Error) -> PipelineError {
    PipelineError::Data(format!("{}: {err}", path.display()))
}
