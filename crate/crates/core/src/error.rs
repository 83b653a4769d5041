use thiserror::Error;

/// Errors produced by every stage of the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsatError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// A transfer matrix mapped its inputs to the zero vector.
    #[error("degenerate instance: transfer output vanished for clause {clause}")]
    DegenerateInstance { clause: usize },

    /// Continuation stalled; `t` is the last path parameter reached.
    #[error("path tracking failed at t = {t}")]
    PathFailure { t: f64 },

    #[error("ideal is not zero-dimensional")]
    NotZeroDimensional,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),

    /// An algorithmic invariant was violated at runtime.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl From<std::io::Error> for QsatError {
    fn from(e: std::io::Error) -> Self {
        QsatError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for QsatError {
    fn from(e: serde_json::Error) -> Self {
        QsatError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QsatError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(QsatError::InvalidParameters(msg.into()))
}
