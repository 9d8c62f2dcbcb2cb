use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum OpError {
    #[error("space mismatch in {context}: expected `{expected}`, found `{found}`")]
    TagMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("material law is not well-posed: {0}")]
    NotWellPosed(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("singular {what} (reciprocal condition estimate {rcond:e})")]
    Singular { what: String, rcond: f64 },
}

pub type Result<T> = std::result::Result<T, OpError>;
