use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("dimension mismatch: n = {left} vs n = {right}")]
    ContextMismatch { left: u32, right: u32 },
    #[error("operation requires an algebra-valued expression")]
    NotAlgebraValued,
    #[error("operation requires a scalar (traced) expression")]
    NotScalar,
    #[error("unsupported expression: {0}")]
    UnsupportedExpression(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("interaction term vanishes identically: {0}")]
    VanishingInteraction(String),
    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

pub type Result<T> = std::result::Result<T, CoreError>;
