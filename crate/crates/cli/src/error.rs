use thiserror::Error;

/// A fixture syntax error at a 1-based line and column.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("{path}:{source}")]
    Fixture { path: String, source: ParseError },
    #[error(transparent)]
    Core(#[from] bf_core::CoreError),
    #[error(transparent)]
    Numeric(#[from] bf_numeric::NumericError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
