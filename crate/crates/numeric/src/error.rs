use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("data error: {0}")]
    Data(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("curve is not imbedded: {0}")]
    NotImbedded(String),
    #[error("framing error: {0}")]
    Framing(String),
    #[error("connection check failed: {0}")]
    Connection(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NumericError>;
