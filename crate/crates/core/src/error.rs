use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation failed numerically (NaN loss, non-positive denominator, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A feature column contained no observed values.
    #[error("column {0:?} has no observed values")]
    EmptyColumn(String),

    /// Tensor or matrix shape mismatch.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A required input artifact does not exist.
    #[error("missing input: {0}")]
    MissingInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
