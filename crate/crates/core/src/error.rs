use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("target column '{0}' not found")]
    MissingTarget(String),

    #[error("target column '{column}' is not numeric (row {row})")]
    NonNumericTarget { column: String, row: usize },

    #[error("column '{0}' is categorical but categorical policy is 'reject'")]
    CategoricalRejected(String),

    #[error("no rows left after cleaning")]
    EmptyDataset,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("split produced an empty partition")]
    EmptyPartition,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("model file is corrupt or has an unsupported format: {0}")]
    BadModelFile(String),

    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("division by zero mean in relative score")]
    ZeroMeanScore,

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
