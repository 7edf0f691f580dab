use thiserror::Error;

/// Broad classification of failures, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Validation,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown level `{level}` for variable `{variable}`")]
    UnknownLevel { variable: String, level: String },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("vertex index {index} out of range for stratum {stratum} (size {size})")]
    VertexOutOfRange {
        stratum: usize,
        index: usize,
        size: usize,
    },

    #[error("unknown stage `{stage}` in stratum {stratum}")]
    UnknownStage { stratum: usize, stage: String },

    #[error("invalid staging: {0}")]
    InvalidStaging(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model document: {0}")]
    Schema(String),

    #[error("model is not fitted")]
    NotFitted,

    #[error("models are not compatible: {0}")]
    Incompatible(String),

    #[error("models are not nested: {0}")]
    NotNested(String),

    #[error("zero-count floret in stratum {stratum}, stage `{stage}` (use lambda > 0 or join unobserved)")]
    ZeroFloret { stratum: usize, stage: String },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io(_) => ErrorKind::Io,
            Error::ZeroFloret { .. } | Error::Numeric(_) => ErrorKind::Numeric,
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
