use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("missing field {field} at line {line}")]
    MissingField { field: &'static str, line: usize },

    #[error("duplicate id {0}")]
    DuplicateId(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("cannot split: {0}")]
    CannotSplit(String),

    #[error("document {doc_id}: feature {feature}: {source}")]
    Feature {
        doc_id: String,
        feature: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite value in feature {feature} at row {row}")]
    NonFinite { feature: String, row: usize },

    #[error("training labels contain a single class ({0}); at least two are required")]
    SingleClass(String),

    #[error("feature arity mismatch: model expects {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("unknown label {0}")]
    UnknownLabel(String),

    #[error("ensemble has no trees")]
    Untrained,

    #[error("model file: {0}")]
    Model(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::MissingField { .. } => "missing_field",
            Error::DuplicateId(_) => "duplicate_id",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Empty(_) => "empty",
            Error::CannotSplit(_) => "cannot_split",
            Error::Feature { .. } => "feature",
            Error::NonFinite { .. } => "non_finite",
            Error::SingleClass(_) => "single_class",
            Error::Arity { .. } => "arity",
            Error::UnknownLabel(_) => "unknown_label",
            Error::Untrained => "untrained",
            Error::Model(_) => "model",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
