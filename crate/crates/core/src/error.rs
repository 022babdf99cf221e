use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient data for class {class}: needed {needed}, available {available}")]
    InsufficientData {
        class: String,
        needed: usize,
        available: usize,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("vocabulary is empty after min_count filtering")]
    EmptyVocabulary,

    #[error("document has no representable tokens")]
    NoRepresentableTokens,

    #[error("dimension mismatch for document {doc_id}: expected {expected}, found {found}")]
    VectorDimensionMismatch {
        doc_id: String,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: expected width {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("missing document {0}")]
    MissingDocument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("requested rank {requested} exceeds min(n, p) = {max}")]
    RankTooLarge { requested: usize, max: usize },

    #[error("training labels contain a single class")]
    DegenerateLabels,

    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("label and prediction lengths differ: {labels} vs {predictions}")]
    LengthMismatch { labels: usize, predictions: usize },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("too few samples: {n} samples for {k} folds")]
    TooFewSamples { n: usize, k: usize },

    #[error("fold {fold}: {message}")]
    Fold { fold: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
