use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow { path: String, line: usize, reason: String },

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("text contains no words")]
    EmptyText,

    #[error("need at least {needed} rows, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training data contains a single class")]
    SingleClassData,

    #[error("k = {k} is invalid for {n} training rows")]
    InvalidK { k: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training diverged at epoch {epoch} (loss is not finite)")]
    DivergenceDetected { epoch: usize },

    #[error("evaluation set is empty")]
    EmptyEvalSet,

    #[error("lexicon: {0}")]
    Lexicon(String),

    #[error("model file: {0}")]
    Persist(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
