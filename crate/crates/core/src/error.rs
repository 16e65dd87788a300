use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("VAA result for user {user_id} lacks a {party} match")]
    MissingParty { user_id: String, party: &'static str },

    #[error("vocabulary is empty after applying minimum frequency {min_freq}")]
    EmptyVocabulary { min_freq: usize },

    #[error("sparsity {sparsity} drops every feature; use a higher sparsity value")]
    AllFeaturesDropped { sparsity: f64 },

    #[error("no document has at least two feature tokens")]
    NoQualifyingDocuments,

    #[error("co-occurrence matrix has rank {found} < {requested} anchors; use fewer topics")]
    RankDeficient { found: usize, requested: usize },

    #[error("both classes are required, found only {0}")]
    SingleClass(String),

    #[error("feature width mismatch: model expects {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("training diverged (loss is not finite); lower the learning rate")]
    Diverged,

    #[error("no users shared between text and network features")]
    EmptyIntersection,

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("class {0} is empty")]
    EmptyClass(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{0}")]
    Serde(#[from] serde_json::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(field: impl Into<String>, message: impl ToString) -> Self {
        Error::Config {
            field: field.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
