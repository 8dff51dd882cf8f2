use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid language code {0:?}")]
    InvalidLangCode(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("unknown document id {0:?}")]
    UnknownId(String),

    #[error("embedding format error: {0}")]
    Format(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("embedding for {id:?} has norm {norm} outside the unit tolerance")]
    Norm { id: String, norm: f64 },

    #[error("embedding for {0:?} contains a non-finite value")]
    NonFinite(String),

    #[error("document {0:?} has no embedding")]
    MissingEmbedding(String),

    #[error("query {query:?} and target share language {lang}")]
    SameLanguage { query: String, lang: String },

    #[error("duplicate edge between {0:?} and {1:?}")]
    DuplicateEdge(String, String),

    #[error("pair {0:?} / {1:?} is both direct and induced")]
    PairOverlap(String, String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("all pair counts are zero")]
    EmptyCounts,

    #[error("no samples available for language pair ({0}, {1})")]
    EmptyPool(String, String),

    #[error("language {0:?} has no training text")]
    EmptyLanguage(String),

    #[error("missing reference ids: {0:?}")]
    MissingReferences(Vec<String>),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
