use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid reference identifier: {0:?}")]
    InvalidReference(String),

    #[error("invalid recruitment field code: {0:?}")]
    InvalidRFCode(String),

    #[error("academic discipline level requested without an AD code")]
    MissingAD,

    #[error("{path}:{line}: {message}")]
    Schema { path: String, line: u64, message: String },

    #[error("duplicate record_id {0:?}")]
    DuplicateRecordId(String),

    #[error("duplicate auid {0:?}")]
    DuplicateAuid(String),

    #[error("duplicate gold entry ({record_id}, {auid})")]
    DuplicateGoldPair { record_id: String, auid: String },

    #[error("dangling {kind} {id:?} referenced from {context}")]
    Dangling {
        kind: &'static str,
        id: String,
        context: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dense solve refused: n = {n} exceeds cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("node {0:?} is not in the co-authorship graph")]
    NodeNotFound(String),

    #[error("no JSON object found in model output")]
    NoJsonFound,

    #[error("verdict is missing field {0:?}")]
    MissingField(&'static str),

    #[error("invalid match value {0:?} (expected \"yes\" or \"no\")")]
    InvalidMatchValue(String),

    #[error("endpoint error: {0}")]
    Endpoint(String),

    #[error("missing prerequisite: {0}")]
    Prerequisite(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("invalid parameters: {0}")]
    Param(String),

    #[error("corpus cache file {path:?} is malformed: {message}")]
    Cache { path: PathBuf, message: String },

    #[error("{path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

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

    pub(crate) fn schema(path: &str, line: u64, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }

    /// True for failures that originate at the LLM endpoint rather than in the data.
    pub fn is_endpoint(&self) -> bool {
        matches!(self, Error::Endpoint(_))
    }
}
