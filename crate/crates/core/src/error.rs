use std::path::PathBuf;

use crate::llm::LlmError;
use crate::retriever::RetrievalResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unsupported feature: {feature}")]
    Unsupported { line: usize, feature: String },

    #[error("{kind} not found: {id}")]
    NotFound { kind: &'static str, id: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("walk has no steps")]
    EmptyWalk,

    #[error("corpus was built for graph {expected} but the graph is {found}; run a full build")]
    StaleCorpus { expected: String, found: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index is empty")]
    EmptyIndex,

    #[error("conflicting verbalization for walk `{0}`")]
    CacheConflict(String),

    #[error("no records to aggregate")]
    EmptyReport,

    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("invalid artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },

    #[error("artifact directory is locked by another invocation ({0}); remove the lock file if no other process is running")]
    Locked(PathBuf),

    #[error(transparent)]
    Llm(#[from] LlmError),

    #[error("verbalization aborted after {completed} completed walks: {source}")]
    Verbalization { completed: usize, source: LlmError },

    #[error("answer generation failed: {source}")]
    Answer { source: LlmError, retrieval: Box<RetrievalResult> },

    #[error("embedder: {0}")]
    Embedder(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn node_not_found(id: impl Into<String>) -> Self {
        Error::NotFound { kind: "node", id: id.into() }
    }

    /// Process exit code: 1 usage, 2 data, 3 external service.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::InvalidConfig(_) => 1,
            Error::Llm(_) | Error::Verbalization { .. } | Error::Answer { .. } | Error::Embedder(_) => 3,
            _ => 2,
        }
    }
}
