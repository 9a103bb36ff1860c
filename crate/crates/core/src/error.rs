use thiserror::Error;

use crate::rules::{ParseError, TriggerRef};
use crate::similarity::EmbeddingError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    InvalidConfig(#[from] ParseError),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("embeddings are still being computed")]
    Pending,
    #[error("empty reference: the should-filter collection has no posts")]
    EmptyReference,
    #[error("empty collection")]
    EmptyCollection,
    #[error("empty distribution: no posts are filtered")]
    EmptyDistribution,
    #[error("no configuration applied")]
    NoConfig,
    #[error("unknown post id `{0}`")]
    UnknownPost(String),
    #[error("trigger {0} does not exist in the current configuration")]
    InvalidTrigger(TriggerRef),
    #[error("unknown {what} `{value}`")]
    BadArgument { what: &'static str, value: String },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invalid JSON: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
