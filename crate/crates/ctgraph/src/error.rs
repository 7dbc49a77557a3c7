use std::io;
use thiserror::Error;

/// Errors produced by the ctgraph library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("unknown entity `{0}`")]
    UnknownEntity(String),

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("entity id {0} out of range")]
    InvalidEntityId(u32),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("embedding table has no entry for `{0}`")]
    TableMiss(String),

    #[error("transport error after {attempts} attempt(s): {msg}")]
    Transport { attempts: u32, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
