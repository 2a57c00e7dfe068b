use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: invalid record: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("sample `{id}`: {message}")]
    InvalidSample { id: String, message: String },

    #[error("duplicate sample id `{0}`")]
    DuplicateId(String),

    #[error("invalid split ratios {ratios:?}: {message}")]
    SplitRatios { ratios: [f64; 3], message: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("chart `{id}` exceeds encoding bounds: {message}")]
    OutOfBounds { id: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("token id {id} out of vocabulary of size {size}")]
    TokenOutOfVocab { id: usize, size: usize },

    #[error("sequence length {len} exceeds configured maximum {max} ({what})")]
    LengthOverflow {
        what: &'static str,
        len: usize,
        max: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged at epoch {epoch}, step {step}: {message}")]
    Divergence {
        epoch: usize,
        step: usize,
        message: String,
    },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("checkpoint version mismatch: expected magic {expected:?}, found {found:?}")]
    CheckpointVersion { expected: String, found: String },

    #[error("vocabulary hash mismatch: checkpoint has {checkpoint}, vocabulary file has {vocab}")]
    VocabMismatch { checkpoint: String, vocab: String },

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
