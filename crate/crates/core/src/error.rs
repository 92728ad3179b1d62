use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: unknown label `{label}` for attribute `{attribute}`")]
    UnknownLabel {
        line: usize,
        attribute: String,
        label: String,
    },

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("unknown class `{0}`")]
    UnknownClass(String),

    #[error("class `{0}` has no training instances")]
    MissingClass(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("evaluator hash seed {0} collides with a controller classifier seed")]
    SeedCollision(u64),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
