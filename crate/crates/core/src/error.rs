use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("index out of bounds: {0}")]
    Bounds(String),

    #[error("empty sentence")]
    EmptySentence,

    #[error("line count mismatch at line {line}")]
    LineCountMismatch { line: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("model was trained with feature config {model}, but config {config} was supplied")]
    FingerprintMismatch { model: String, config: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no translation for token {position} ({token})")]
    Untranslatable { token: String, position: usize },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
