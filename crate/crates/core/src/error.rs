use std::path::PathBuf;

use crate::optim::OptimError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("duplicate comment id `{id}` in thread `{thread_id}`")]
    DuplicateId { thread_id: String, id: String },

    #[error("lexicon file `{file}`: {message}")]
    Lexicon { file: String, message: String },

    #[error("vocabulary: {0}")]
    Vocabulary(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid label: {0}")]
    Label(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("model file: {0}")]
    ModelFile(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Optim(#[from] OptimError),

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
