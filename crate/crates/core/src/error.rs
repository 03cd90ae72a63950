use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("vocabulary error: {0}")]
    Vocabulary(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("fold-in error: {0}")]
    FoldIn(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("non-finite parameter at round {round} while training on triple {triple}")]
    NonFinite { round: usize, triple: String },

    #[error("input error: {0}")]
    Input(String),

    #[error("feature error: {0}")]
    Feature(String),

    #[error("compatibility error: {0}")]
    Compatibility(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
