use std::path::PathBuf;

/// Errors surfaced by the library. Contract violations (shape mismatches,
/// out-of-range indices, over-length inputs) panic instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),

    #[error("insufficient lexicon: {0}")]
    InsufficientLexicon(String),

    #[error("novel-token capacity exhausted: {requested} requested, {available} reserved slots free")]
    CapacityExhausted { requested: usize, available: usize },

    #[error("token {0} is not a reserved novel-token slot")]
    NotNovel(usize),

    #[error("non-finite loss during {context} at step {step}")]
    Divergence { context: String, step: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("checkpoint version mismatch: file has version {found}, this build reads version {expected}")]
    Version { found: u32, expected: u32 },

    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),

    #[error("missing input file: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput(path)
        } else {
            Error::Io { path, source }
        }
    }
}
