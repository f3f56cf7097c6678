use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Two tensors (or a tensor and an expected form) do not fit together.
    #[error("{op}: incompatible shapes {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    /// An operation was called outside its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A token id or event name fell outside the vocabulary.
    #[error("vocabulary error: {0}")]
    Vocab(String),

    /// A corpus record could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A record parsed but violated the corpus schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// An invalid model or run configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A checkpoint file is missing, corrupt, or incompatible.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// Training produced a non-finite loss.
    #[error("training diverged: non-finite loss in batch {batch} of epoch {epoch}")]
    Diverged { epoch: usize, batch: usize },

    /// Bad command-line usage; maps to exit code 2.
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Self {
        Error::ShapeMismatch {
            op,
            lhs: lhs.to_vec(),
            rhs: rhs.to_vec(),
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
