use thiserror::Error;

/// Errors raised by group computations, experiments and the run front end.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed user input: group files, words, out-of-range letters.
    #[error("invalid input: {0}")]
    Input(String),

    /// A well-formed call that violates an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// A configured resource limit was hit. `completed_radius` is the largest
    /// radius that was fully processed before the limit tripped, if any.
    #[error("resource limit reached: {message}")]
    Resource {
        message: String,
        completed_radius: Option<usize>,
    },

    /// A cache file failed validation.
    #[error("cache rejected: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
