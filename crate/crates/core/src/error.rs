//! Error type shared across the library.

/// Errors produced by the optimizer, simulators, and I/O helpers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The kernel matrix could not be factorized even after escalating the
    /// diagonal jitter to its cap. Usually caused by duplicated points with
    /// incompatible observations.
    #[error("kernel matrix is singular (jitter escalated to {jitter:e})")]
    SingularKernel { jitter: f64 },

    /// A black-box objective evaluation returned a non-finite value.
    #[error("objective evaluation failed: {0}")]
    EvaluationFailure(String),

    /// A configuration file or configuration value could not be used.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
