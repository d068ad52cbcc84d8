use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A function was evaluated outside its domain (e.g. a kernel at t <= 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// A solver configuration violates a stability or width bound.
    #[error("configuration error: {0}")]
    Config(String),

    /// A least-squares fit could not be carried out or did not converge.
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// The requested ensemble does not fit in memory.
    #[error("cannot allocate ensemble of {n_paths} paths x {n_steps} steps ({bytes} bytes)")]
    Allocation {
        n_paths: usize,
        n_steps: usize,
        bytes: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
