//! Crate-wide error type.

/// Errors surfaced by constructors, solvers and the trial harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Incompatible shapes (matrix/vector/partition lengths).
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Argument outside its mathematical domain (negative scale, k > N, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Gram matrix numerically rank-deficient; no stable factorization.
    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    /// Equality constraints admit no solution.
    #[error("infeasible system: {0}")]
    Infeasible(String),

    /// Linear program failed (unbounded, stalled, or over the size cap).
    #[error("linear program: {0}")]
    Lp(String),

    /// Invalid experiment or sweep configuration.
    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
