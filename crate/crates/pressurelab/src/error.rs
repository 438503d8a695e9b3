use thiserror::Error;

/// Library error type.
///
/// The CLI maps variants to exit codes: input and I/O problems are usage
/// errors (1), violated mathematical preconditions and degeneracies are 2,
/// and size-guard refusals are 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("unsupported mode: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("failed to converge: {0}")]
    Convergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
