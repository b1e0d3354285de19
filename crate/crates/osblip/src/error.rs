use thiserror::Error;

/// Errors produced by moment computation, estimation and prediction.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code the CLI maps this error to: 2 for validation problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Unsupported(_) | Error::Format(_) | Error::Io(_) => 2,
            Error::QuadratureFailure(_) | Error::InvariantViolation(_) | Error::Numerical(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
