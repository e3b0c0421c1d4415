use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {invariant} (witness: {witness})")]
    Validation { invariant: String, witness: String },

    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("ill-conditioned elimination: {0}")]
    IllConditioned(String),

    #[error("limit did not converge within the radius budget ({0})")]
    NonConvergence(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
