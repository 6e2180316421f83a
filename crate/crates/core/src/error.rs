use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate encoder: message vector of user {user} is zero or unreachable")]
    DegenerateEncoder { user: u8 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error(
        "alpha = {alpha} is below sigma2^2/(sigma1^2+sigma2^2) = {threshold}; \
         the last-use message placement for user 2 is only optimal above this threshold"
    )]
    BelowThreshold { alpha: f64, threshold: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
