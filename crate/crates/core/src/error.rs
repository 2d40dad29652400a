use thiserror::Error;

use crate::subproblem::SubproblemSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exhaustive routine was asked to work on a ground set it cannot enumerate.
    #[error("{what} refuses n = {n} (limit is {limit})")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    /// The simplex QP hit its iteration cap; `best` is the last iterate.
    #[error(
        "subproblem solver stopped after {iterations} iterations with kkt residual {residual:e}"
    )]
    Convergence {
        iterations: usize,
        residual: f64,
        best: Box<SubproblemSolution>,
    },

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
