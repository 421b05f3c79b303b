use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("boundary condition violated at x = {node}: {detail}")]
    BcViolation { node: f64, detail: String },

    #[error("infeasible problem data: {0}")]
    InfeasibleData(String),

    #[error(
        "active-set iteration did not converge within {max_iter} iterations \
         (last two active sets: {previous:?} then {current:?})"
    )]
    NoConvergence {
        max_iter: usize,
        previous: Vec<usize>,
        current: Vec<usize>,
    },

    #[error("{0} constrained DOFs exceed the brute-force enumeration limit of 16")]
    TooLarge(usize),

    #[error("solver failure at study level {level} ({elements} elements): {source}")]
    Solver {
        level: usize,
        elements: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("problem document: {0}")]
    Document(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
