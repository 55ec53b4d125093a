use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("argument {0} outside [-1, 1]")]
    Domain(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("post-selection filtered everything out (p = {0:e})")]
    FilteredToNothing(f64),
    #[error("dimension {0} exceeds the dense limit")]
    DimensionOverflow(usize),
    #[error("grouping failure: {0}")]
    Grouping(String),
}

impl Error {
    /// True for failures of an iterative solver as opposed to bad input.
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::NoConvergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
