use thiserror::Error;

use crate::solver::SolverFailure;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands with incompatible dimension, depth, target size or grid.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A tensor shape outside the supported `d <= 4`, `N <= 6` range.
    #[error("shape limit exceeded: {0}")]
    ShapeLimit(String),

    /// A violated precondition that is not a shape problem.
    #[error("{0}")]
    Usage(String),

    #[error("index {index} out of range for a grid of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("element is not group-like: level 0 is {0}, expected 1")]
    NotGroupLike(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Numerical breakdown outside the solver (non-finite values and the like).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Picard solver failure, carrying the trace and any partial solution.
    #[error("{}", .0.message)]
    Solver(Box<SolverFailure>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
