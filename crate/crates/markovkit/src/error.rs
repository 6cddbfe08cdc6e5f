//! Crate-wide error type.

use thiserror::Error;

/// Unified error for construction, analysis, and file entry points.
#[derive(Debug, Error)]
pub enum Error {
    /// Two values built over different state spaces were combined.
    #[error("state space mismatch: {0}")]
    SpaceMismatch(String),

    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A row of a transition matrix is not a probability distribution.
    #[error("row {row} is not stochastic: {detail}")]
    NonStochasticRow { row: usize, detail: String },

    /// A linear system required by an algorithm has no unique solution.
    #[error("singular linear system: {0}")]
    SingularSystem(String),

    /// Floating-point results contradict the exact structure of the input.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// A trace chain was requested over a subset the chain can leave for good.
    #[error("subset is not almost-surely returning: {0}")]
    NonReturning(String),

    /// A unique limit was requested from a kernel with several ergodic classes.
    #[error("limit is ambiguous, kernel has {count} ergodic classes: {classes}")]
    AmbiguousLimit { count: usize, classes: String },

    /// Malformed or out-of-schema input file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
