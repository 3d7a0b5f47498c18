//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("rational literal `{0}` is malformed")]
    ParseRat(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("element {id} outside universe of size {universe}")]
    ElementOutOfRange { id: usize, universe: usize },

    #[error("cannot contract a dependent set")]
    DependentContraction,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),

    #[error("cutting-plane iteration cap reached after {0} rounds")]
    IterationCap(usize),

    /// An internal exactness guarantee failed. These signal bugs, never
    /// bad user input.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("solver contract breach: {0}")]
    SolverContract(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
