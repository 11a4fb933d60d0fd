use thiserror::Error;

/// Errors raised by the simulation toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range (size {size})")]
    OutOfRange { index: usize, size: usize },

    #[error("non-finite value in input: {0}")]
    NonFinite(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("absolute continuity violated at index {0}: Q is zero where P is positive")]
    NotAbsolutelyContinuous(usize),

    #[error("irreversible transition {from} -> {to}: forward rate positive, backward rate zero")]
    Irreversible { from: usize, to: usize },

    #[error("quadrature did not converge: achieved error estimate {achieved:e} above tolerance {tol:e}")]
    NoConvergence { achieved: f64, tol: f64 },

    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),

    #[error("linear program infeasible: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
