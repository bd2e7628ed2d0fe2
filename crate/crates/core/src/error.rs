use thiserror::Error;

use crate::operator::Subsystem;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Fock dimension {0}: a truncated mode needs at least 2 levels")]
    InvalidDimension(usize),

    #[error("atomic level {0} is outside {{0, 1, 2}}")]
    InvalidLevel(usize),

    #[error("cannot embed a {found}x{found} operator on {sub:?}, expected {expected}x{expected}")]
    Embedding {
        sub: Subsystem,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("no unique steady state (residual {residual:.3e})")]
    NoUniqueSteadyState { residual: f64 },

    #[error("iterative solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("step size underflow at t = {time} (h = {step:.3e}); system too stiff for the requested tolerances")]
    Stiffness { time: f64, step: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}

pub type Result<T> = std::result::Result<T, Error>;
