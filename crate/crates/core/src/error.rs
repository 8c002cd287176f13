use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inconsistent grid, parameter out of range, or mismatched shapes.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the domain of an operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The surface curl of the good unknown exceeds the admissibility tolerance.
    #[error("constraint violation: curl residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    ConstraintViolation { residual: f64, tolerance: f64 },

    /// An iterative solve did not reach its residual target.
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    /// Not enough samples to answer the query.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Non-finite values appeared during time stepping.
    #[error("blow-up at t = {t}: {what} is {value}")]
    BlowUp { t: f64, what: String, value: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
