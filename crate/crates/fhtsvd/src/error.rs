use thiserror::Error;

/// Errors produced while building surface data or running the spectral pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid endpoints: {0}")]
    InvalidEndpoints(String),

    #[error("evaluation on a branch cut requires a shore tag")]
    MissingShore,

    #[error("point outside the operation's domain: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureDiverged(String),

    #[error("matrix is singular or near-singular: {0}")]
    SingularMatrix(String),

    #[error("Im tau is not positive definite; orientation of the B cycles is wrong")]
    TauNotPositive,

    #[error("zero count of P_{j} does not match the gap structure")]
    ZeroCountMismatch { j: usize },

    #[error("real line indicator has imaginary residual {residual:.3e}; characteristic phase is wrong")]
    IndicatorNotReal { residual: f64 },

    #[error("window count {count} outside [{lo}, {hi}] after refinement")]
    CountBoundViolation { count: usize, lo: usize, hi: usize },

    #[error("divisor solve for index {n} stagnated at residual {residual:.3e}")]
    DivisorStagnation { n: usize, residual: f64 },

    #[error("both norm constants vanish; divisor is wrong")]
    DegenerateNormConstants,

    #[error("oracle eigensolve failed: {0}")]
    OracleFailure(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
