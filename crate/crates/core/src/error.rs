use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("step limit of {0} exceeded")]
    StepLimitExceeded(usize),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("step size underflow at s = {0}")]
    StepSizeUnderflow(f64),
    #[error("jacobian is singular (condition estimate {0:e})")]
    Singular(f64),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("at least 3 points are required, got {0}")]
    InsufficientPoints(usize),
    #[error("non-positive value {value} at x = {x}")]
    NonPositiveValue { x: f64, value: f64 },
    #[error("coincident points (gap {0:e})")]
    CoincidentPoints(f64),
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("range violation: {0}")]
    RangeViolation(String),
    #[error("point on the boundary or coincident with the pole")]
    BoundaryOrCoincident,
    #[error("trial function has zero Dirichlet energy")]
    ZeroDirichletEnergy,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
