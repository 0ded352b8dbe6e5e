use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the open interval where it is defined.
    #[error("parameter {value} is outside the open interval ({lower}, {upper})")]
    OutOfRange { value: f64, lower: f64, upper: f64 },

    /// The degree/multiplicity combination does not describe an isoparametric family.
    #[error("invalid isoparametric family: {0}")]
    InvalidFamily(String),

    /// The requested computation is not available for this configuration.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Evaluation at a pole of a rational function.
    #[error("pole of the ratio at y = {0}")]
    Pole(String),

    /// A numerical answer failed its re-verification.
    #[error("verification failed: {0}")]
    Verification(String),

    /// Finite-difference evaluation is ill-conditioned.
    #[error("discretization failure: {0}")]
    Discretization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
