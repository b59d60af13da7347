use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duty cycle {0} must lie in the open interval (0, 1)")]
    DutyCycle(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Gram-Schmidt candidate {index} is numerically dependent (norm {norm:e})")]
    DegenerateBasis { index: usize, norm: f64 },

    #[error("Galerkin identity matrix deviates from Ts*I by {deviation:e}; basis is not orthonormal")]
    InconsistentGalerkin { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular matrix in {context}")]
    Singular { context: String },

    #[error("consistent initialization failed: {0}")]
    Consistency(String),

    #[error("model structure rejected: {0}")]
    Structure(String),

    #[error("step size {step:e} fell below the minimum {min_step:e} at t = {t:e}")]
    StepUnderflow { t: f64, step: f64, min_step: f64 },

    #[error("non-finite state encountered at t = {0:e}")]
    NonFinite(f64),

    #[error("reconstruction has imaginary residual {residual:e} at t = {t:e}")]
    ImaginaryResidual { t: f64, residual: f64 },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("time {t:e} outside trajectory span [{start:e}, {end:e}]")]
    OutOfSpan { t: f64, start: f64, end: f64 },
}
