//! PWM basis functions, their Galerkin matrices and the PWM eigenfunctions.

mod poly;
mod pwm;
mod spectral;

pub use poly::PiecewisePolynomial;
pub use pwm::{relative_time, GalerkinMatrices, PwmBasis};
pub use spectral::{hermitian_jacobi, SpectralBasis};
