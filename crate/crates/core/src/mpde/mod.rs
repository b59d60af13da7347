//! The multirate system projected onto PWM basis functions in fast time.
//!
//! [`GalerkinSystem`] is the coupled form over the real PWM basis;
//! [`EigenSystem`] is the same system in the PWM eigenbasis, split into
//! independent complex blocks. The expansions rebuild `x(t)` along the
//! diagonal `t1 = t2 = t`.

mod eigen;
mod galerkin;
mod reconstruct;

pub use eigen::{DecoupledSubsystem, EigenSystem};
pub use galerkin::{initial_coeffs, CoefficientSolution, GalerkinSystem, InitStrategy};
pub use reconstruct::{PwmExpansion, SpectralExpansion, IMAGINARY_TOLERANCE};
