//! Scalar field abstraction shared by real and complex solves.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Field over which descriptor systems are integrated.
///
/// Implemented for `f64` and [`Complex64`]. Every operation used by the
/// integrator commutes with complex conjugation, so a complex system and its
/// conjugate produce conjugate trajectories under the same step sequence.
pub trait Scalar:
    faer::traits::ComplexField
    + Copy
    + Debug
    + Default
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Mul<f64, Output = Self>
{
    const IS_COMPLEX: bool;

    fn from_real(x: f64) -> Self;
    fn from_complex(z: Complex64) -> Option<Self>;
    fn to_complex(self) -> Complex64;
    fn modulus(self) -> f64;
    fn conjugate(self) -> Self;
    fn real_part(self) -> f64;
    fn imag_part(self) -> f64;

    fn zero() -> Self {
        Self::from_real(0.0)
    }

    fn is_finite_value(self) -> bool {
        self.real_part().is_finite() && self.imag_part().is_finite()
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn from_real(x: f64) -> Self {
        x
    }
    fn from_complex(z: Complex64) -> Option<Self> {
        (z.im == 0.0).then_some(z.re)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conjugate(self) -> Self {
        self
    }
    fn real_part(self) -> f64 {
        self
    }
    fn imag_part(self) -> f64 {
        0.0
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_complex(z: Complex64) -> Option<Self> {
        Some(z)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conjugate(self) -> Self {
        self.conj()
    }
    fn real_part(self) -> f64 {
        self.re
    }
    fn imag_part(self) -> f64 {
        self.im
    }
}
