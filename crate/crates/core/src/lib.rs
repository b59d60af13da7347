//! Multirate PWM balance simulation of switch-mode power converters.
//!
//! The crate is organised bottom-up:
//!
//! - [`basis`]: duty-cycle-aware PWM basis functions on the unit period, the
//!   Galerkin matrices they induce and the PWM eigenfunctions that diagonalize
//!   the time-derivative coupling.
//! - [`dae`]: linear descriptor systems `A x' + B x = c(t)`, a variable-step
//!   BDF integrator over real or complex scalars, consistent initialization and
//!   the switch-restarting reference solver.
//! - [`mpde`]: the Galerkin-reduced multirate system, in coupled Kronecker form
//!   and in decoupled eigen form, plus reconstruction along the diagonal.
//! - [`models`]: buck converter test systems (lumped and field-circuit coupled
//!   with a planar magnetoquasistatic FEM inductor) and eddy-current losses.

// `!(x > y)` checks deliberately reject NaN parameters too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod dae;
pub mod error;
pub mod models;
pub mod mpde;
pub mod scalar;
pub mod sparse;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use scalar::Scalar;
