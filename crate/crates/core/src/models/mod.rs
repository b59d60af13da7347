//! Buck converter test systems.

mod circuit;
mod fem;
mod mesh;

pub use circuit::{build_lumped, lumped_index, CircuitParams};
pub use fem::{build_coupled, coupled_index, eddy_losses, FemConfig, FemInductorModel, MU0};
pub use mesh::{Geometry, Mesh, Region};
