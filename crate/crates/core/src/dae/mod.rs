//! Linear descriptor systems and their time integration.

mod init;
mod integrator;
mod switching;
mod system;
mod trajectory;

pub use init::{consistent_init, ConsistentInitializer, ConsistentState, VariableSplit};
pub use integrator::{IntegrationStats, Integrator, SolverConfig};
pub use switching::{integrate_with_switching, SwitchedSolution};
pub use system::{DescriptorSystem, LinearDae, PulsedSource, Waveform};
pub use trajectory::{StateHistory, Trajectory, TrajectoryPiece};
