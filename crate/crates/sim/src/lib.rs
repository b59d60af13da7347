//! Simulation pipelines, error metrics and output for the `mpwm` tool.
//!
//! Three pipelines solve the same converter model: switch-restart time
//! stepping (`reference`), the coupled Galerkin system over the PWM basis
//! (`mpde-pwm`) and the decoupled eigen blocks (`pwm-balance`).

pub mod config;
pub mod error;
pub mod metrics;
pub mod output;
pub mod pipeline;
pub mod sweep;

pub use config::{ModelKind, PipelineKind, RunConfig};
pub use error::{SimError, SimResult};
pub use pipeline::{run_pipeline, RunOutput, RunReport, Solution};
