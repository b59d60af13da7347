use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mpwm_core::dae::{LinearDae, PulsedSource, SolverConfig, Waveform};
use mpwm_core::models::{build_coupled, build_lumped, CircuitParams, FemConfig, FemInductorModel};
use mpwm_core::mpde::InitStrategy;

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    #[default]
    Lumped,
    Fem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineKind {
    /// Time stepping restarted at every switching instant.
    Reference,
    /// Coupled Galerkin system over the PWM basis.
    MpdePwm,
    /// Decoupled blocks over the PWM eigenfunctions.
    #[default]
    PwmBalance,
}

impl PipelineKind {
    pub fn name(self) -> &'static str {
        match self {
            PipelineKind::Reference => "reference",
            PipelineKind::MpdePwm => "mpde-pwm",
            PipelineKind::PwmBalance => "pwm-balance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    #[default]
    SteadyState,
    Naive,
}

impl From<InitKind> for InitStrategy {
    fn from(k: InitKind) -> Self {
        match k {
            InitKind::SteadyState => InitStrategy::SteadyState,
            InitKind::Naive => InitStrategy::Naive,
        }
    }
}

/// Everything needed to run one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub pipeline: PipelineKind,
    /// Highest PWM basis index `Np`.
    pub np: usize,
    pub duty: f64,
    /// Switching frequency in Hz.
    pub fs: f64,
    /// Pulse amplitude in volts.
    pub v0: f64,
    /// End of the simulation interval `[0, tend]`, seconds.
    pub tend: f64,
    pub abstol: f64,
    pub reltol: f64,
    pub max_order: usize,
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    pub init: InitKind,
    /// Worker threads for the decoupled blocks.
    pub threads: usize,
    /// Compare against a reference run at `reference_tol`.
    pub compare: bool,
    pub reference_tol: f64,
    /// Midpoints of the error quadrature.
    pub error_samples: usize,
    /// Uniform samples in the waveform and coefficient CSVs.
    pub output_samples: usize,
    /// State whose slow-time coefficients are written.
    pub coefficient_state: String,
    pub out: PathBuf,
    pub circuit: CircuitParams,
    pub fem: FemConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Lumped,
            pipeline: PipelineKind::PwmBalance,
            np: 4,
            duty: 0.5,
            fs: 1000.0,
            v0: 24.0,
            tend: 10e-3,
            abstol: 1e-7,
            reltol: 1e-7,
            max_order: 2,
            initial_step: None,
            max_step: None,
            init: InitKind::SteadyState,
            threads: 1,
            compare: true,
            reference_tol: 1e-9,
            error_samples: 10_000,
            output_samples: 2001,
            coefficient_state: "iL".into(),
            out: PathBuf::from("out"),
            circuit: CircuitParams::default(),
            fem: FemConfig::default(),
        }
    }
}

/// A model ready for simulation.
#[derive(Debug, Clone)]
pub struct Model {
    pub dae: LinearDae,
    pub fem: Option<FemInductorModel>,
    pub vc: usize,
    pub il: usize,
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        toml::from_str(&text).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> SimResult<()> {
        let positive = [("fs", self.fs), ("tend", self.tend), ("abstol", self.abstol), ("reference_tol", self.reference_tol)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(SimError::Config(format!("duty must lie in (0, 1), got {}", self.duty)));
        }
        if self.threads == 0 {
            return Err(SimError::Config("threads must be at least 1".into()));
        }
        if self.error_samples == 0 || self.output_samples < 2 {
            return Err(SimError::Config("need at least one error sample and two output samples".into()));
        }
        self.solver().validate()?;
        Ok(())
    }

    pub fn period(&self) -> f64 {
        1.0 / self.fs
    }

    pub fn span(&self) -> (f64, f64) {
        (0.0, self.tend)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            abstol: self.abstol,
            reltol: self.reltol,
            initial_step: self.initial_step,
            max_step: self.max_step,
            max_order: self.max_order,
            ..SolverConfig::default()
        }
    }

    pub fn reference_solver(&self) -> SolverConfig {
        SolverConfig { abstol: self.reference_tol, reltol: self.reference_tol, ..self.solver() }
    }

    pub fn source(&self) -> SimResult<PulsedSource> {
        Ok(PulsedSource::from_frequency(self.v0, self.fs, self.duty)?)
    }

    pub fn build_model(&self) -> SimResult<Model> {
        let source = Waveform::Pulsed(self.source()?);
        match self.model {
            ModelKind::Lumped => {
                let dae = build_lumped(&self.circuit, source)?;
                Ok(Model { dae, fem: None, vc: 1, il: 2 })
            }
            ModelKind::Fem => {
                let fem = FemInductorModel::build(&self.fem)?;
                let dae = build_coupled(&fem, &self.circuit, source)?;
                let na = fem.n_dofs();
                Ok(Model { dae, fem: Some(fem), vc: na + 1, il: na + 2 })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip_with_partial_keys() {
        let cfg: RunConfig = toml::from_str("np = 6\npipeline = \"mpde-pwm\"\n[circuit]\nresistance = 20.0\n").unwrap();
        assert_eq!(cfg.np, 6);
        assert_eq!(cfg.pipeline, PipelineKind::MpdePwm);
        assert_eq!(cfg.circuit.resistance, 20.0);
        assert_eq!(cfg.circuit.capacitance, 10e-6);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(toml::from_str::<RunConfig>("npp = 3").is_err());
        let cfg = RunConfig { duty: 1.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
