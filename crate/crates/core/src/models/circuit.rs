use serde::{Deserialize, Serialize};

use crate::dae::{LinearDae, Waveform};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Buck converter output stage: filter capacitor, load and coil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitParams {
    /// Filter capacitance in farads.
    pub capacitance: f64,
    /// Load resistance in ohms.
    pub resistance: f64,
    /// Series resistance of the coil in ohms.
    pub coil_resistance: f64,
    /// Inductance in henries; only the lumped model uses it.
    pub inductance: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self { capacitance: 10e-6, resistance: 30.0, coil_resistance: 0.8, inductance: 65e-3 }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("capacitance", self.capacitance),
            ("resistance", self.resistance),
            ("coil_resistance", self.coil_resistance),
            ("inductance", self.inductance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Output voltage for a constant input `v`.
    pub fn dc_output(&self, v: f64) -> f64 {
        v * self.resistance / (self.resistance + self.coil_resistance)
    }
}

/// State indices of the lumped buck model.
pub mod lumped_index {
    pub const FLUX: usize = 0;
    pub const VC: usize = 1;
    pub const IL: usize = 2;
}

/// Lumped buck converter with state `[Φ, vC, iL]`:
///
/// ```text
/// L iL - Φ           = 0
/// C vC' - iL + vC/R  = 0
/// Φ' + R_L iL + vC   = v(t)
/// ```
pub fn build_lumped(params: &CircuitParams, source: Waveform) -> Result<LinearDae> {
    params.validate()?;
    let a = SparseMatrix::from_triplets(3, 3, vec![(1, 1, params.capacitance), (2, 0, 1.0)]);
    let b = SparseMatrix::from_triplets(
        3,
        3,
        vec![
            (0, 2, params.inductance),
            (0, 0, -1.0),
            (1, 2, -1.0),
            (1, 1, 1.0 / params.resistance),
            (2, 2, params.coil_resistance),
            (2, 1, 1.0),
        ],
    );
    Ok(LinearDae::new(a, b, vec![0.0, 0.0, 1.0], source, vec![0.0; 3])?
        .with_labels(vec!["Phi".into(), "vC".into(), "iL".into()]))
}
