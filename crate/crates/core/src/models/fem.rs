//! Planar magnetoquasistatic inductor and its coupling to the buck circuit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::circuit::CircuitParams;
use super::mesh::{Geometry, Mesh, Region};
use crate::dae::{LinearDae, StateHistory, Waveform};
use crate::error::{Error, Result};
use crate::sparse::{SparseLu, SparseMatrix};

pub const MU0: f64 = 4.0e-7 * PI;

/// Geometry, materials and winding of the FEM inductor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FemConfig {
    #[serde(flatten)]
    pub geometry: Geometry,
    /// Length of the planar model in the third dimension, meters.
    pub depth: f64,
    pub turns: f64,
    /// Core conductivity in S/m.
    pub core_conductivity: f64,
    /// Relative permeability of the core; everything else is vacuum.
    pub core_permeability: f64,
}

impl Default for FemConfig {
    fn default() -> Self {
        Self { geometry: Geometry::default(), depth: 0.1, turns: 1400.0, core_conductivity: 250.0, core_permeability: 1.0 }
    }
}

/// Discretized inductor: `M_σ a' + K a = P i`, flux linkage `Φ = Pᵀ a`.
#[derive(Debug, Clone)]
pub struct FemInductorModel {
    pub config: FemConfig,
    pub mesh: Mesh,
    /// Conductivity matrix, nonzero only on core DOFs.
    pub m_sigma: SparseMatrix<f64>,
    /// Stiffness matrix on the interior DOFs.
    pub k: SparseMatrix<f64>,
    /// Winding vector of the stranded coil.
    pub p: Vec<f64>,
}

impl FemInductorModel {
    pub fn build(config: &FemConfig) -> Result<Self> {
        if !(config.depth > 0.0 && config.turns > 0.0 && config.core_conductivity >= 0.0 && config.core_permeability > 0.0) {
            return Err(Error::InvalidParameter(format!("invalid inductor materials or winding: {config:?}")));
        }
        let mesh = Mesh::structured(&config.geometry)?;
        let n = mesh.n_dofs;
        let depth = config.depth;
        let density = config.turns / config.geometry.coil_area();
        let (mut kt, mut mt) = (Vec::new(), Vec::new());
        let mut p = vec![0.0; n];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let area = mesh.area(t);
            let region = mesh.regions[t];
            let xy = tri.map(|v| mesh.nodes[v]);
            // ∇N_i = (b_i, c_i) / (2 area)
            let b = [xy[1][1] - xy[2][1], xy[2][1] - xy[0][1], xy[0][1] - xy[1][1]];
            let c = [xy[2][0] - xy[1][0], xy[0][0] - xy[2][0], xy[1][0] - xy[0][0]];
            let mu = if region == Region::Core { MU0 * config.core_permeability } else { MU0 };
            let kscale = depth / (mu * 4.0 * area);
            let sigma = if region == Region::Core { config.core_conductivity } else { 0.0 };
            let mscale = sigma * depth * area / 12.0;
            let winding = match region {
                Region::CoilPlus => density * depth * area / 3.0,
                Region::CoilMinus => -density * depth * area / 3.0,
                _ => 0.0,
            };
            for i in 0..3 {
                let Some(di) = mesh.dof[tri[i]] else { continue };
                p[di] += winding;
                for j in 0..3 {
                    let Some(dj) = mesh.dof[tri[j]] else { continue };
                    kt.push((di, dj, kscale * (b[i] * b[j] + c[i] * c[j])));
                    if mscale != 0.0 {
                        mt.push((di, dj, mscale * if i == j { 2.0 } else { 1.0 }));
                    }
                }
            }
        }
        Ok(Self {
            config: *config,
            mesh,
            m_sigma: SparseMatrix::from_triplets(n, n, mt),
            k: SparseMatrix::from_triplets(n, n, kt),
            p,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_dofs
    }

    /// Magnetostatic field `a = K⁻¹ P` for unit current.
    pub fn unit_current_field(&self) -> Result<Vec<f64>> {
        SparseLu::factorize(&self.k, "magnetostatic stiffness")?.solve(&self.p)
    }

    /// DC inductance `Pᵀ K⁻¹ P`.
    pub fn dc_inductance(&self) -> Result<f64> {
        let a = self.unit_current_field()?;
        Ok(dot(&self.p, &a))
    }

    /// Magnetic energy `½ aᵀ K a`.
    pub fn field_energy(&self, a: &[f64]) -> f64 {
        let mut ka = vec![0.0; a.len()];
        self.k.mul_vec(a, &mut ka);
        0.5 * dot(a, &ka)
    }

    /// Circuit parameters of the lumped model equivalent at DC.
    pub fn equivalent_lumped(&self, params: &CircuitParams) -> Result<CircuitParams> {
        Ok(CircuitParams { inductance: self.dc_inductance()?, ..*params })
    }

    /// Eddy-current loss `eᵀ M_σ e` with `e = -a'`, summed element by element
    /// so every term is a nonnegative quadratic form.
    pub fn eddy_loss(&self, a_dot: &[f64]) -> f64 {
        let sigma = self.config.core_conductivity;
        let depth = self.config.depth;
        let mut total = 0.0;
        for (t, tri) in self.mesh.triangles.iter().enumerate() {
            if self.mesh.regions[t] != Region::Core || sigma == 0.0 {
                continue;
            }
            let e = tri.map(|v| self.mesh.dof[v].map_or(0.0, |d| -a_dot[d]));
            let s: f64 = e.iter().sum();
            let sq: f64 = e.iter().map(|v| v * v).sum();
            total += sigma * depth * self.mesh.area(t) / 12.0 * (s * s + sq);
        }
        total
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Offsets of the circuit unknowns behind the `N_a` field DOFs.
pub mod coupled_index {
    pub const FLUX: usize = 0;
    pub const VC: usize = 1;
    pub const IL: usize = 2;
}

/// Field-circuit coupled buck converter with state `[a; Φ; vC; iL]`:
///
/// ```text
/// M_σ a' + K a - P iL = 0
/// Pᵀ a - Φ            = 0
/// C vC' - iL + vC/R   = 0
/// Φ' + R_L iL + vC    = v(t)
/// ```
pub fn build_coupled(fem: &FemInductorModel, params: &CircuitParams, source: Waveform) -> Result<LinearDae> {
    params.validate()?;
    let na = fem.n_dofs();
    let (phi, vc, il) = (na + coupled_index::FLUX, na + coupled_index::VC, na + coupled_index::IL);
    let n = na + 3;
    let a_entries = fem.m_sigma.triplets().chain([(vc, vc, params.capacitance), (il, phi, 1.0)]);
    let mut b_entries: Vec<(usize, usize, f64)> = fem.k.triplets().collect();
    for (i, &pi) in fem.p.iter().enumerate() {
        if pi != 0.0 {
            b_entries.push((i, il, -pi));
            b_entries.push((phi, i, pi));
        }
    }
    b_entries.extend([
        (phi, phi, -1.0),
        (vc, il, -1.0),
        (vc, vc, 1.0 / params.resistance),
        (il, il, params.coil_resistance),
        (il, vc, 1.0),
    ]);
    let mut injection = vec![0.0; n];
    injection[il] = 1.0;
    let mut labels: Vec<String> = (0..na).map(|i| format!("a_{i}")).collect();
    labels.extend(["Phi".to_string(), "vC".to_string(), "iL".to_string()]);
    Ok(LinearDae::new(
        SparseMatrix::from_triplets(n, n, a_entries),
        SparseMatrix::from_triplets(n, n, b_entries),
        injection,
        source,
        vec![0.0; n],
    )?
    .with_labels(labels))
}

/// Eddy-current loss along a coupled-model solution at the given times.
pub fn eddy_losses(history: &dyn StateHistory, fem: &FemInductorModel, times: &[f64]) -> Result<Vec<f64>> {
    let na = fem.n_dofs();
    times
        .iter()
        .map(|&t| {
            let dx = history.state_derivative(t)?;
            Ok(fem.eddy_loss(&dx[..na]))
        })
        .collect()
}
