//! Structured triangle mesh of the planar inductor cross-section.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Material region of a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Air,
    Core,
    /// Coil side carrying the current in `+z`.
    CoilPlus,
    /// Return side of the coil.
    CoilMinus,
}

/// Dimensions of the planar inductor, in meters.
///
/// A rectangular core is centred in a square air box. The two coil windows
/// sit on either side of the core with the same height, `coil_width` wide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub box_size: f64,
    pub core_width: f64,
    pub core_height: f64,
    pub coil_width: f64,
    /// Cells along each side of the box; must resolve every material edge.
    pub divisions: usize,
}

impl Default for Geometry {
    fn default() -> Self {
        Self { box_size: 0.08, core_width: 0.02, core_height: 0.04, coil_width: 0.01, divisions: 40 }
    }
}

impl Geometry {
    /// Material interfaces along x (and y for the core/coil top and bottom).
    fn edges(&self) -> [f64; 4] {
        let half = 0.5 * self.box_size;
        [
            half - 0.5 * self.core_width - self.coil_width,
            half - 0.5 * self.core_width,
            half + 0.5 * self.core_width,
            half + 0.5 * self.core_width + self.coil_width,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.box_size > 0.0
            && self.core_width > 0.0
            && self.core_height > 0.0
            && self.coil_width > 0.0
            && self.core_width + 2.0 * self.coil_width < self.box_size
            && self.core_height < self.box_size;
        if !ok {
            return Err(Error::Mesh(format!("core and coils do not fit inside the box: {self:?}")));
        }
        if self.divisions < 2 {
            return Err(Error::Mesh("need at least two divisions".into()));
        }
        let h = self.box_size / self.divisions as f64;
        let half = 0.5 * self.box_size;
        let lines = self.edges().into_iter().chain([half - 0.5 * self.core_height, half + 0.5 * self.core_height]);
        for e in lines {
            let cells = e / h;
            if (cells - cells.round()).abs() > 1e-9 {
                return Err(Error::Mesh(format!(
                    "{} divisions do not resolve the material edge at {e} m",
                    self.divisions
                )));
            }
        }
        Ok(())
    }

    pub fn coil_area(&self) -> f64 {
        self.coil_width * self.core_height
    }
}

/// Triangulated square with a region tag per triangle and interior DOFs
/// (boundary nodes carry the homogeneous Dirichlet condition).
#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub regions: Vec<Region>,
    /// DOF index of each node, `None` on the Dirichlet boundary.
    pub dof: Vec<Option<usize>>,
    pub n_dofs: usize,
}

impl Mesh {
    /// Two right triangles per square cell, origin at the lower left corner
    /// of the box.
    pub fn structured(g: &Geometry) -> Result<Self> {
        g.validate()?;
        let n = g.divisions;
        let h = g.box_size / n as f64;
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
        let mut dof = Vec::with_capacity((n + 1) * (n + 1));
        let mut n_dofs = 0;
        for j in 0..=n {
            for i in 0..=n {
                nodes.push([i as f64 * h, j as f64 * h]);
                if i == 0 || j == 0 || i == n || j == n {
                    dof.push(None);
                } else {
                    dof.push(Some(n_dofs));
                    n_dofs += 1;
                }
            }
        }
        let [x0, x1, x2, x3] = g.edges();
        let half = 0.5 * g.box_size;
        let (y0, y1) = (half - 0.5 * g.core_height, half + 0.5 * g.core_height);
        let region_at = |x: f64, y: f64| {
            if y <= y0 || y >= y1 || x <= x0 || x >= x3 {
                Region::Air
            } else if x < x1 {
                Region::CoilMinus
            } else if x < x2 {
                Region::Core
            } else {
                Region::CoilPlus
            }
        };
        let mut triangles = Vec::with_capacity(2 * n * n);
        let mut regions = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let r = region_at((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
                regions.push(r);
                regions.push(r);
            }
        }
        let mesh = Self { nodes, triangles, regions, dof, n_dofs };
        for t in 0..mesh.triangles.len() {
            if mesh.area(t) <= 0.0 {
                return Err(Error::Mesh(format!("triangle {t} has non-positive area")));
            }
        }
        Ok(mesh)
    }

    /// `x y` per node and `n0 n1 n2 region` per triangle.
    pub fn to_text(&self) -> (String, String) {
        let nodes = self.nodes.iter().map(|[x, y]| format!("{x:.17e} {y:.17e}\n")).collect();
        let tris = self
            .triangles
            .iter()
            .zip(&self.regions)
            .map(|([a, b, c], r)| format!("{a} {b} {c} {r:?}\n"))
            .collect();
        (nodes, tris)
    }

    /// Signed area; positive for counter-clockwise triangles.
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn region_area(&self, region: Region) -> f64 {
        (0..self.triangles.len()).filter(|&t| self.regions[t] == region).map(|t| self.area(t)).sum()
    }

    /// DOFs touching at least one triangle of `region`.
    pub fn region_dofs(&self, region: Region) -> Vec<usize> {
        let mut mark = vec![false; self.n_dofs];
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.regions[t] == region {
                for &v in tri {
                    if let Some(d) = self.dof[v] {
                        mark[d] = true;
                    }
                }
            }
        }
        (0..self.n_dofs).filter(|&d| mark[d]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_mesh_sizes_and_areas() {
        let g = Geometry::default();
        let m = Mesh::structured(&g).unwrap();
        assert_eq!(m.n_dofs, 39 * 39);
        assert_eq!(m.triangles.len(), 2 * 40 * 40);
        assert!((m.region_area(Region::Core) - 0.02 * 0.04).abs() < 1e-15);
        assert!((m.region_area(Region::CoilPlus) - g.coil_area()).abs() < 1e-15);
        assert!((m.region_area(Region::CoilMinus) - g.coil_area()).abs() < 1e-15);
        let total: f64 = (0..m.triangles.len()).map(|t| m.area(t)).sum();
        assert!((total - 0.08 * 0.08).abs() < 1e-15);
    }

    #[test]
    fn unresolved_edges_are_rejected() {
        let g = Geometry { divisions: 12, ..Default::default() };
        assert!(matches!(Mesh::structured(&g), Err(Error::Mesh(_))));
    }
}
