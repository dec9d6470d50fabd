use alloc::vec::Vec;

use super::{PhysicalConstants, PhysicsError};
use crate::math::floor;
use crate::mesh::FineMesh;

/// Matrix porosity and permeability at one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixMaterial {
    pub phi: f64,
    pub kappa_m: f64,
}

impl MatrixMaterial {
    pub fn homogeneous(k: &PhysicalConstants) -> Self {
        Self {
            phi: k.phi,
            kappa_m: k.kappa_m,
        }
    }
}

/// Values on an `nx x ny` node lattice spanning the unit square, row by row
/// from `y = 0`, sampled bilinearly.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl Raster {
    pub fn new(nx: usize, ny: usize, values: Vec<f64>) -> Result<Self, PhysicsError> {
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(PhysicsError::RasterShape {
                nx,
                ny,
                found: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(PhysicsError::NonPositiveMultiplier { index, value });
        }
        Ok(Self { nx, ny, values })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            nx: 1,
            ny: 1,
            values: alloc::vec![value],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample(&self, p: [f64; 2]) -> f64 {
        let axis = |x: f64, n: usize| -> (usize, usize, f64) {
            if n == 1 {
                return (0, 0, 0.0);
            }
            let s = x.clamp(0.0, 1.0) * (n - 1) as f64;
            let i = (floor(s) as usize).min(n - 2);
            (i, i + 1, s - i as f64)
        };
        let (i0, i1, tx) = axis(p[0], self.nx);
        let (j0, j1, ty) = axis(p[1], self.ny);
        let v = |i: usize, j: usize| self.values[j * self.nx + i];
        (1.0 - ty) * ((1.0 - tx) * v(i0, j0) + tx * v(i1, j0))
            + ty * ((1.0 - tx) * v(i0, j1) + tx * v(i1, j1))
    }
}

/// Material data per triangle and per fracture edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    /// Matrix material of each triangle, sampled at its square cell center.
    pub cells: Vec<MatrixMaterial>,
    /// Matrix material at each fracture edge midpoint, used for transfer.
    pub edges: Vec<MatrixMaterial>,
    /// Fracture permeability of each fracture edge.
    pub kappa_f: Vec<f64>,
}

impl CoefficientField {
    pub fn homogeneous(mesh: &FineMesh, k: &PhysicalConstants) -> Self {
        let m = MatrixMaterial::homogeneous(k);
        Self {
            cells: alloc::vec![m; mesh.triangles().len()],
            edges: alloc::vec![m; mesh.fracture_edges().len()],
            kappa_f: alloc::vec![k.kappa_f; mesh.fracture_edges().len()],
        }
    }

    /// `phi = phi_mult * phi`, `kappa_m = k_mult * kappa_m` with the
    /// multipliers sampled from rasters.
    pub fn heterogeneous(mesh: &FineMesh, k: &PhysicalConstants, phi_mult: &Raster, k_mult: &Raster) -> Self {
        let h = mesh.h();
        let at = |p: [f64; 2]| MatrixMaterial {
            phi: k.phi * phi_mult.sample(p),
            kappa_m: k.kappa_m * k_mult.sample(p),
        };
        let cells = (0..mesh.triangles().len())
            .map(|t| {
                let (ci, cj) = mesh.cell_of_triangle(t);
                at([(ci as f64 + 0.5) * h, (cj as f64 + 0.5) * h])
            })
            .collect();
        let edges = (0..mesh.fracture_edges().len())
            .map(|e| at(mesh.edge_midpoint(e)))
            .collect();
        Self {
            cells,
            edges,
            kappa_f: alloc::vec![k.kappa_f; mesh.fracture_edges().len()],
        }
    }

    pub fn validate(&self, mesh: &FineMesh) -> Result<(), PhysicsError> {
        let checks = [
            (mesh.triangles().len(), self.cells.len()),
            (mesh.fracture_edges().len(), self.edges.len()),
            (mesh.fracture_edges().len(), self.kappa_f.len()),
        ];
        for (expected, found) in checks {
            if expected != found {
                return Err(PhysicsError::FieldLength { expected, found });
            }
        }
        for (index, m) in self.cells.iter().chain(&self.edges).enumerate() {
            if !(m.phi > 0.0 && m.phi < 1.0) {
                return Err(PhysicsError::NonPositiveMultiplier { index, value: m.phi });
            }
            if !(m.kappa_m > 0.0) {
                return Err(PhysicsError::NonPositiveMultiplier {
                    index,
                    value: m.kappa_m,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_bilinear_sampling() {
        let r = Raster::new(2, 2, alloc::vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(r.sample([0.0, 0.0]), 1.0);
        assert_eq!(r.sample([1.0, 1.0]), 4.0);
        assert!((r.sample([0.5, 0.5]) - 2.5).abs() < 1e-15);
        assert_eq!(Raster::constant(3.0).sample([0.3, 0.9]), 3.0);
        assert!(Raster::new(2, 2, alloc::vec![1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(Raster::new(3, 2, alloc::vec![1.0; 4]).is_err());
    }
}
