use alloc::vec::Vec;

use super::{FineMesh, MeshError};

/// Partition-of-unity family carried by a cover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChiKind {
    /// Bilinear hats on a uniform grid with spacing `h`.
    Bilinear { h: f64 },
    /// One domain, `chi = 1` everywhere.
    Unit,
}

/// Neighborhood `omega_i` of one coarse node.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseDomain {
    pub node: [f64; 2],
    /// Closed rectangle `[x0, x1] x [y0, y1]`.
    pub rect: [f64; 4],
    /// Global DOFs in the closed rectangle: matrix DOFs, then fracture DOFs.
    pub dofs: Vec<usize>,
    /// `chi_i` at each entry of `dofs`.
    pub chi: Vec<f64>,
}

impl CoarseDomain {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        const EPS: f64 = 1e-12;
        p[0] >= self.rect[0] - EPS
            && p[0] <= self.rect[1] + EPS
            && p[1] >= self.rect[2] - EPS
            && p[1] <= self.rect[3] + EPS
    }
}

/// Coarse quadrilateral grid with node neighborhoods and bilinear
/// partition of unity.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseCover {
    nc: usize,
    kind: ChiKind,
    domains: Vec<CoarseDomain>,
}

impl CoarseCover {
    /// `(nc + 1)^2` nodes on an `nc x nc` grid of square cells.
    pub fn build(mesh: &FineMesh, nc: usize) -> Result<Self, MeshError> {
        if nc == 0 {
            return Err(MeshError::EmptyCoarseGrid);
        }
        let n = mesh.n();
        if !n.is_multiple_of(nc) {
            return Err(MeshError::Indivisible { n, nc });
        }
        let r = n / nc;
        let h = 1.0 / nc as f64;
        let kind = ChiKind::Bilinear { h };
        let mut domains = Vec::with_capacity((nc + 1) * (nc + 1));
        for q in 0..=nc {
            for p in 0..=nc {
                let (i0, i1) = (p.saturating_sub(1) * r, (p + 1).min(nc) * r);
                let (j0, j1) = (q.saturating_sub(1) * r, (q + 1).min(nc) * r);
                let node = [p as f64 * h, q as f64 * h];
                let rect = [i0 as f64 / n as f64, i1 as f64 / n as f64, j0 as f64 / n as f64, j1 as f64 / n as f64];
                let mut dofs = Vec::new();
                for j in j0..=j1 {
                    for i in i0..=i1 {
                        dofs.push(mesh.vertex_index(i, j));
                    }
                }
                let nm = mesh.n_matrix_dofs();
                for (f, &v) in mesh.fracture_vertices().iter().enumerate() {
                    let (vi, vj) = (v % (n + 1), v / (n + 1));
                    if (i0..=i1).contains(&vi) && (j0..=j1).contains(&vj) {
                        dofs.push(nm + f);
                    }
                }
                let chi = dofs
                    .iter()
                    .map(|&g| hat(node, h, mesh.dof_position(g)))
                    .collect();
                domains.push(CoarseDomain {
                    node,
                    rect,
                    dofs,
                    chi,
                });
            }
        }
        Ok(Self { nc, kind, domains })
    }

    /// A single domain covering the mesh with `chi = 1`.
    pub fn single_domain(mesh: &FineMesh) -> Self {
        let dofs: Vec<usize> = (0..mesh.n_dofs()).collect();
        let chi = alloc::vec![1.0; dofs.len()];
        Self {
            nc: 1,
            kind: ChiKind::Unit,
            domains: alloc::vec![CoarseDomain {
                node: [0.5, 0.5],
                rect: [0.0, 1.0, 0.0, 1.0],
                dofs,
                chi,
            }],
        }
    }

    /// Coarse cells per side.
    pub fn nc(&self) -> usize {
        self.nc
    }

    pub fn coarse_h(&self) -> f64 {
        1.0 / self.nc as f64
    }

    pub fn kind(&self) -> ChiKind {
        self.kind
    }

    pub fn n_domains(&self) -> usize {
        self.domains.len()
    }

    pub fn n_cells(&self) -> usize {
        match self.kind {
            ChiKind::Bilinear { .. } => self.nc * self.nc,
            ChiKind::Unit => 1,
        }
    }

    pub fn domains(&self) -> &[CoarseDomain] {
        &self.domains
    }

    pub fn domain(&self, i: usize) -> &CoarseDomain {
        &self.domains[i]
    }

    /// Coarse cells `(p, q)` that make up `omega_i`.
    pub fn domain_cells(&self, i: usize) -> Vec<(usize, usize)> {
        if let ChiKind::Unit = self.kind {
            return alloc::vec![(0, 0)];
        }
        let (p, q) = (i % (self.nc + 1), i / (self.nc + 1));
        let mut cells = Vec::with_capacity(4);
        for cq in q.saturating_sub(1)..(q + 1).min(self.nc) {
            for cp in p.saturating_sub(1)..(p + 1).min(self.nc) {
                cells.push((cp, cq));
            }
        }
        cells
    }

    /// `chi_i` at an arbitrary point.
    pub fn chi_at(&self, i: usize, x: [f64; 2]) -> f64 {
        match self.kind {
            ChiKind::Bilinear { h } => hat(self.domains[i].node, h, x),
            ChiKind::Unit => 1.0,
        }
    }
}

/// Ordered global DOFs of `omega_i`.
pub fn local_dof_set(cover: &CoarseCover, i: usize) -> &[usize] {
    &cover.domains[i].dofs
}

fn hat(node: [f64; 2], h: f64, x: [f64; 2]) -> f64 {
    let fx = (1.0 - (x[0] - node[0]).abs() / h).max(0.0);
    let fy = (1.0 - (x[1] - node[1]).abs() / h).max(0.0);
    fx * fy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_mesh, embed_fractures, Segment};
    use alloc::vec;

    fn fractured(n: usize) -> FineMesh {
        let m = build_structured_mesh(n).unwrap();
        embed_fractures(
            &m,
            &[
                Segment::new([0.1, 0.2], [0.9, 0.7]),
                Segment::new([0.3, 0.9], [0.6, 0.1]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn node_and_cell_counts() {
        let m = build_structured_mesh(20).unwrap();
        let c = CoarseCover::build(&m, 10).unwrap();
        assert_eq!((c.n_domains(), c.n_cells()), (121, 100));
        let m = build_structured_mesh(40).unwrap();
        let c = CoarseCover::build(&m, 20).unwrap();
        assert_eq!((c.n_domains(), c.n_cells()), (441, 400));
        assert_eq!(
            CoarseCover::build(&m, 3).unwrap_err(),
            MeshError::Indivisible { n: 40, nc: 3 }
        );
    }

    #[test]
    fn neighborhood_cell_counts() {
        let m = build_structured_mesh(8).unwrap();
        let c = CoarseCover::build(&m, 4).unwrap();
        assert_eq!(c.domain_cells(0).len(), 1);
        assert_eq!(c.domain_cells(2).len(), 2);
        assert_eq!(c.domain_cells(6).len(), 4);
    }

    #[test]
    fn partition_of_unity_and_covering() {
        let m = fractured(20);
        let c = CoarseCover::build(&m, 5).unwrap();
        let mut sum = vec![0.0; m.n_dofs()];
        let mut seen = vec![false; m.n_dofs()];
        for d in c.domains() {
            for (&g, &x) in d.dofs.iter().zip(&d.chi) {
                assert!((0.0..=1.0).contains(&x));
                sum[g] += x;
                seen[g] = true;
            }
            assert!(d.dofs.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(seen.iter().all(|&s| s));
        for s in sum {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn local_sets() {
        let m = build_structured_mesh(4).unwrap();
        let c = CoarseCover::build(&m, 2).unwrap();
        assert_eq!(local_dof_set(&c, 4).len(), 25);
        let m = fractured(8);
        let c = CoarseCover::build(&m, 1).unwrap();
        let all: Vec<usize> = (0..m.n_dofs()).collect();
        assert_eq!(local_dof_set(&c, 0), all.as_slice());
        let s = CoarseCover::single_domain(&m);
        assert_eq!(local_dof_set(&s, 0), all.as_slice());
    }
}
