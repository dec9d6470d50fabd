//! Structured fracture-conforming triangulation of the unit square and the
//! coarse quadrilateral cover used by the two-grid preconditioner.

mod coarse;
mod fracture;

pub use coarse::{local_dof_set, ChiKind, CoarseCover, CoarseDomain};
pub use fracture::{generate_segments, FractureGenerator, FractureSpec, Segment};

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("mesh needs at least 2 cells per side, got {n}")]
    TooFewCells { n: usize },
    #[error("fracture segment {index} has an endpoint outside the unit square")]
    SegmentOutsideDomain { index: usize },
    #[error("fracture segment {index} collapses to a single vertex after snapping")]
    DegenerateSegment { index: usize },
    #[error("mesh size {n} is not divisible by coarse size {nc}")]
    Indivisible { n: usize, nc: usize },
    #[error("coarse grid needs at least 1 cell per side")]
    EmptyCoarseGrid,
    #[error("invalid fracture generator: {0}")]
    InvalidGenerator(&'static str),
    #[error("coarse domain {index} contains no cells")]
    EmptyDomain { index: usize },
}

/// Fine triangulation of `[0,1]^2` with fracture edges on mesh edges.
///
/// Matrix DOFs are the mesh vertices; fracture DOF `j` sits on vertex
/// `fracture_vertices[j]` and has global index `n_matrix_dofs() + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FineMesh {
    n: usize,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    fracture_edges: Vec<[usize; 2]>,
    fracture_edge_segment: Vec<usize>,
    fracture_vertices: Vec<usize>,
    vertex_fracture_dof: Vec<Option<usize>>,
}

/// Builds the `n x n` grid with every square split along its SW-NE diagonal.
pub fn build_structured_mesh(n: usize) -> Result<FineMesh, MeshError> {
    if n < 2 {
        return Err(MeshError::TooFewCells { n });
    }
    let side = n + 1;
    let mut vertices = Vec::with_capacity(side * side);
    for j in 0..side {
        for i in 0..side {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let sw = j * side + i;
            let se = sw + 1;
            let nw = sw + side;
            let ne = nw + 1;
            triangles.push([sw, se, ne]);
            triangles.push([sw, ne, nw]);
        }
    }
    Ok(FineMesh {
        n,
        vertices,
        triangles,
        fracture_edges: Vec::new(),
        fracture_edge_segment: Vec::new(),
        fracture_vertices: Vec::new(),
        vertex_fracture_dof: vec![None; side * side],
    })
}

/// Snaps every segment onto mesh edges and rebuilds the fracture DOF maps.
/// Existing fracture edges are kept.
pub fn embed_fractures(mesh: &FineMesh, segments: &[Segment]) -> Result<FineMesh, MeshError> {
    let mut edges: Vec<([usize; 2], usize)> = mesh
        .fracture_edges
        .iter()
        .copied()
        .zip(mesh.fracture_edge_segment.iter().copied())
        .collect();
    let offset = mesh.fracture_edge_segment.iter().map(|s| s + 1).max().unwrap_or(0);
    for (k, seg) in segments.iter().enumerate() {
        if !seg.is_inside_unit_square() {
            return Err(MeshError::SegmentOutsideDomain { index: k });
        }
        let path = fracture::snap_segment(mesh.n, seg);
        if path.len() < 2 {
            return Err(MeshError::DegenerateSegment { index: k });
        }
        for w in path.windows(2) {
            let a = mesh.vertex_index(w[0].0, w[0].1);
            let b = mesh.vertex_index(w[1].0, w[1].1);
            edges.push(([a.min(b), a.max(b)], offset + k));
        }
    }
    // stable sort keeps the first segment as owner of a shared edge
    edges.sort_by_key(|e| e.0);
    edges.dedup_by_key(|e| e.0);

    let mut on_fracture = vec![false; mesh.vertices.len()];
    for (e, _) in &edges {
        on_fracture[e[0]] = true;
        on_fracture[e[1]] = true;
    }
    let mut fracture_vertices = Vec::new();
    let mut vertex_fracture_dof = vec![None; mesh.vertices.len()];
    for (v, &on) in on_fracture.iter().enumerate() {
        if on {
            vertex_fracture_dof[v] = Some(fracture_vertices.len());
            fracture_vertices.push(v);
        }
    }
    Ok(FineMesh {
        n: mesh.n,
        vertices: mesh.vertices.clone(),
        triangles: mesh.triangles.clone(),
        fracture_edges: edges.iter().map(|e| e.0).collect(),
        fracture_edge_segment: edges.iter().map(|e| e.1).collect(),
        fracture_vertices,
        vertex_fracture_dof,
    })
}

impl FineMesh {
    /// Cells per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Fracture edges as vertex pairs `(a, b)` with `a < b`, sorted.
    pub fn fracture_edges(&self) -> &[[usize; 2]] {
        &self.fracture_edges
    }

    /// Index of the input segment that produced each fracture edge.
    pub fn fracture_edge_segments(&self) -> &[usize] {
        &self.fracture_edge_segment
    }

    /// Mesh vertex of every fracture DOF, ascending.
    pub fn fracture_vertices(&self) -> &[usize] {
        &self.fracture_vertices
    }

    pub fn fracture_dof_of_vertex(&self, v: usize) -> Option<usize> {
        self.vertex_fracture_dof[v]
    }

    pub fn n_matrix_dofs(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_fracture_dofs(&self) -> usize {
        self.fracture_vertices.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_matrix_dofs() + self.n_fracture_dofs()
    }

    pub fn vertex_index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    /// Square cell `(ci, cj)` holding triangle `t`.
    pub fn cell_of_triangle(&self, t: usize) -> (usize, usize) {
        let c = t / 2;
        (c % self.n, c / self.n)
    }

    /// Signed area, positive for counter-clockwise triangles.
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    pub fn triangle_centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.fracture_edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        crate::math::hypot(pb[0] - pa[0], pb[1] - pa[1])
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.fracture_edges[e];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    /// Fracture DOFs (local numbering) of edge `e`.
    pub fn edge_fracture_dofs(&self, e: usize) -> [usize; 2] {
        let [a, b] = self.fracture_edges[e];
        [
            self.vertex_fracture_dof[a].expect("fracture edge vertex has a DOF"),
            self.vertex_fracture_dof[b].expect("fracture edge vertex has a DOF"),
        ]
    }

    /// Coordinates of global DOF `g`; fracture DOFs use their mesh vertex.
    pub fn dof_position(&self, g: usize) -> [f64; 2] {
        let nm = self.n_matrix_dofs();
        if g < nm {
            self.vertices[g]
        } else {
            self.vertices[self.fracture_vertices[g - nm]]
        }
    }

    /// Whether `(a, b)` is an edge of the triangulation.
    pub fn is_mesh_edge(&self, a: usize, b: usize) -> bool {
        let side = self.n + 1;
        let (lo, hi) = (a.min(b), a.max(b));
        if hi >= self.vertices.len() || lo == hi {
            return false;
        }
        let (ia, ja) = (lo % side, lo / side);
        let (ib, jb) = (hi % side, hi / side);
        (jb == ja && ib == ia + 1) || (ib == ia && jb == ja + 1) || (ib == ia + 1 && jb == ja + 1)
    }

    /// Connected components of the fracture graph as lists of fracture DOFs.
    pub fn fracture_components(&self) -> Vec<Vec<usize>> {
        let nf = self.n_fracture_dofs();
        let mut parent: Vec<usize> = (0..nf).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in 0..self.fracture_edges.len() {
            let [a, b] = self.edge_fracture_dofs(e);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut label = vec![usize::MAX; nf];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for j in 0..nf {
            let r = find(&mut parent, j);
            if label[r] == usize::MAX {
                label[r] = out.len();
                out.push(Vec::new());
            }
            out[label[r]].push(j);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_for_small_meshes() {
        let m = build_structured_mesh(2).unwrap();
        assert_eq!(m.vertices().len(), 9);
        assert_eq!(m.triangles().len(), 8);
        let m = build_structured_mesh(4).unwrap();
        assert_eq!(m.vertices().len(), 25);
        assert_eq!(m.triangles().len(), 32);
        assert!(matches!(
            build_structured_mesh(1),
            Err(MeshError::TooFewCells { n: 1 })
        ));
    }

    #[test]
    fn triangles_are_positive_and_tile_the_square() {
        for n in [2, 3, 7, 16] {
            let m = build_structured_mesh(n).unwrap();
            let mut total = 0.0;
            for t in 0..m.triangles().len() {
                let a = m.triangle_area(t);
                assert!(a > 0.0);
                total += a;
            }
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_segment_follows_cell_diagonals() {
        let m = build_structured_mesh(4).unwrap();
        let m = embed_fractures(&m, &[Segment::new([0.0, 0.0], [1.0, 1.0])]).unwrap();
        assert_eq!(m.fracture_edges().len(), 4);
        assert_eq!(m.n_fracture_dofs(), 5);
        for &[a, b] in m.fracture_edges() {
            assert!(m.is_mesh_edge(a, b));
        }
    }

    #[test]
    fn horizontal_segment_and_dof_numbering() {
        let m = build_structured_mesh(4).unwrap();
        let m = embed_fractures(&m, &[Segment::new([0.0, 0.5], [1.0, 0.5])]).unwrap();
        assert_eq!(m.fracture_edges().len(), 4);
        assert_eq!(m.n_dofs(), 25 + 5);
        assert_eq!(m.fracture_vertices(), &[10, 11, 12, 13, 14]);
        assert_eq!(m.dof_position(25 + 2), [0.5, 0.5]);
    }

    #[test]
    fn shared_edges_are_deduplicated() {
        let m = build_structured_mesh(4).unwrap();
        let segs = [
            Segment::new([0.0, 0.5], [1.0, 0.5]),
            Segment::new([0.25, 0.5], [0.75, 0.5]),
            Segment::new([0.5, 0.0], [0.5, 1.0]),
        ];
        let m = embed_fractures(&m, &segs).unwrap();
        assert_eq!(m.fracture_edges().len(), 8);
        assert_eq!(m.n_fracture_dofs(), 9);
        assert_eq!(m.fracture_components().len(), 1);
    }

    #[test]
    fn degenerate_and_outside_segments_are_rejected() {
        let m = build_structured_mesh(4).unwrap();
        let err = embed_fractures(&m, &[Segment::new([0.5, 0.5], [0.52, 0.51])]).unwrap_err();
        assert_eq!(err, MeshError::DegenerateSegment { index: 0 });
        let err = embed_fractures(&m, &[Segment::new([0.5, 0.5], [1.2, 0.5])]).unwrap_err();
        assert_eq!(err, MeshError::SegmentOutsideDomain { index: 0 });
    }
}
