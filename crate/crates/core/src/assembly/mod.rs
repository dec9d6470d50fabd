//! P1 finite-element assembly of the coupled matrix/fracture system.
//!
//! Global DOFs are the mesh vertices followed by the fracture DOFs. All
//! global operators share one sparsity pattern, so nonlinear evaluations
//! and the fixed linear parts can be combined entry by entry.

mod element;
mod system;

pub use element::{edge_mass_element, edge_stiffness_element, p1_mass_element, p1_stiffness_element};
pub use system::{
    build_linear_operator, build_rhs, BlockSystem, NonlinearEvaluation, WellBox, WellTreatment,
};

use alloc::vec::Vec;
use thiserror::Error;

use crate::linalg::{CsrMatrix, LinalgError};
use crate::mesh::FineMesh;
use crate::physics::PhysicsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("triangle {index} is degenerate or clockwise (area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("fracture edge {index} has zero length")]
    ZeroLengthEdge { index: usize },
    #[error("well box {index} contains no fracture DOF")]
    EmptyWellBox { index: usize },
    #[error("well box {index} is not inside the unit square")]
    WellBoxOutside { index: usize },
    #[error("time step must be positive, got {tau:e}")]
    NonPositiveStep { tau: f64 },
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("assembled operator is not symmetric positive definite: {0}")]
    NotSpd(&'static str),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn triangle_points(mesh: &FineMesh, t: usize) -> [[f64; 2]; 3] {
    let v = mesh.vertices();
    let [a, b, c] = mesh.triangles()[t];
    [v[a], v[b], v[c]]
}

fn check_len(expected: usize, found: usize) -> Result<(), AssemblyError> {
    if expected == found {
        Ok(())
    } else {
        Err(AssemblyError::LengthMismatch { expected, found })
    }
}

type TriangleElement = fn([[f64; 2]; 3], usize) -> Result<[[f64; 3]; 3], AssemblyError>;

fn assemble_triangles(
    mesh: &FineMesh,
    coef: &[f64],
    element: TriangleElement,
) -> Result<CsrMatrix, AssemblyError> {
    check_len(mesh.triangles().len(), coef.len())?;
    let mut trip = Vec::with_capacity(9 * coef.len());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let k = element(triangle_points(mesh, t), t)?;
        for i in 0..3 {
            for j in 0..3 {
                trip.push((tri[i], tri[j], coef[t] * k[i][j]));
            }
        }
    }
    let n = mesh.n_matrix_dofs();
    Ok(CsrMatrix::from_triplets(n, n, &trip)?)
}

/// Matrix-block mass matrix with a piecewise-constant coefficient per triangle.
pub fn assemble_p1_mass(mesh: &FineMesh, coef: &[f64]) -> Result<CsrMatrix, AssemblyError> {
    assemble_triangles(mesh, coef, p1_mass_element)
}

/// Matrix-block stiffness matrix with a piecewise-constant coefficient per triangle.
pub fn assemble_p1_stiffness(mesh: &FineMesh, coef: &[f64]) -> Result<CsrMatrix, AssemblyError> {
    assemble_triangles(mesh, coef, p1_stiffness_element)
}

fn edge_lengths(mesh: &FineMesh) -> Result<Vec<f64>, AssemblyError> {
    (0..mesh.fracture_edges().len())
        .map(|e| {
            let len = mesh.edge_length(e);
            if len > 0.0 {
                Ok(len)
            } else {
                Err(AssemblyError::ZeroLengthEdge { index: e })
            }
        })
        .collect()
}

/// Fracture-block mass and stiffness over the fracture DOF numbering.
pub fn assemble_fracture_matrices(
    mesh: &FineMesh,
    mass_coef: &[f64],
    stiffness_coef: &[f64],
) -> Result<(CsrMatrix, CsrMatrix), AssemblyError> {
    let ne = mesh.fracture_edges().len();
    check_len(ne, mass_coef.len())?;
    check_len(ne, stiffness_coef.len())?;
    let lens = edge_lengths(mesh)?;
    let mut tm = Vec::with_capacity(4 * ne);
    let mut tk = Vec::with_capacity(4 * ne);
    for e in 0..ne {
        let dofs = mesh.edge_fracture_dofs(e);
        let m = edge_mass_element(lens[e]);
        let k = edge_stiffness_element(lens[e]);
        for i in 0..2 {
            for j in 0..2 {
                tm.push((dofs[i], dofs[j], mass_coef[e] * m[i][j]));
                tk.push((dofs[i], dofs[j], stiffness_coef[e] * k[i][j]));
            }
        }
    }
    let nf = mesh.n_fracture_dofs();
    Ok((
        CsrMatrix::from_triplets(nf, nf, &tm)?,
        CsrMatrix::from_triplets(nf, nf, &tk)?,
    ))
}

/// Off-diagonal transfer blocks `(Q_mf, Q_fm)`: the `sigma`-weighted 1D mass
/// between fracture DOFs and the matrix DOFs at the same vertices.
pub fn assemble_coupling(mesh: &FineMesh, sigma: &[f64]) -> Result<(CsrMatrix, CsrMatrix), AssemblyError> {
    let ne = mesh.fracture_edges().len();
    check_len(ne, sigma.len())?;
    let lens = edge_lengths(mesh)?;
    let mut trip = Vec::with_capacity(4 * ne);
    for e in 0..ne {
        let verts = mesh.fracture_edges()[e];
        let dofs = mesh.edge_fracture_dofs(e);
        let m = edge_mass_element(lens[e]);
        for i in 0..2 {
            for j in 0..2 {
                trip.push((dofs[i], verts[j], sigma[e] * m[i][j]));
            }
        }
    }
    let q_fm = CsrMatrix::from_triplets(mesh.n_fracture_dofs(), mesh.n_matrix_dofs(), &trip)?;
    Ok((q_fm.transpose(), q_fm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_mesh, embed_fractures, Segment};
    use alloc::vec;

    fn close(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> bool {
        (0..3).all(|i| (0..3).all(|j| (a[i][j] - b[i][j]).abs() <= 1e-15))
    }

    #[test]
    fn unit_triangle_elements() {
        let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let m = p1_mass_element(p, 0).unwrap();
        let want = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]].map(|r| r.map(|x| x / 24.0));
        assert!(close(&m, &want));
        let k = p1_stiffness_element(p, 0).unwrap();
        let want = [[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]].map(|r| r.map(|x| x / 2.0));
        assert!(close(&k, &want));
        let flat = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(
            p1_mass_element(flat, 3),
            Err(AssemblyError::DegenerateTriangle { index: 3, .. })
        ));
    }

    #[test]
    fn global_mass_and_stiffness_identities() {
        let mesh = build_structured_mesh(2).unwrap();
        let ones = vec![1.0; mesh.triangles().len()];
        let m = assemble_p1_mass(&mesh, &ones).unwrap();
        let u = vec![1.0; mesh.n_matrix_dofs()];
        assert!((m.quad_form(&u) - 1.0).abs() < 1e-14);
        let k = assemble_p1_stiffness(&mesh, &ones).unwrap();
        assert!(k.matvec(&u).iter().all(|x| x.abs() < 1e-14));
        assert!(k.is_symmetric(0.0));
    }

    #[test]
    fn fracture_chain_and_coupling() {
        let mesh = build_structured_mesh(2).unwrap();
        let mesh = embed_fractures(&mesh, &[Segment::new([0.0, 0.5], [1.0, 0.5])]).unwrap();
        let ne = mesh.fracture_edges().len();
        let (sf, lf) = assemble_fracture_matrices(&mesh, &vec![1.0; ne], &vec![1.0; ne]).unwrap();
        let u = vec![1.0; mesh.n_fracture_dofs()];
        assert!((sf.quad_form(&u) - 1.0).abs() < 1e-14);
        assert!(lf.matvec(&u).iter().all(|x| x.abs() < 1e-13));
        let (q_mf, q_fm) = assemble_coupling(&mesh, &vec![2.0; ne]).unwrap();
        assert_eq!(q_mf, q_fm.transpose());
        let total: f64 = q_mf.values().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let (z, _) = assemble_coupling(&mesh, &vec![0.0; ne]).unwrap();
        assert!(z.values().iter().all(|&x| x == 0.0));
    }
}
