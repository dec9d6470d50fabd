//! Legacy ASCII VTK unstructured grids.

use std::fmt::Write as _;
use std::path::Path;

use shalegas_core::mesh::FineMesh;

use crate::error::{Error, Result};

/// Triangles and fracture lines as separate cell blocks. Fracture points are
/// duplicated after the mesh vertices so that `c_f` can be attached as point
/// data next to `c_m`. With `c = None` only the geometry is written.
pub fn to_vtk(mesh: &FineMesh, c: Option<&[f64]>, title: &str) -> String {
    let nv = mesh.n_matrix_dofs();
    let nf = mesh.n_fracture_dofs();
    let tris = mesh.triangles();
    let edges = mesh.fracture_edges();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "{}", title.lines().next().unwrap_or(""));
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", nv + nf);
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {} 0", p[0], p[1]);
    }
    for &v in mesh.fracture_vertices() {
        let p = mesh.vertices()[v];
        let _ = writeln!(out, "{} {} 0", p[0], p[1]);
    }
    let n_cells = tris.len() + edges.len();
    let _ = writeln!(out, "CELLS {} {}", n_cells, 4 * tris.len() + 3 * edges.len());
    for t in tris {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    for e in 0..edges.len() {
        let [fa, fb] = mesh.edge_fracture_dofs(e);
        let _ = writeln!(out, "2 {} {}", nv + fa, nv + fb);
    }
    let _ = writeln!(out, "CELL_TYPES {n_cells}");
    for _ in tris {
        out.push_str("5\n");
    }
    for _ in edges {
        out.push_str("3\n");
    }
    let _ = writeln!(out, "CELL_DATA {n_cells}");
    out.push_str("SCALARS continuum int 1\nLOOKUP_TABLE default\n");
    for _ in tris {
        out.push_str("0\n");
    }
    for _ in edges {
        out.push_str("1\n");
    }
    if let Some(c) = c {
        let _ = writeln!(out, "POINT_DATA {}", nv + nf);
        out.push_str("SCALARS c_m double 1\nLOOKUP_TABLE default\n");
        for v in &c[..nv] {
            let _ = writeln!(out, "{}", v);
        }
        for _ in 0..nf {
            out.push_str("nan\n");
        }
        out.push_str("SCALARS c_f double 1\nLOOKUP_TABLE default\n");
        for _ in 0..nv {
            out.push_str("nan\n");
        }
        for v in &c[nv..] {
            let _ = writeln!(out, "{}", v);
        }
    }
    out
}

pub fn write_vtk(path: &Path, mesh: &FineMesh, c: Option<&[f64]>, title: &str) -> Result<()> {
    std::fs::write(path, to_vtk(mesh, c, title)).map_err(|e| Error::io(path, e))
}
