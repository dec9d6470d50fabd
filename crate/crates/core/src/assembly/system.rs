use alloc::vec;
use alloc::vec::Vec;

use super::{edge_lengths, edge_mass_element, edge_stiffness_element, p1_mass_element, p1_stiffness_element, triangle_points, AssemblyError};
use crate::linalg::{CsrMatrix, DenseSymmetricMatrix};
use crate::mesh::FineMesh;
use crate::physics::{CoefficientField, CoefficientModel};

/// Axis-aligned closed rectangle `[x0, x1] x [y0, y1]` holding a production well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl WellBox {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        const EPS: f64 = 1e-12;
        p[0] >= self.x0 - EPS && p[0] <= self.x1 + EPS && p[1] >= self.y0 - EPS && p[1] <= self.y1 + EPS
    }

    fn is_valid(&self) -> bool {
        let inside = |a: f64, b: f64| (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) && a <= b;
        inside(self.x0, self.x1) && inside(self.y0, self.y1)
    }
}

/// How the linear part `g1` of the well source enters the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WellTreatment {
    /// `g1` goes into the fixed operator, only `g0` stays on the right.
    #[default]
    Implicit,
    /// The whole source `g0 - g1 c^n` is evaluated at the old state.
    Explicit,
}

/// Element matrices, scatter positions into the shared pattern and the
/// well-box restriction of the fracture mass.
#[derive(Debug, Clone)]
struct Layout {
    n_matrix: usize,
    n_fracture: usize,
    pattern: CsrMatrix,
    tri_vertices: Vec<[usize; 3]>,
    tri_mass: Vec<[[f64; 3]; 3]>,
    tri_stiff: Vec<[[f64; 3]; 3]>,
    tri_pos: Vec<[usize; 9]>,
    /// `[v_a, v_b, f_a, f_b]` in global numbering.
    edge_dofs: Vec<[usize; 4]>,
    edge_len: Vec<f64>,
    edge_pos: Vec<[usize; 16]>,
    /// `(edge, endpoint inside)` for every box an edge touches.
    well_edges: Vec<(usize, [bool; 2])>,
}

impl Layout {
    fn new(mesh: &FineMesh, wells: &[WellBox]) -> Result<Self, AssemblyError> {
        let nm = mesh.n_matrix_dofs();
        let n = mesh.n_dofs();
        let tri_vertices: Vec<[usize; 3]> = mesh.triangles().to_vec();
        let mut tri_mass = Vec::with_capacity(tri_vertices.len());
        let mut tri_stiff = Vec::with_capacity(tri_vertices.len());
        for t in 0..tri_vertices.len() {
            let p = triangle_points(mesh, t);
            tri_mass.push(p1_mass_element(p, t)?);
            tri_stiff.push(p1_stiffness_element(p, t)?);
        }
        let edge_len = edge_lengths(mesh)?;
        let edge_dofs: Vec<[usize; 4]> = (0..edge_len.len())
            .map(|e| {
                let [va, vb] = mesh.fracture_edges()[e];
                let [fa, fb] = mesh.edge_fracture_dofs(e);
                [va, vb, nm + fa, nm + fb]
            })
            .collect();

        let mut trip = Vec::with_capacity(9 * tri_vertices.len() + 16 * edge_dofs.len() + n);
        for i in 0..n {
            trip.push((i, i, 0.0));
        }
        for tri in &tri_vertices {
            for &a in tri {
                for &b in tri {
                    trip.push((a, b, 0.0));
                }
            }
        }
        for d in &edge_dofs {
            for &a in d {
                for &b in d {
                    trip.push((a, b, 0.0));
                }
            }
        }
        let pattern = CsrMatrix::from_triplets(n, n, &trip)?;
        let pos = |a: usize, b: usize| pattern.position(a, b).expect("entry is in the pattern");
        let tri_pos = tri_vertices
            .iter()
            .map(|t| {
                let mut p = [0; 9];
                for i in 0..3 {
                    for j in 0..3 {
                        p[3 * i + j] = pos(t[i], t[j]);
                    }
                }
                p
            })
            .collect();
        let edge_pos = edge_dofs
            .iter()
            .map(|d| {
                let mut p = [0; 16];
                for i in 0..4 {
                    for j in 0..4 {
                        p[4 * i + j] = pos(d[i], d[j]);
                    }
                }
                p
            })
            .collect();

        let mut well_edges = Vec::new();
        for (index, w) in wells.iter().enumerate() {
            if !w.is_valid() {
                return Err(AssemblyError::WellBoxOutside { index });
            }
            let inside_dof = mesh
                .fracture_vertices()
                .iter()
                .any(|&v| w.contains(mesh.vertices()[v]));
            if !inside_dof {
                return Err(AssemblyError::EmptyWellBox { index });
            }
            for (e, &[va, vb]) in mesh.fracture_edges().iter().enumerate() {
                let flags = [w.contains(mesh.vertices()[va]), w.contains(mesh.vertices()[vb])];
                if flags[0] || flags[1] {
                    well_edges.push((e, flags));
                }
            }
        }

        Ok(Self {
            n_matrix: nm,
            n_fracture: mesh.n_fracture_dofs(),
            pattern,
            tri_vertices,
            tri_mass,
            tri_stiff,
            tri_pos,
            edge_dofs,
            edge_len,
            edge_pos,
            well_edges,
        })
    }

    fn n(&self) -> usize {
        self.n_matrix + self.n_fracture
    }

    fn with_values(&self, values: Vec<f64>) -> CsrMatrix {
        let mut m = self.pattern.clone();
        m.values_mut().copy_from_slice(&values);
        m
    }
}

/// Per-element coefficients of one evaluation of the model.
#[derive(Debug, Clone)]
struct ElementCoefficients {
    tri_a: Vec<f64>,
    tri_b: Vec<f64>,
    edge_bf: Vec<f64>,
    edge_sigma: Vec<f64>,
}

/// Global operators `S(c)`, `D(c)` with coefficients frozen at one state.
#[derive(Debug, Clone)]
pub struct NonlinearEvaluation {
    pub s: CsrMatrix,
    pub d: CsrMatrix,
}

/// The fixed linear operator `A = S_lin + tau D_lin` with everything needed
/// to evaluate the nonlinear operators and right-hand sides.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    layout: Layout,
    model: CoefficientModel,
    field: CoefficientField,
    tau: f64,
    treatment: WellTreatment,
    phi_f: f64,
    g0: f64,
    g1: f64,
    starred: ElementCoefficients,
    s_lin: CsrMatrix,
    d_lin: CsrMatrix,
    a: CsrMatrix,
    well_mass: CsrMatrix,
    well_load: Vec<f64>,
}

/// Assembles `S_lin`, `D_lin` from the upper-bound coefficients and forms
/// `A = S_lin + tau D_lin`.
pub fn build_linear_operator(
    mesh: &FineMesh,
    model: &CoefficientModel,
    field: &CoefficientField,
    tau: f64,
    wells: &[WellBox],
    treatment: WellTreatment,
) -> Result<BlockSystem, AssemblyError> {
    BlockSystem::build(mesh, model, field, tau, wells, treatment)
}

/// `b^n = S_lin c^n + tau F - (S_n - S_lin)(c^n - c^{n-1}) - tau (D_n - D_lin) c^n`.
pub fn build_rhs(sys: &BlockSystem, c_n: &[f64], c_prev: &[f64]) -> Result<Vec<f64>, AssemblyError> {
    sys.rhs(c_n, c_prev)
}

impl BlockSystem {
    pub fn build(
        mesh: &FineMesh,
        model: &CoefficientModel,
        field: &CoefficientField,
        tau: f64,
        wells: &[WellBox],
        treatment: WellTreatment,
    ) -> Result<Self, AssemblyError> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(AssemblyError::NonPositiveStep { tau });
        }
        model.constants.validate()?;
        field.validate(mesh)?;
        let layout = Layout::new(mesh, wells)?;
        let src = model.constants.well_source();
        let starred = ElementCoefficients {
            tri_a: field.cells.iter().map(|m| model.bounds(m).a_m).collect(),
            tri_b: field.cells.iter().map(|m| model.bounds(m).b_m).collect(),
            edge_bf: field.kappa_f.iter().map(|&k| model.b_f_bound(k)).collect(),
            edge_sigma: field.edges.iter().map(|m| model.bounds(m).sigma).collect(),
        };
        let mut sys = Self {
            well_mass: layout.pattern.clone(),
            s_lin: layout.pattern.clone(),
            d_lin: layout.pattern.clone(),
            a: layout.pattern.clone(),
            well_load: vec![0.0; layout.n()],
            layout,
            model: *model,
            field: field.clone(),
            tau,
            treatment,
            phi_f: model.a_f(),
            g0: src.g0,
            g1: src.g1,
            starred,
        };
        let mut wm = vec![0.0; sys.layout.pattern.nnz()];
        sys.add_well_mass(&mut wm, 1.0);
        sys.well_mass = sys.layout.with_values(wm);
        let ones = vec![1.0; sys.layout.n()];
        sys.well_load = sys.well_mass.matvec(&ones);
        for v in sys.well_load.iter_mut() {
            *v *= sys.g0;
        }
        sys.s_lin = sys.assemble_s(&sys.starred);
        sys.d_lin = sys.assemble_d(&sys.starred);
        sys.a = sys.s_lin.add_scaled(&sys.d_lin, tau)?;
        if sys.a.asymmetry() > 1e-13 {
            return Err(AssemblyError::NotSpd("asymmetric operator"));
        }
        if sys.a.diagonal().iter().any(|&d| !(d > 0.0)) {
            return Err(AssemblyError::NotSpd("non-positive diagonal"));
        }
        Ok(sys)
    }

    fn add_well_mass(&self, values: &mut [f64], scale: f64) {
        for &(e, inside) in &self.layout.well_edges {
            let m = edge_mass_element(self.layout.edge_len[e]);
            let pos = &self.layout.edge_pos[e];
            for i in 0..2 {
                for j in 0..2 {
                    if inside[i] && inside[j] {
                        values[pos[4 * (2 + i) + 2 + j]] += scale * m[i][j];
                    }
                }
            }
        }
    }

    fn assemble_s(&self, co: &ElementCoefficients) -> CsrMatrix {
        let l = &self.layout;
        let mut v = vec![0.0; l.pattern.nnz()];
        for t in 0..l.tri_vertices.len() {
            let m = &l.tri_mass[t];
            let p = &l.tri_pos[t];
            for i in 0..3 {
                for j in 0..3 {
                    v[p[3 * i + j]] += co.tri_a[t] * m[i][j];
                }
            }
        }
        for e in 0..l.edge_dofs.len() {
            let m = edge_mass_element(l.edge_len[e]);
            let p = &l.edge_pos[e];
            for i in 0..2 {
                for j in 0..2 {
                    v[p[4 * (2 + i) + 2 + j]] += self.phi_f * m[i][j];
                }
            }
        }
        l.with_values(v)
    }

    fn assemble_d(&self, co: &ElementCoefficients) -> CsrMatrix {
        let l = &self.layout;
        let mut v = vec![0.0; l.pattern.nnz()];
        for t in 0..l.tri_vertices.len() {
            let k = &l.tri_stiff[t];
            let p = &l.tri_pos[t];
            for i in 0..3 {
                for j in 0..3 {
                    v[p[3 * i + j]] += co.tri_b[t] * k[i][j];
                }
            }
        }
        for e in 0..l.edge_dofs.len() {
            let m = edge_mass_element(l.edge_len[e]);
            let k = edge_stiffness_element(l.edge_len[e]);
            let p = &l.edge_pos[e];
            let (bf, s) = (co.edge_bf[e], co.edge_sigma[e]);
            for i in 0..2 {
                for j in 0..2 {
                    v[p[4 * (2 + i) + 2 + j]] += bf * k[i][j] + s * m[i][j];
                    v[p[4 * i + j]] += s * m[i][j];
                    v[p[4 * i + 2 + j]] -= s * m[i][j];
                    v[p[4 * (2 + i) + j]] -= s * m[i][j];
                }
            }
        }
        if self.treatment == WellTreatment::Implicit {
            self.add_well_mass(&mut v, self.g1);
        }
        l.with_values(v)
    }

    fn coefficients_at(&self, c: &[f64]) -> Result<ElementCoefficients, AssemblyError> {
        let l = &self.layout;
        if c.len() != l.n() {
            return Err(AssemblyError::LengthMismatch {
                expected: l.n(),
                found: c.len(),
            });
        }
        if let Some(&value) = c.iter().find(|&&x| x < 0.0 || x.is_nan()) {
            return Err(crate::physics::PhysicsError::NegativeConcentration { value }.into());
        }
        let mut co = ElementCoefficients {
            tri_a: Vec::with_capacity(l.tri_vertices.len()),
            tri_b: Vec::with_capacity(l.tri_vertices.len()),
            edge_bf: Vec::with_capacity(l.edge_dofs.len()),
            edge_sigma: Vec::with_capacity(l.edge_dofs.len()),
        };
        for (t, tri) in l.tri_vertices.iter().enumerate() {
            let cbar = (c[tri[0]] + c[tri[1]] + c[tri[2]]) / 3.0;
            let mat = &self.field.cells[t];
            co.tri_a.push(self.model.a_m(mat, cbar)?);
            co.tri_b.push(self.model.b_m(mat, cbar)?);
        }
        for (e, d) in l.edge_dofs.iter().enumerate() {
            let cm = 0.5 * (c[d[0]] + c[d[1]]);
            let cf = 0.5 * (c[d[2]] + c[d[3]]);
            co.edge_bf.push(self.model.b_f(self.field.kappa_f[e], cf)?);
            co.edge_sigma.push(self.model.sigma(&self.field.edges[e], cm)?);
        }
        Ok(co)
    }

    /// `S(c)` and `D(c)` on the shared pattern.
    pub fn evaluate(&self, c: &[f64]) -> Result<NonlinearEvaluation, AssemblyError> {
        let co = self.coefficients_at(c)?;
        Ok(NonlinearEvaluation {
            s: self.assemble_s(&co),
            d: self.assemble_d(&co),
        })
    }

    /// Source vector `F` at state `c^n`.
    pub fn load(&self, c_n: &[f64]) -> Vec<f64> {
        let mut f = self.well_load.clone();
        if self.treatment == WellTreatment::Explicit {
            let m = self.well_mass.matvec(c_n);
            for (fi, mi) in f.iter_mut().zip(m) {
                *fi -= self.g1 * mi;
            }
        }
        f
    }

    /// Implicit source vector `g0 M_box 1`.
    pub fn implicit_load(&self) -> &[f64] {
        &self.well_load
    }

    pub fn rhs(&self, c_n: &[f64], c_prev: &[f64]) -> Result<Vec<f64>, AssemblyError> {
        let n = self.layout.n();
        if c_prev.len() != n {
            return Err(AssemblyError::LengthMismatch {
                expected: n,
                found: c_prev.len(),
            });
        }
        let ev = self.evaluate(c_n)?;
        Ok(self.rhs_with(&ev, c_n, c_prev))
    }

    /// Right-hand side from a precomputed evaluation at `c_n`.
    pub fn rhs_with(&self, ev: &NonlinearEvaluation, c_n: &[f64], c_prev: &[f64]) -> Vec<f64> {
        let n = self.layout.n();
        let rp = self.layout.pattern.row_ptr();
        let ci = self.layout.pattern.col_idx();
        let (sl, dl) = (self.s_lin.values(), self.d_lin.values());
        let (sn, dn) = (ev.s.values(), ev.d.values());
        let f = self.load(c_n);
        let mut b = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.tau * f[i];
            for k in rp[i]..rp[i + 1] {
                let j = ci[k];
                acc += sl[k] * c_n[j] - (sn[k] - sl[k]) * (c_n[j] - c_prev[j]) - self.tau * (dn[k] - dl[k]) * c_n[j];
            }
            b[i] = acc;
        }
        b
    }

    /// Dense `tau D_lin` (plus `S_lin` when `with_mass`) integrated only over
    /// the listed triangles and fracture edges, on the sorted local `dofs`.
    pub fn assemble_local(&self, triangles: &[usize], edges: &[usize], dofs: &[usize], with_mass: bool) -> DenseSymmetricMatrix {
        let l = &self.layout;
        let co = &self.starred;
        let local = |g: usize| dofs.binary_search(&g).expect("element DOF lies in the local set");
        let mut out = DenseSymmetricMatrix::zeros(dofs.len());
        for &t in triangles {
            let idx = l.tri_vertices[t].map(local);
            let (m, k) = (&l.tri_mass[t], &l.tri_stiff[t]);
            for i in 0..3 {
                for j in 0..3 {
                    let mut v = self.tau * co.tri_b[t] * k[i][j];
                    if with_mass {
                        v += co.tri_a[t] * m[i][j];
                    }
                    out.add(idx[i], idx[j], v);
                }
            }
        }
        let mut well_flags = vec![[false; 2]; 0];
        for &e in edges {
            let idx = l.edge_dofs[e].map(local);
            let m = edge_mass_element(l.edge_len[e]);
            let k = edge_stiffness_element(l.edge_len[e]);
            let (bf, s) = (co.edge_bf[e], co.edge_sigma[e]);
            well_flags.clear();
            if self.treatment == WellTreatment::Implicit {
                well_flags.extend(l.well_edges.iter().filter(|w| w.0 == e).map(|w| w.1));
            }
            for i in 0..2 {
                for j in 0..2 {
                    let mut ff = self.tau * (bf * k[i][j] + s * m[i][j]);
                    for w in &well_flags {
                        if w[i] && w[j] {
                            ff += self.tau * self.g1 * m[i][j];
                        }
                    }
                    if with_mass {
                        ff += self.phi_f * m[i][j];
                    }
                    out.add(idx[2 + i], idx[2 + j], ff);
                    out.add(idx[i], idx[j], self.tau * s * m[i][j]);
                    out.add(idx[i], idx[2 + j], -self.tau * s * m[i][j]);
                    out.add(idx[2 + i], idx[j], -self.tau * s * m[i][j]);
                }
            }
        }
        out
    }

    pub fn a(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn s_lin(&self) -> &CsrMatrix {
        &self.s_lin
    }

    pub fn d_lin(&self) -> &CsrMatrix {
        &self.d_lin
    }

    /// Unweighted fracture mass restricted to well-box DOFs.
    pub fn well_mass(&self) -> &CsrMatrix {
        &self.well_mass
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn treatment(&self) -> WellTreatment {
        self.treatment
    }

    pub fn model(&self) -> &CoefficientModel {
        &self.model
    }

    pub fn field(&self) -> &CoefficientField {
        &self.field
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.n()
    }

    pub fn n_matrix_dofs(&self) -> usize {
        self.layout.n_matrix
    }

    pub fn n_fracture_dofs(&self) -> usize {
        self.layout.n_fracture
    }

    /// Whether any well box is active.
    pub fn has_wells(&self) -> bool {
        !self.layout.well_edges.is_empty()
    }
}
