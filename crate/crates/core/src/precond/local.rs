use alloc::vec::Vec;

use super::PrecondError;
use crate::assembly::BlockSystem;
use crate::linalg::{generalized_eig_diag_lowest, DenseSymmetricMatrix, EigenMethod, SymmetricEigen};
use crate::mesh::{CoarseCover, FineMesh};

/// Bilinear form integrated over `omega_i` for the local spectral problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalOperator {
    /// `tau D_lin` only; keeps the constant near-null mode.
    #[default]
    DiffusionOnly,
    /// `S_lin + tau D_lin`.
    FullA,
}

/// How many eigenvectors each domain contributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisRule {
    /// Exactly `m` per domain.
    Fixed(usize),
    /// Every eigenvalue below `delta`, at least one.
    Adaptive { delta: f64 },
    /// One more than [`BasisRule::Adaptive`].
    AdaptivePlusOne { delta: f64 },
}

impl BasisRule {
    /// Number of leading eigenpairs the rule may need, including the next
    /// eigenvalue used by the projection bound.
    pub(super) fn budget(&self, k_max: usize) -> usize {
        match *self {
            BasisRule::Fixed(m) => k_max.max(m + 1),
            _ => k_max,
        }
    }

    /// `(m, clamped)` for an ascending spectrum computed up to `available` pairs
    /// out of `local_size`.
    pub fn count(&self, values: &[f64], local_size: usize) -> (usize, bool) {
        let below = |delta: f64| values.iter().take_while(|&&l| l < delta).count().max(1);
        let want = match *self {
            BasisRule::Fixed(m) => m.max(1),
            BasisRule::Adaptive { delta } => below(delta),
            BasisRule::AdaptivePlusOne { delta } => below(delta) + 1,
        };
        let cap = values.len().min(local_size);
        if want > cap {
            (cap, true)
        } else {
            (want, false)
        }
    }
}

/// Local operator of one domain with its leading generalized eigenpairs
/// `A psi = lambda D psi`, `D = diag(A)`.
#[derive(Debug, Clone)]
pub struct LocalSpectralProblem {
    pub domain: usize,
    /// Global DOFs that carry a nonzero diagonal, ascending.
    pub dofs: Vec<usize>,
    /// `chi_i` at each entry of `dofs`.
    pub chi: Vec<f64>,
    pub a: DenseSymmetricMatrix,
    pub d: Vec<f64>,
    pub eigen: SymmetricEigen,
    /// Domain DOFs left out for having no element inside `omega_i`.
    pub dropped: usize,
}

impl LocalSpectralProblem {
    pub fn values(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    /// `P_omega v = sum_k (psi_k^T D v) psi_k` over the first `m` modes.
    pub fn project(&self, m: usize, v: &[f64]) -> Result<Vec<f64>, PrecondError> {
        let n = self.dofs.len();
        if v.len() != n {
            return Err(PrecondError::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        if m > self.eigen.len() {
            return Err(PrecondError::DimensionMismatch {
                expected: self.eigen.len(),
                found: m,
            });
        }
        let mut out = alloc::vec![0.0; n];
        for k in 0..m {
            let coef: f64 = (0..n).map(|j| self.eigen.vectors[(j, k)] * self.d[j] * v[j]).sum();
            for (j, o) in out.iter_mut().enumerate() {
                *o += coef * self.eigen.vectors[(j, k)];
            }
        }
        Ok(out)
    }

    pub fn d_norm_sq(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.d).map(|(x, d)| d * x * x).sum()
    }
}

/// Triangles whose centroid lies in `omega_i` and fracture edges whose
/// midpoint lies in `omega_i` with `chi_i > 0` there.
pub fn domain_elements(mesh: &FineMesh, cover: &CoarseCover, i: usize) -> (Vec<usize>, Vec<usize>) {
    let dom = cover.domain(i);
    let tris = (0..mesh.triangles().len())
        .filter(|&t| dom.contains(mesh.triangle_centroid(t)))
        .collect();
    let edges = (0..mesh.fracture_edges().len())
        .filter(|&e| {
            let mid = mesh.edge_midpoint(e);
            dom.contains(mid) && cover.chi_at(i, mid) > 0.0
        })
        .collect();
    (tris, edges)
}

/// Restricted bilinear form of domain `i` on its DOFs, before dropping.
pub fn assemble_local_operator(
    sys: &BlockSystem,
    mesh: &FineMesh,
    cover: &CoarseCover,
    i: usize,
    op: LocalOperator,
) -> Result<DenseSymmetricMatrix, PrecondError> {
    let dofs = &cover.domain(i).dofs;
    if dofs.is_empty() {
        return Err(PrecondError::EmptyDomain { index: i });
    }
    let (tris, edges) = domain_elements(mesh, cover, i);
    if tris.is_empty() {
        return Err(PrecondError::EmptyDomain { index: i });
    }
    Ok(sys.assemble_local(&tris, &edges, dofs, op == LocalOperator::FullA))
}

pub fn solve_local_eigenproblem(
    sys: &BlockSystem,
    mesh: &FineMesh,
    cover: &CoarseCover,
    i: usize,
    op: LocalOperator,
    k_max: usize,
    method: EigenMethod,
) -> Result<LocalSpectralProblem, PrecondError> {
    let full = assemble_local_operator(sys, mesh, cover, i, op)?;
    let dom = cover.domain(i);
    let diag = full.diagonal();
    let keep: Vec<usize> = (0..diag.len()).filter(|&k| diag[k] > 0.0).collect();
    let dropped = diag.len() - keep.len();
    for k in (0..diag.len()).filter(|k| !(diag[*k] > 0.0)) {
        if dom.chi[k] != 0.0 {
            log::debug!("domain {i}: DOF {} with chi {} has no local element", dom.dofs[k], dom.chi[k]);
        }
    }
    let a = DenseSymmetricMatrix::from_upper_fn(keep.len(), |r, c| full.get(keep[r], keep[c]));
    let d: Vec<f64> = keep.iter().map(|&k| diag[k]).collect();
    let eigen = generalized_eig_diag_lowest(&a, &d, k_max.min(keep.len()), method)?;
    Ok(LocalSpectralProblem {
        domain: i,
        dofs: keep.iter().map(|&k| dom.dofs[k]).collect(),
        chi: keep.iter().map(|&k| dom.chi[k]).collect(),
        a,
        d,
        eigen,
        dropped,
    })
}
