//! Adaptive spectral two-grid preconditioner.
//!
//! Each coarse node neighborhood `omega_i` contributes the leading
//! eigenvectors of its local operator against the diagonal, multiplied by the
//! partition of unity `chi_i`. The coarse operator is the Galerkin product
//! `P^T A P`, solved exactly, and the cycle wraps it in symmetric
//! Gauss-Seidel smoothing so that it can drive PCG.

mod analysis;
mod local;

pub use analysis::{
    estimate_two_grid_condition, galerkin_accumulated, gauss_seidel_equivalence, measure_contraction, TwoGridCondition,
};
pub use local::{
    assemble_local_operator, domain_elements, solve_local_eigenproblem, BasisRule, LocalOperator, LocalSpectralProblem,
};

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::assembly::{AssemblyError, BlockSystem};
use crate::linalg::{
    CholeskyFactor, CsrMatrix, DenseSymmetricMatrix, EigenMethod, GaussSeidel, LinalgError, Preconditioner,
    SweepDirection,
};
use crate::mesh::{CoarseCover, FineMesh};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrecondError {
    #[error("coarse domain {index} has no DOFs or elements")]
    EmptyDomain { index: usize },
    #[error("prolongation column for domain {domain}, mode {mode} vanishes")]
    ZeroColumn { domain: usize, mode: usize },
    #[error("expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dense analysis limited to {limit} DOFs, system has {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("preconditioned spectrum has eigenvalue {value:e} outside the admissible range")]
    Spectrum { value: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoGridConfig {
    /// Gauss-Seidel sweeps before and after the coarse correction.
    pub nu: usize,
    pub rule: BasisRule,
    pub operator: LocalOperator,
    /// Eigenpairs computed per domain.
    pub k_max: usize,
    pub method: EigenMethod,
}

impl Default for TwoGridConfig {
    fn default() -> Self {
        Self {
            nu: 5,
            rule: BasisRule::Adaptive { delta: 1e-3 },
            operator: LocalOperator::DiffusionOnly,
            k_max: 32,
            method: EigenMethod::Tridiagonal,
        }
    }
}

/// Per-domain mode counts and the resulting coarse dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSelection {
    pub rule: BasisRule,
    pub counts: Vec<usize>,
    pub n_coarse: usize,
    /// Domains whose request exceeded the available modes.
    pub clamped: Vec<usize>,
}

/// Applies the rule to every local spectrum.
pub fn select_modes(problems: &[LocalSpectralProblem], rule: BasisRule) -> ModeSelection {
    let mut counts = Vec::with_capacity(problems.len());
    let mut clamped = Vec::new();
    for p in problems {
        let (m, c) = rule.count(p.values(), p.len());
        if c {
            log::warn!("domain {}: basis request clamped to {m} modes", p.domain);
            clamped.push(p.domain);
        }
        counts.push(m);
    }
    ModeSelection {
        rule,
        n_coarse: counts.iter().sum(),
        counts,
        clamped,
    }
}

/// `P = [chi_1 psi_1^1, ..., chi_1 psi_{m_1}^1, chi_2 psi_1^2, ...]`.
pub fn build_prolongation(
    n_dofs: usize,
    problems: &[LocalSpectralProblem],
    selection: &ModeSelection,
) -> Result<CsrMatrix, PrecondError> {
    let mut trip = Vec::new();
    let mut col = 0;
    for (p, &m) in problems.iter().zip(&selection.counts) {
        for k in 0..m {
            let mut norm_sq = 0.0;
            let mut psi_sq = 0.0;
            for (j, &g) in p.dofs.iter().enumerate() {
                let psi = p.eigen.vectors[(j, k)];
                let v = p.chi[j] * psi;
                psi_sq += psi * psi;
                if v != 0.0 {
                    norm_sq += v * v;
                    trip.push((g, col, v));
                }
            }
            if !(norm_sq > 1e-24 * psi_sq) {
                return Err(PrecondError::ZeroColumn { domain: p.domain, mode: k });
            }
            col += 1;
        }
    }
    Ok(CsrMatrix::from_triplets(n_dofs, col, &trip)?)
}

fn local_problems(
    sys: &BlockSystem,
    mesh: &FineMesh,
    cover: &CoarseCover,
    config: &TwoGridConfig,
) -> Result<Vec<LocalSpectralProblem>, PrecondError> {
    let k = config.rule.budget(config.k_max);
    let solve = |i: usize| solve_local_eigenproblem(sys, mesh, cover, i, config.operator, k, config.method);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..cover.n_domains()).into_par_iter().map(solve).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..cover.n_domains()).map(solve).collect()
    }
}

/// The symmetric two-grid cycle built once against the fixed operator `A`.
#[derive(Debug, Clone)]
pub struct TwoGridPreconditioner {
    a: CsrMatrix,
    p: CsrMatrix,
    pt: CsrMatrix,
    a_coarse: DenseSymmetricMatrix,
    coarse: CholeskyFactor,
    smoother: GaussSeidel,
    nu: usize,
    problems: Vec<LocalSpectralProblem>,
    selection: ModeSelection,
}

impl TwoGridPreconditioner {
    pub fn build(sys: &BlockSystem, mesh: &FineMesh, cover: &CoarseCover, config: &TwoGridConfig) -> Result<Self, PrecondError> {
        let problems = local_problems(sys, mesh, cover, config)?;
        let selection = select_modes(&problems, config.rule);
        let p = build_prolongation(sys.n_dofs(), &problems, &selection)?;
        Self::from_parts(sys.a().clone(), p, config.nu, problems, selection)
    }

    /// Two-grid cycle for an arbitrary SPD `a` and prolongation `p`.
    pub fn from_prolongation(a: CsrMatrix, p: CsrMatrix, nu: usize) -> Result<Self, PrecondError> {
        let selection = ModeSelection {
            rule: BasisRule::Fixed(p.n_cols()),
            counts: vec![p.n_cols()],
            n_coarse: p.n_cols(),
            clamped: Vec::new(),
        };
        Self::from_parts(a, p, nu, Vec::new(), selection)
    }

    fn from_parts(
        a: CsrMatrix,
        p: CsrMatrix,
        nu: usize,
        problems: Vec<LocalSpectralProblem>,
        selection: ModeSelection,
    ) -> Result<Self, PrecondError> {
        if p.n_rows() != a.n_rows() {
            return Err(PrecondError::DimensionMismatch {
                expected: a.n_rows(),
                found: p.n_rows(),
            });
        }
        let pt = p.transpose();
        let ap = a.matmul(&p)?;
        let ah = pt.matmul(&ap)?;
        let a_coarse = DenseSymmetricMatrix::from_upper_fn(p.n_cols(), |i, j| 0.5 * (ah.get(i, j) + ah.get(j, i)));
        let coarse = CholeskyFactor::new(&a_coarse)?;
        let smoother = GaussSeidel::new(&a)?;
        Ok(Self {
            a,
            p,
            pt,
            a_coarse,
            coarse,
            smoother,
            nu,
            problems,
            selection,
        })
    }

    pub fn n(&self) -> usize {
        self.a.n_rows()
    }

    pub fn n_coarse(&self) -> usize {
        self.p.n_cols()
    }

    pub fn prolongation(&self) -> &CsrMatrix {
        &self.p
    }

    pub fn coarse_operator(&self) -> &DenseSymmetricMatrix {
        &self.a_coarse
    }

    pub fn operator(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn problems(&self) -> &[LocalSpectralProblem] {
        &self.problems
    }

    pub fn selection(&self) -> &ModeSelection {
        &self.selection
    }

    /// `y = B_TG^{-1} r`: pre-smoothing from zero, exact coarse correction,
    /// post-smoothing with the transposed sweeps.
    pub fn two_grid_apply(&self, r: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; r.len()];
        self.apply_into(r, &mut y);
        y
    }

    fn apply_into(&self, r: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..self.nu {
            self.smoother.sweep(&self.a, r, y, SweepDirection::Forward);
        }
        let mut res = self.a.matvec(y);
        for (ri, bi) in res.iter_mut().zip(r) {
            *ri = bi - *ri;
        }
        let mut e = self.pt.matvec(&res);
        self.coarse.solve_in_place(&mut e);
        let corr = self.p.matvec(&e);
        for (yi, ci) in y.iter_mut().zip(&corr) {
            *yi += ci;
        }
        for _ in 0..self.nu {
            self.smoother.sweep(&self.a, r, y, SweepDirection::Backward);
        }
    }
}

impl Preconditioner for TwoGridPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.apply_into(r, z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_linear_operator, WellTreatment};
    use crate::linalg::{pcg_solve, IdentityPreconditioner};
    use crate::mesh::{build_structured_mesh, embed_fractures, Segment};
    use crate::physics::{CoefficientField, CoefficientModel, PhysicalConstants};

    fn setup(n: usize, kf: f64, segs: &[Segment]) -> (FineMesh, BlockSystem) {
        let mesh = build_structured_mesh(n).unwrap();
        let mesh = embed_fractures(&mesh, segs).unwrap();
        let k = PhysicalConstants::default().with_contrast(kf);
        let model = CoefficientModel::new(k).unwrap();
        let field = CoefficientField::homogeneous(&mesh, &k);
        let sys = build_linear_operator(&mesh, &model, &field, 86400.0 / 10.0, &[], WellTreatment::Implicit).unwrap();
        (mesh, sys)
    }

    #[test]
    fn rule_counts() {
        let l = [1.12e-16, 1.23e-12, 4.08e-3, 9.83e-3, 1.19e-2];
        assert_eq!(BasisRule::Adaptive { delta: 1e-3 }.count(&l, 50), (2, false));
        assert_eq!(BasisRule::Adaptive { delta: 1e-2 }.count(&l, 50), (4, false));
        assert_eq!(BasisRule::AdaptivePlusOne { delta: 1e-3 }.count(&l, 50), (3, false));
        assert_eq!(BasisRule::Adaptive { delta: 1e-20 }.count(&l, 50), (1, false));
        assert_eq!(BasisRule::Fixed(8).count(&l, 5), (5, true));
    }

    #[test]
    fn complete_coarse_space_is_exact() {
        let (mesh, sys) = setup(4, 1e6, &[Segment::new([0.0, 0.5], [1.0, 0.5])]);
        let cover = CoarseCover::single_domain(&mesh);
        let config = TwoGridConfig {
            rule: BasisRule::Fixed(sys.n_dofs()),
            k_max: sys.n_dofs(),
            ..Default::default()
        };
        let tg = TwoGridPreconditioner::build(&sys, &mesh, &cover, &config).unwrap();
        assert_eq!(tg.n_coarse(), sys.n_dofs());
        let b: Vec<f64> = (0..sys.n_dofs()).map(|i| 1.0 + (i % 7) as f64).collect();
        let (_, rep) = pcg_solve(sys.a(), &b, &tg, 1e-9, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        let (_, plain) = pcg_solve(sys.a(), &b, &IdentityPreconditioner, 1e-9, 10_000).unwrap();
        assert!(plain.iterations > 1);
    }

    #[test]
    fn cover_build_and_apply_is_symmetric() {
        let (mesh, sys) = setup(8, 1e6, &[Segment::new([0.0, 0.3], [1.0, 0.7])]);
        let cover = CoarseCover::build(&mesh, 2).unwrap();
        let tg = TwoGridPreconditioner::build(&sys, &mesh, &cover, &TwoGridConfig::default()).unwrap();
        assert_eq!(tg.selection().counts.len(), 9);
        assert!(tg.selection().counts.iter().all(|&m| m >= 1));
        let n = sys.n_dofs();
        let u: Vec<f64> = (0..n).map(|i| libm::sin(i as f64)).collect();
        let v: Vec<f64> = (0..n).map(|i| libm::cos(3.0 * i as f64)).collect();
        let bu = tg.two_grid_apply(&u);
        let bv = tg.two_grid_apply(&v);
        let lhs: f64 = bu.iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs: f64 = u.iter().zip(&bv).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()));
    }
}
