use alloc::vec::Vec;

use super::TimestepError;
use crate::assembly::BlockSystem;
use crate::linalg::{sym_eigenvalues, CsrMatrix, DenseSymmetricMatrix};
use crate::physics::{DominanceMargins, MatrixMaterial};

/// Largest system for which the dense matrix-level check runs.
pub const DENSE_CHECK_LIMIT: usize = 400;

/// Margins of the splitting hypothesis `S_lin >= S(c)`, `D_lin >= D(c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingReport {
    /// Smallest coefficient margins over all materials of the field.
    pub coefficient: DominanceMargins,
    /// Smallest eigenvalue of `S_lin - S(c)` over the supplied states.
    pub s_min_eigenvalue: Option<f64>,
    /// Smallest eigenvalue of `D_lin - D(c)` over the supplied states.
    pub d_min_eigenvalue: Option<f64>,
    pub passed: bool,
}

fn min_eigenvalue(lin: &CsrMatrix, cur: &CsrMatrix) -> Result<(f64, f64), TimestepError> {
    let diff = lin.add_scaled(cur, -1.0)?;
    let dense = DenseSymmetricMatrix::from_dense(diff.to_dense(), 1e-10 * (1.0 + diff.to_dense().max_abs()))?;
    let scale = dense.max_abs();
    let lo = sym_eigenvalues(&dense).first().copied().unwrap_or(0.0);
    Ok((lo, scale))
}

/// Coefficient dominance on `samples` points of `[c_min, c_max]` for every
/// distinct material, and, for systems with at most [`DENSE_CHECK_LIMIT`]
/// DOFs, matrix dominance at each of `states`.
pub fn check_splitting_bounds(sys: &BlockSystem, states: &[Vec<f64>], samples: usize) -> Result<SplittingReport, TimestepError> {
    let model = sys.model();
    let field = sys.field();
    let mut materials: Vec<MatrixMaterial> = Vec::new();
    for m in field.cells.iter().chain(&field.edges) {
        if !materials.contains(m) {
            materials.push(*m);
        }
    }
    let mut kappas: Vec<f64> = Vec::new();
    for &k in &field.kappa_f {
        if !kappas.contains(&k) {
            kappas.push(k);
        }
    }
    let kappa_probe = kappas.first().copied().unwrap_or(model.constants.kappa_f);
    let mut coefficient = DominanceMargins {
        a_m: f64::INFINITY,
        b_m: f64::INFINITY,
        b_f: f64::INFINITY,
    };
    for mat in &materials {
        let m = model.dominance_margins(mat, kappa_probe, samples);
        coefficient.a_m = coefficient.a_m.min(m.a_m);
        coefficient.b_m = coefficient.b_m.min(m.b_m);
    }
    let probe = materials.first().copied().unwrap_or(MatrixMaterial::homogeneous(&model.constants));
    for &k in &kappas {
        coefficient.b_f = coefficient.b_f.min(model.dominance_margins(&probe, k, samples).b_f);
    }
    if kappas.is_empty() {
        coefficient.b_f = 0.0;
    }

    let mut passed = coefficient.holds();
    let (mut s_min, mut d_min) = (None, None);
    if sys.n_dofs() <= DENSE_CHECK_LIMIT {
        for c in states {
            let ev = sys.evaluate(c)?;
            let (s, s_scale) = min_eigenvalue(sys.s_lin(), &ev.s)?;
            let (d, d_scale) = min_eigenvalue(sys.d_lin(), &ev.d)?;
            passed &= s >= -1e-12 * s_scale.max(1.0) && d >= -1e-12 * d_scale.max(1.0);
            s_min = Some(s_min.map_or(s, |v: f64| v.min(s)));
            d_min = Some(d_min.map_or(d, |v: f64| v.min(d)));
        }
    }
    Ok(SplittingReport {
        coefficient,
        s_min_eigenvalue: s_min,
        d_min_eigenvalue: d_min,
        passed,
    })
}
