use alloc::vec::Vec;

use super::{PrecondError, TwoGridPreconditioner};
use crate::linalg::{sym_eigenvalues, CholeskyFactor, CsrMatrix, DenseMatrix, DenseSymmetricMatrix};
use crate::math::sqrt;

/// Largest system the dense estimators accept.
pub const DENSE_LIMIT: usize = 2000;

/// Dense spectral data of the preconditioned operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoGridCondition {
    /// Ascending eigenvalues of `B_TG^{-1} A`.
    pub spectrum: Vec<f64>,
    /// `lambda_max / lambda_min` of `B_TG^{-1} A`.
    pub k_tg: f64,
    /// `1 - 1/K_TG`.
    pub rho_tg: f64,
}

impl TwoGridCondition {
    /// Eigenvalues of `A^{-1} B_TG`, which lie in `[1, K_TG]` when
    /// `v^T A v <= v^T B_TG v`.
    pub fn inverse_spectrum(&self) -> Vec<f64> {
        self.spectrum.iter().rev().map(|l| 1.0 / l).collect()
    }
}

fn check_size(n: usize) -> Result<(), PrecondError> {
    if n > DENSE_LIMIT {
        Err(PrecondError::TooLarge { n, limit: DENSE_LIMIT })
    } else {
        Ok(())
    }
}

fn dense_symmetric(a: &CsrMatrix) -> DenseSymmetricMatrix {
    let d = a.to_dense();
    DenseSymmetricMatrix::from_upper_fn(a.n_rows(), |i, j| 0.5 * (d[(i, j)] + d[(j, i)]))
}

/// Forms `L^T B_TG^{-1} L` with `A = L L^T` by applying the cycle to the
/// columns of `L`; its eigenvalues are those of `B_TG^{-1} A`.
pub fn estimate_two_grid_condition(tg: &TwoGridPreconditioner) -> Result<TwoGridCondition, PrecondError> {
    let n = tg.n();
    check_size(n)?;
    let chol = CholeskyFactor::new(&dense_symmetric(tg.operator()))?;
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let l: Vec<f64> = (0..n).map(|i| chol.l(i, j)).collect();
            tg.two_grid_apply(&l)
        })
        .collect();
    let z = DenseMatrix::from_columns(n, &cols);
    let m = DenseSymmetricMatrix::from_upper_fn(n, |i, j| {
        let mut s_ij = 0.0;
        let mut s_ji = 0.0;
        for k in i.min(j)..n {
            s_ij += chol.l(k, i) * z[(k, j)];
            s_ji += chol.l(k, j) * z[(k, i)];
        }
        0.5 * (s_ij + s_ji)
    });
    let spectrum = sym_eigenvalues(&m);
    let lo = spectrum[0];
    let hi = spectrum[n - 1];
    if lo <= 0.0 {
        return Err(PrecondError::Spectrum { value: lo });
    }
    let k_tg = hi / lo;
    Ok(TwoGridCondition {
        spectrum,
        k_tg,
        rho_tg: 1.0 - 1.0 / k_tg,
    })
}

/// Asymptotic `A`-norm contraction of the stationary iteration
/// `x <- x + B_TG^{-1} (b - A x)`, by power iteration on its error operator.
pub fn measure_contraction(tg: &TwoGridPreconditioner, iterations: usize) -> f64 {
    let a = tg.operator();
    let n = tg.n();
    let mut e: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 + 1.0;
            libm::sin(1.3 * t) + 0.5 * libm::cos(0.37 * t * t)
        })
        .collect();
    let a_norm = |v: &[f64]| sqrt(a.quad_form(v).max(0.0));
    let mut rho = 0.0;
    let mut norm = a_norm(&e);
    for _ in 0..iterations {
        if norm == 0.0 {
            return 0.0;
        }
        for v in e.iter_mut() {
            *v /= norm;
        }
        let ae = a.matvec(&e);
        let corr = tg.two_grid_apply(&ae);
        for (v, c) in e.iter_mut().zip(&corr) {
            *v -= c;
        }
        norm = a_norm(&e);
        rho = norm;
    }
    rho
}

/// `P^T A P` accumulated one column at a time, an independent check of the
/// sparse triple product.
pub fn galerkin_accumulated(a: &CsrMatrix, p: &CsrMatrix) -> DenseSymmetricMatrix {
    let nh = p.n_cols();
    let pd = p.to_dense();
    let cols: Vec<Vec<f64>> = (0..nh).map(|j| pd.column(j)).collect();
    let mut out = DenseSymmetricMatrix::zeros(nh);
    for j in 0..nh {
        let apj = a.matvec(&cols[j]);
        for i in 0..=j {
            let v: f64 = cols[i].iter().zip(&apj).map(|(x, y)| x * y).sum();
            out.set(i, j, v);
        }
    }
    out
}

/// Extreme eigenvalues `(c1, c2)` of `M~ = (D + L) D^{-1} (D + L^T)` against
/// `D`, where `A = D + L + L^T`.
pub fn gauss_seidel_equivalence(a: &CsrMatrix) -> Result<(f64, f64), PrecondError> {
    let n = a.n_rows();
    check_size(n)?;
    let d = a.diagonal();
    let mut lower = DenseMatrix::zeros(n, n);
    for (i, j, v) in a.iter() {
        if j <= i {
            lower[(i, j)] += v;
        }
    }
    // M~ = W D^{-1} W^T with W = D + L; scaled by D^{-1/2} on both sides.
    let scaled = DenseMatrix::from_fn(n, n, |i, j| lower[(i, j)] / sqrt(d[i] * d[j]));
    let m = DenseSymmetricMatrix::from_upper_fn(n, |i, j| {
        let mut s = 0.0;
        for k in 0..=i.min(j) {
            s += scaled[(i, k)] * scaled[(j, k)];
        }
        s
    });
    let ev = sym_eigenvalues(&m);
    Ok((ev[0], ev[n - 1]))
}
