use alloc::vec;
use alloc::vec::Vec;

use super::{CsrMatrix, LinalgError};
use crate::math::{dot, norm2};

/// A symmetric positive definite approximation of `A^{-1}`.
pub trait Preconditioner {
    /// Writes `z = B^{-1} r`.
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

impl<F> Preconditioner for F
where
    F: Fn(&[f64], &mut [f64]),
{
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self(r, z)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Diagonal scaling.
#[derive(Debug, Clone)]
pub struct JacobiPreconditioner {
    inv_diag: Vec<f64>,
}

impl JacobiPreconditioner {
    pub fn new(a: &CsrMatrix) -> Result<Self, LinalgError> {
        let inv_diag = a
            .diagonal()
            .into_iter()
            .enumerate()
            .map(|(row, d)| {
                if d > 0.0 {
                    Ok(1.0 / d)
                } else {
                    Err(LinalgError::ZeroDiagonal { row })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { inv_diag })
    }
}

impl Preconditioner for JacobiPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * d;
        }
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||b - A x||_2 / ||b||_2` at exit.
    pub final_relative_residual: f64,
    pub converged: bool,
    /// Relative residual after each iteration, starting with the initial one.
    pub residual_history: Vec<f64>,
}

/// Preconditioned conjugate gradients from a zero initial guess.
///
/// Stops when the relative Euclidean residual `||b - A x|| / ||b||` drops to
/// `tol`, or after `max_iter` iterations with `converged = false`.
pub fn pcg_solve(
    a: &CsrMatrix,
    b: &[f64],
    precond: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport), LinalgError> {
    pcg_solve_from(a, b, &vec![0.0; b.len()], precond, tol, max_iter)
}

/// Preconditioned conjugate gradients from the initial guess `x0`.
pub fn pcg_solve_from(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    precond: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport), LinalgError> {
    let n = a.n_rows();
    if a.n_cols() != n || b.len() != n || x0.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveReport {
                iterations: 0,
                final_relative_residual: 0.0,
                converged: true,
                residual_history: vec![0.0],
            },
        ));
    }

    let mut x = x0.to_vec();
    let mut r = a.matvec(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut rel = norm2(&r) / b_norm;
    if !rel.is_finite() {
        return Err(LinalgError::NonFinite { iteration: 0 });
    }
    let mut history = vec![rel];
    let report = |iterations, rel, history| SolveReport {
        iterations,
        final_relative_residual: rel,
        converged: rel <= tol,
        residual_history: history,
    };
    if rel <= tol {
        return Ok((x, report(0, rel, history)));
    }

    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut rz = dot(&r, &z);
    if !(rz > 0.0) {
        return Err(if rz.is_nan() {
            LinalgError::NonFinite { iteration: 0 }
        } else {
            LinalgError::IndefinitePreconditioner {
                iteration: 0,
                value: rz,
            }
        });
    }
    let mut p = z.clone();
    let mut q = vec![0.0; n];

    for iteration in 1..=max_iter {
        a.matvec_into(&p, &mut q);
        let curvature = dot(&p, &q);
        if curvature.is_nan() {
            return Err(LinalgError::NonFinite { iteration });
        }
        if curvature <= 0.0 {
            return Err(LinalgError::Breakdown {
                iteration,
                curvature,
            });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rel = norm2(&r) / b_norm;
        if !rel.is_finite() {
            return Err(LinalgError::NonFinite { iteration });
        }
        history.push(rel);
        if rel <= tol || iteration == max_iter {
            return Ok((x, report(iteration, rel, history)));
        }

        precond.apply(&r, &mut z);
        let rz_next = dot(&r, &z);
        if !(rz_next > 0.0) {
            return Err(if rz_next.is_nan() {
                LinalgError::NonFinite { iteration }
            } else {
                LinalgError::IndefinitePreconditioner {
                    iteration,
                    value: rz_next,
                }
            });
        }
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok((x, report(max_iter, rel, history)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CholeskyFactor, DenseSymmetricMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_to_csr(m: &DenseSymmetricMatrix) -> CsrMatrix {
        let n = m.n();
        let mut trip = Vec::new();
        for i in 0..n {
            for j in 0..n {
                trip.push((i, j, m.get(i, j)));
            }
        }
        CsrMatrix::from_triplets(n, n, &trip).unwrap()
    }

    fn random_spd(n: usize, seed: u64) -> DenseSymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>() - 0.5).collect();
        DenseSymmetricMatrix::from_upper_fn(n, |i, j| {
            let s: f64 = (0..n).map(|k| g[i * n + k] * g[j * n + k]).sum();
            if i == j {
                s + 1.0 + i as f64 * 0.1
            } else {
                s
            }
        })
    }

    #[test]
    fn diagonal_system_terminates_in_two_steps() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0]);
        let (x, rep) = pcg_solve(&a, &[1.0, 2.0], &IdentityPreconditioner, 1e-14, 10).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 2);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exact_inverse_preconditioner_converges_in_one_iteration() {
        let dense = random_spd(12, 5);
        let a = dense_to_csr(&dense);
        let chol = CholeskyFactor::new(&dense).unwrap();
        let exact = |r: &[f64], z: &mut [f64]| z.copy_from_slice(&chol.solve(r));
        let b: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let (_, rep) = pcg_solve(&a, &b, &exact, 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
    }

    #[test]
    fn jacobi_pcg_matches_dense_direct_solve() {
        let dense = random_spd(50, 11);
        let a = dense_to_csr(&dense);
        let b: Vec<f64> = (0..50).map(|i| 1.0 + (i as f64 * 0.37).cos()).collect();
        let jac = JacobiPreconditioner::new(&a).unwrap();
        let (x, rep) = pcg_solve(&a, &b, &jac, 1e-12, 500).unwrap();
        assert!(rep.converged);
        let direct = CholeskyFactor::new(&dense).unwrap().solve(&b);
        let err = x
            .iter()
            .zip(&direct)
            .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err <= 1e-10 * scale, "err {err}");
    }

    #[test]
    fn energy_error_decreases_monotonically() {
        let dense = random_spd(20, 21);
        let a = dense_to_csr(&dense);
        let b: Vec<f64> = (0..20).map(|i| (i as f64).cos()).collect();
        let exact = CholeskyFactor::new(&dense).unwrap().solve(&b);
        let jac = JacobiPreconditioner::new(&a).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let (x, _) = pcg_solve(&a, &b, &jac, 0.0, k).unwrap();
            let e: Vec<f64> = x.iter().zip(&exact).map(|(u, v)| u - v).collect();
            let en = a.quad_form(&e);
            assert!(en <= last * (1.0 + 1e-10) + 1e-28, "k={k}: {en} > {last}");
            last = en;
        }
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let a = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        let err = pcg_solve(&a, &[1.0, 1.0], &IdentityPreconditioner, 1e-12, 10).unwrap_err();
        assert!(matches!(err, LinalgError::Breakdown { .. }));
    }

    #[test]
    fn nan_is_detected() {
        let a = CsrMatrix::from_diagonal(&[1.0, f64::NAN]);
        let err = pcg_solve(&a, &[1.0, 1.0], &IdentityPreconditioner, 1e-12, 10).unwrap_err();
        assert!(matches!(err, LinalgError::NonFinite { .. }));
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let dense = random_spd(30, 2);
        let a = dense_to_csr(&dense);
        let b = vec![1.0; 30];
        let (_, rep) = pcg_solve(&a, &b, &IdentityPreconditioner, 1e-14, 2).unwrap();
        assert_eq!(rep.iterations, 2);
        assert!(!rep.converged);
        assert_eq!(rep.converged, rep.final_relative_residual <= 1e-14);
    }
}
