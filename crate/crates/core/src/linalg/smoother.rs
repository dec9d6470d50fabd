use alloc::vec::Vec;

use super::{CsrMatrix, LinalgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    /// Rows in increasing order: the action of `(D - N)^{-1}` on the residual.
    Forward,
    /// Rows in decreasing order: the transpose smoother.
    Backward,
}

/// Pointwise Gauss-Seidel relaxation with the diagonal located once.
#[derive(Debug, Clone)]
pub struct GaussSeidel {
    diag_pos: Vec<usize>,
}

impl GaussSeidel {
    pub fn new(a: &CsrMatrix) -> Result<Self, LinalgError> {
        if a.n_rows() != a.n_cols() {
            return Err(LinalgError::DimensionMismatch {
                expected: a.n_rows(),
                found: a.n_cols(),
            });
        }
        let mut diag_pos = Vec::with_capacity(a.n_rows());
        for row in 0..a.n_rows() {
            match a.position(row, row) {
                Some(k) if a.values()[k] != 0.0 => diag_pos.push(k),
                _ => return Err(LinalgError::ZeroDiagonal { row }),
            }
        }
        Ok(Self { diag_pos })
    }

    /// One in-place sweep on `a x = b`. `a` must be the matrix this smoother
    /// was built for.
    pub fn sweep(&self, a: &CsrMatrix, b: &[f64], x: &mut [f64], direction: SweepDirection) {
        let n = a.n_rows();
        assert_eq!(self.diag_pos.len(), n, "smoother built for a different matrix");
        assert_eq!(b.len(), n);
        assert_eq!(x.len(), n);
        let row_ptr = a.row_ptr();
        let cols = a.col_idx();
        let vals = a.values();
        let mut relax = |i: usize| {
            let mut acc = b[i];
            for k in row_ptr[i]..row_ptr[i + 1] {
                acc -= vals[k] * x[cols[k]];
            }
            let d = vals[self.diag_pos[i]];
            // acc already subtracted d * x_i
            x[i] += acc / d;
        };
        match direction {
            SweepDirection::Forward => (0..n).for_each(&mut relax),
            SweepDirection::Backward => (0..n).rev().for_each(&mut relax),
        }
    }
}

/// One Gauss-Seidel sweep on `a x = b` starting from `x`; returns the new iterate.
pub fn gauss_seidel_sweep(
    a: &CsrMatrix,
    b: &[f64],
    x: &[f64],
    direction: SweepDirection,
) -> Result<Vec<f64>, LinalgError> {
    if b.len() != a.n_rows() || x.len() != a.n_rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.n_rows(),
            found: b.len().min(x.len()),
        });
    }
    let gs = GaussSeidel::new(a)?;
    let mut out = x.to_vec();
    gs.sweep(a, b, &mut out, direction);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CholeskyFactor, DenseSymmetricMatrix};
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_sweep_returns_rhs() {
        let a = CsrMatrix::identity(4);
        let b = [1.0, -2.0, 3.0, 0.5];
        let x = gauss_seidel_sweep(&a, &b, &[0.0; 4], SweepDirection::Forward).unwrap();
        assert_eq!(x, b.to_vec());
    }

    #[test]
    fn two_by_two_forward_sweep() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)])
            .unwrap();
        let x = gauss_seidel_sweep(&a, &[3.0, 3.0], &[0.0, 0.0], SweepDirection::Forward).unwrap();
        assert_eq!(x, vec![1.5, 0.75]);
        let y = gauss_seidel_sweep(&a, &[3.0, 3.0], &[0.0, 0.0], SweepDirection::Backward).unwrap();
        assert_eq!(y, vec![0.75, 1.5]);
    }

    #[test]
    fn zero_diagonal_names_row() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 1.0)]).unwrap();
        let err = gauss_seidel_sweep(&a, &[1.0, 1.0], &[0.0, 0.0], SweepDirection::Forward);
        assert_eq!(err, Err(LinalgError::ZeroDiagonal { row: 1 }));
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> (CsrMatrix, DenseSymmetricMatrix) {
        let g: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>() - 0.5).collect();
        let dense = DenseSymmetricMatrix::from_upper_fn(n, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                s += g[i * n + k] * g[j * n + k];
            }
            if i == j {
                s + 0.5
            } else {
                s
            }
        });
        let mut trip = Vec::new();
        for i in 0..n {
            for j in 0..n {
                trip.push((i, j, dense.get(i, j)));
            }
        }
        (CsrMatrix::from_triplets(n, n, &trip).unwrap(), dense)
    }

    #[test]
    fn symmetric_sweep_reduces_energy_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, dense) = random_spd(5, &mut rng);
        let b: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
        let exact = CholeskyFactor::new(&dense).unwrap().solve(&b);
        let energy = |x: &[f64]| {
            let e: Vec<f64> = x.iter().zip(&exact).map(|(u, v)| u - v).collect();
            a.quad_form(&e)
        };
        let x0 = vec![0.0; 5];
        let x1 = gauss_seidel_sweep(&a, &b, &x0, SweepDirection::Forward).unwrap();
        let x2 = gauss_seidel_sweep(&a, &b, &x1, SweepDirection::Backward).unwrap();
        assert!(energy(&x2) < energy(&x0));
        assert!(energy(&x2) <= energy(&x1) + 1e-14);
    }
}
