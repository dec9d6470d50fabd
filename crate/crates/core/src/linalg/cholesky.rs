use alloc::vec::Vec;

use super::{DenseSymmetricMatrix, LinalgError};
use crate::math::sqrt;

/// Dense `A = L L^T` factorization, lower factor stored row-major.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    l: Vec<f64>,
}

impl CholeskyFactor {
    pub fn new(a: &DenseSymmetricMatrix) -> Result<Self, LinalgError> {
        let n = a.n();
        let mut l = alloc::vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) {
                return Err(LinalgError::NonPositivePivot { index: j, pivot: d });
            }
            let djj = sqrt(d);
            l[j * n + j] = djj;
            for i in j + 1..n {
                let mut s = a.get(i, j);
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                for k in 0..j {
                    s -= ri[k] * rj[k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)` of the lower factor.
    pub fn l(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.l[i * self.n + j]
        }
    }

    /// Solves `L y = b` in place.
    pub fn forward_in_place(&self, y: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
    }

    /// Solves `L^T x = y` in place.
    pub fn backward_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        self.forward_in_place(x);
        self.backward_in_place(x);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// `L x`.
    pub fn mul_l(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..=i).map(|k| self.l[i * n + k] * x[k]).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn factors_small_spd() {
        let a = DenseSymmetricMatrix::from_upper_fn(2, |i, j| [[4.0, 2.0], [2.0, 3.0]][i][j]);
        let c = CholeskyFactor::new(&a).unwrap();
        assert!((c.l(0, 0) - 2.0).abs() < 1e-15);
        assert!((c.l(1, 0) - 1.0).abs() < 1e-15);
        assert!((c.l(1, 1) - 2f64.sqrt()).abs() < 1e-15);
        let x = c.solve(&[6.0, 5.0]);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = DenseSymmetricMatrix::from_upper_fn(2, |_, _| 1.0);
        let err = CholeskyFactor::new(&a).unwrap_err();
        assert!(matches!(err, LinalgError::NonPositivePivot { index: 1, .. }));
    }

    #[test]
    fn mul_l_round_trips_forward_solve() {
        let a = DenseSymmetricMatrix::from_upper_fn(3, |i, j| if i == j { 4.0 } else { 1.0 });
        let c = CholeskyFactor::new(&a).unwrap();
        let mut y = vec![1.0, -2.0, 0.5];
        let orig = y.clone();
        c.forward_in_place(&mut y);
        let back = c.mul_l(&y);
        for (u, v) in back.iter().zip(&orig) {
            assert!((u - v).abs() < 1e-14);
        }
    }
}
