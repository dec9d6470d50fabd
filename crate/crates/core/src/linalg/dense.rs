use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use super::LinalgError;
use crate::math::sqrt;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(n_rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(n_rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n_rows);
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| crate::math::dot(self.row(i), x))
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n_cols, self.n_rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.n_cols, other.n_rows);
        let mut out = Self::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.n_cols..(i + 1) * other.n_cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n_cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n_cols + j]
    }
}

/// Square symmetric matrix in full storage, used for small local problems.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetricMatrix {
    inner: DenseMatrix,
}

impl DenseSymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            inner: DenseMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DenseMatrix::identity(n),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.inner[(i, i)] = d;
        }
        m
    }

    /// Wraps a dense matrix after checking symmetry to `tol` (relative to its
    /// largest entry). The stored matrix is symmetrized exactly.
    pub fn from_dense(m: DenseMatrix, tol: f64) -> Result<Self, LinalgError> {
        if m.n_rows() != m.n_cols() {
            return Err(LinalgError::DimensionMismatch {
                expected: m.n_rows(),
                found: m.n_cols(),
            });
        }
        let mut out = Self { inner: m };
        let asym = out.asymmetry();
        if asym > tol {
            return Err(LinalgError::NotSymmetric { asymmetry: asym });
        }
        out.symmetrize();
        Ok(out)
    }

    /// Builds `f(i, j)` for `i <= j` and mirrors it.
    pub fn from_upper_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.inner[(i, j)] = v;
                m.inner[(j, i)] = v;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.inner.n_rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    /// Adds `v` to the single entry `(i, j)`. Callers adding a full element
    /// matrix keep the result symmetric.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.inner[(i, j)] += v;
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.inner[(i, j)] = v;
        self.inner[(j, i)] = v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.inner.matvec(x)
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        crate::math::dot(x, &self.matvec(x))
    }

    pub fn as_dense(&self) -> &DenseMatrix {
        &self.inner
    }

    pub fn into_dense(self) -> DenseMatrix {
        self.inner
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.inner.as_slice().iter().map(|v| v * v).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    fn symmetrize(&mut self) {
        let n = self.n();
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
            }
        }
    }

    /// `D^{-1/2} M D^{-1/2}` for a strictly positive diagonal `d`.
    pub fn scaled_by_diagonal(&self, d: &[f64]) -> Result<Self, LinalgError> {
        if d.len() != self.n() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n(),
                found: d.len(),
            });
        }
        let mut s = Vec::with_capacity(d.len());
        for (index, &value) in d.iter().enumerate() {
            if !(value > 0.0) {
                return Err(LinalgError::NonPositiveScaling { index, value });
            }
            s.push(1.0 / sqrt(value));
        }
        let n = self.n();
        Ok(Self::from_upper_fn(n, |i, j| {
            0.5 * (self.get(i, j) + self.get(j, i)) * s[i] * s[j]
        }))
    }
}
