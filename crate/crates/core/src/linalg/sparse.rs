use alloc::vec;
use alloc::vec::Vec;

use super::{DenseMatrix, DenseSymmetricMatrix, LinalgError};

/// Compressed-sparse-row matrix with strictly increasing column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if row_ptr.len() != n_rows + 1 {
            return Err(LinalgError::DimensionMismatch {
                expected: n_rows + 1,
                found: row_ptr.len(),
            });
        }
        if col_idx.len() != values.len() || row_ptr[n_rows] != values.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: row_ptr[n_rows],
                found: values.len(),
            });
        }
        for i in 0..n_rows {
            let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            for (k, &c) in cols.iter().enumerate() {
                if c >= n_cols || (k > 0 && cols[k - 1] >= c) {
                    return Err(LinalgError::IndexOutOfBounds {
                        row: i,
                        col: c,
                        n_rows,
                        n_cols,
                    });
                }
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    ///
    /// Duplicates are summed in input order, so the result is independent of
    /// the sort implementation.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(LinalgError::IndexOutOfBounds {
                    row: r,
                    col: c,
                    n_rows,
                    n_cols,
                });
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = triplets[k];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// All-zero matrix with no stored entries.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    /// Position of entry `(i, j)` in the value array, if stored.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        let cols = &self.col_idx[start..self.row_ptr[i + 1]];
        cols.binary_search(&j).ok().map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Iterates over stored entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "matvec: input length");
        assert_eq!(y.len(), self.n_rows, "matvec: output length");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// `x^T A x` for a square matrix.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        crate::math::dot(x, &ax)
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.col_idx[k];
                let dst = next[c];
                col_idx[dst] = i;
                values[dst] = self.values[k];
                next[c] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|a_ij - a_ji|` relative to the largest `|a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        if self.n_rows != self.n_cols {
            return f64::INFINITY;
        }
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for (i, j, v) in self.iter() {
            worst = worst.max((v - self.get(j, i)).abs());
        }
        worst / scale
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in &mut self.values {
            *v *= alpha;
        }
    }

    /// `self + alpha * other` over the union of both patterns.
    pub fn add_scaled(&self, other: &CsrMatrix, alpha: f64) -> Result<Self, LinalgError> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n_rows,
                found: other.n_rows,
            });
        }
        if self.row_ptr == other.row_ptr && self.col_idx == other.col_idx {
            let mut out = self.clone();
            for (v, w) in out.values.iter_mut().zip(&other.values) {
                *v += alpha * w;
            }
            return Ok(out);
        }
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let take_a = q >= cb.len() || (p < ca.len() && ca[p] < cb[q]);
                let take_b = p >= ca.len() || (q < cb.len() && cb[q] < ca[p]);
                if take_a {
                    col_idx.push(ca[p]);
                    values.push(va[p]);
                    p += 1;
                } else if take_b {
                    col_idx.push(cb[q]);
                    values.push(alpha * vb[q]);
                    q += 1;
                } else {
                    col_idx.push(ca[p]);
                    values.push(va[p] + alpha * vb[q]);
                    p += 1;
                    q += 1;
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn same_pattern(&self, other: &CsrMatrix) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
    }

    /// Sparse product `self * other` (row-by-row accumulation).
    pub fn matmul(&self, other: &CsrMatrix) -> Result<Self, LinalgError> {
        if self.n_cols != other.n_rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n_cols,
                found: other.n_rows,
            });
        }
        let mut marker = vec![usize::MAX; other.n_cols];
        let mut acc = vec![0.0; other.n_cols];
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.n_rows {
            touched.clear();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.values[k];
                let (cols, vals) = other.row(self.col_idx[k]);
                for (&j, &b) in cols.iter().zip(vals) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.iter() {
            d[(i, j)] += v;
        }
        d
    }

    /// Dense principal submatrix over `indices` (in the given order).
    pub fn principal_dense(&self, indices: &[usize]) -> DenseSymmetricMatrix {
        let mut local = vec![usize::MAX; self.n_cols];
        for (k, &g) in indices.iter().enumerate() {
            local[g] = k;
        }
        let mut m = DenseSymmetricMatrix::zeros(indices.len());
        for (k, &g) in indices.iter().enumerate() {
            let (cols, vals) = self.row(g);
            for (&j, &v) in cols.iter().zip(vals) {
                if local[j] != usize::MAX {
                    m.add(k, local[j], v);
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let m = CsrMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 2, 4.0)])
            .unwrap();
        assert_eq!(m.row_ptr(), &[0, 1, 3]);
        assert_eq!(m.col_idx(), &[1, 0, 2]);
        assert_eq!(m.values(), &[2.0, 3.0, 5.0]);
        assert_eq!(m.get(1, 2), 5.0);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn out_of_bounds_triplet_is_rejected() {
        assert!(CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn unsorted_columns_are_rejected() {
        let r = CsrMatrix::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]);
        assert!(r.is_err());
    }

    #[test]
    fn transpose_and_matmul() {
        let a = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]).unwrap();
        let at = a.transpose();
        assert_eq!(at.n_rows(), 3);
        assert_eq!(at.get(2, 0), 2.0);
        let aat = a.matmul(&at).unwrap();
        assert_eq!(aat.get(0, 0), 5.0);
        assert_eq!(aat.get(1, 1), 9.0);
        assert_eq!(aat.get(0, 1), 0.0);
    }

    #[test]
    fn add_scaled_merges_patterns() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap();
        let b = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 0, 1.0)]).unwrap();
        let c = a.add_scaled(&b, -2.0).unwrap();
        assert_eq!(c.get(0, 0), -1.0);
        assert_eq!(c.get(0, 1), -2.0);
        assert_eq!(c.nnz(), 2);
    }

    #[test]
    fn symmetry_check() {
        let mut a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert!(a.is_symmetric(0.0));
        a.values_mut()[1] = 1.5;
        assert!(!a.is_symmetric(1e-10));
    }
}
