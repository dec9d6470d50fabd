use alloc::vec;
use alloc::vec::Vec;

use super::{DenseMatrix, DenseSymmetricMatrix, LinalgError};
use crate::math::{dot, sqrt};

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-12;
/// Eigenvalues closer than this fraction of `||T||` are orthogonalized
/// against each other during inverse iteration.
const CLUSTER_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    /// Cyclic Jacobi rotations on the full matrix.
    Jacobi,
    /// Householder reduction, Sturm bisection and inverse iteration.
    #[default]
    Tridiagonal,
}

/// Eigenvalues in ascending order with matching eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymmetricEigen {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Flips the sign of each column so that its largest-magnitude entry is positive.
fn normalize_signs(v: &mut DenseMatrix) {
    for j in 0..v.n_cols() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for i in 0..v.n_rows() {
            let x = v[(i, j)];
            if x.abs() > best * (1.0 + 1e-12) {
                best = x.abs();
                sign = if x < 0.0 { -1.0 } else { 1.0 };
            }
        }
        if sign < 0.0 {
            for i in 0..v.n_rows() {
                v[(i, j)] = -v[(i, j)];
            }
        }
    }
}

/// Full eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig_jacobi(m: &DenseSymmetricMatrix) -> Result<SymmetricEigen, LinalgError> {
    let n = m.n();
    let mut a: Vec<f64> = m.as_dense().as_slice().to_vec();
    let mut v = DenseMatrix::identity(n);
    let total: f64 = a.iter().map(|x| x * x).sum();
    let mut converged = n <= 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        if off <= JACOBI_TOL * JACOBI_TOL * total || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::EigenNoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    normalize_signs(&mut vectors);
    Ok(SymmetricEigen { values, vectors })
}

/// Householder reduction `T = Q^T A Q` with `Q` kept as reflectors.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    /// Reflector `j` acts on indices `j + 1..n`; unit length or all zero.
    reflectors: Vec<Vec<f64>>,
}

impl Tridiagonal {
    fn reduce(m: &DenseSymmetricMatrix) -> Self {
        let n = m.n();
        let mut a: Vec<f64> = m.as_dense().as_slice().to_vec();
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut p = vec![0.0; n];
        for j in 0..n.saturating_sub(2) {
            let len = n - j - 1;
            let mut v: Vec<f64> = (j + 1..n).map(|i| a[i * n + j]).collect();
            let xnorm = sqrt(dot(&v, &v));
            if xnorm == 0.0 {
                off[j] = 0.0;
                reflectors.push(vec![0.0; len]);
                continue;
            }
            let alpha = if v[0] > 0.0 { -xnorm } else { xnorm };
            v[0] -= alpha;
            let vnorm = sqrt(dot(&v, &v));
            if vnorm == 0.0 {
                off[j] = alpha;
                reflectors.push(vec![0.0; len]);
                continue;
            }
            for x in v.iter_mut() {
                *x /= vnorm;
            }
            // trailing block update A <- H A H with H = I - 2 v v^T
            let base = j + 1;
            for r in 0..len {
                let row = &a[(base + r) * n + base..(base + r) * n + n];
                p[r] = dot(row, &v);
            }
            let k = dot(&p[..len], &v);
            for r in 0..len {
                p[r] -= k * v[r];
            }
            for r in 0..len {
                let (vr, pr) = (v[r], p[r]);
                let row = &mut a[(base + r) * n + base..(base + r) * n + n];
                for c in 0..len {
                    row[c] -= 2.0 * (vr * p[c] + pr * v[c]);
                }
            }
            off[j] = alpha;
            reflectors.push(v);
        }
        let diag = (0..n).map(|i| a[i * n + i]).collect();
        if n >= 2 {
            off[n - 2] = a[(n - 1) * n + (n - 2)];
        }
        Self {
            diag,
            off,
            reflectors,
        }
    }

    fn n(&self) -> usize {
        self.diag.len()
    }

    fn norm(&self) -> f64 {
        let n = self.n();
        let mut best = 0.0f64;
        for i in 0..n {
            let mut s = self.diag[i].abs();
            if i > 0 {
                s += self.off[i - 1].abs();
            }
            if i + 1 < n {
                s += self.off[i].abs();
            }
            best = best.max(s);
        }
        best
    }

    /// Number of eigenvalues strictly below `x`.
    fn sturm_count(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.n() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalue with 0-based ascending index `k`, by bisection.
    fn kth_eigenvalue(&self, k: usize, lo: f64, hi: f64, pivmin: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + pivmin {
                break;
            }
            if self.sturm_count(mid, pivmin) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let pad = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
        (lo - pad, hi + pad)
    }

    fn lowest_values(&self, k: usize) -> Vec<f64> {
        let norm = self.norm();
        let pivmin = f64::MIN_POSITIVE.max(norm * norm * f64::MIN_POSITIVE * 4.0);
        let (lo, hi) = self.gershgorin();
        (0..k)
            .map(|i| self.kth_eigenvalue(i, lo, hi, pivmin))
            .collect()
    }

    /// Solves `(T - shift I) x = y` in place by Gaussian elimination with
    /// partial pivoting. Tiny pivots are replaced by `tiny`.
    fn shifted_solve(&self, shift: f64, tiny: f64, y: &mut [f64]) {
        let n = self.n();
        if n == 1 {
            let d = self.diag[0] - shift;
            y[0] /= if d.abs() < tiny { tiny } else { d };
            return;
        }
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut piv = vec![false; n];
        let mut cur0 = self.diag[0] - shift;
        let mut cur1 = self.off[0];
        let mut cur2 = 0.0;
        for i in 0..n - 1 {
            let sub = self.off[i];
            let nd = self.diag[i + 1] - shift;
            let ns = if i + 1 < n - 1 { self.off[i + 1] } else { 0.0 };
            if sub.abs() > cur0.abs() {
                let m = cur0 / sub;
                u0[i] = sub;
                u1[i] = nd;
                u2[i] = ns;
                mult[i] = m;
                piv[i] = true;
                let r0 = cur1 - m * nd;
                let r1 = cur2 - m * ns;
                cur0 = r0;
                cur1 = r1;
            } else {
                if cur0.abs() < tiny {
                    cur0 = if cur0 < 0.0 { -tiny } else { tiny };
                }
                let m = sub / cur0;
                u0[i] = cur0;
                u1[i] = cur1;
                u2[i] = cur2;
                mult[i] = m;
                let r0 = nd - m * cur1;
                let r1 = ns - m * cur2;
                cur0 = r0;
                cur1 = r1;
            }
            cur2 = 0.0;
        }
        if cur0.abs() < tiny {
            cur0 = if cur0 < 0.0 { -tiny } else { tiny };
        }
        u0[n - 1] = cur0;
        for i in 0..n - 1 {
            if piv[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= mult[i] * y[i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= u1[i] * y[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * y[i + 2];
            }
            y[i] = s / u0[i];
        }
    }

    /// Eigenvectors of `T` for ascending `values` by inverse iteration.
    fn inverse_iteration(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n();
        let norm = self.norm().max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * norm;
        let cluster = CLUSTER_TOL * norm;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut cluster_start = 0;
        let mut prev_shift = f64::NEG_INFINITY;
        for (k, &lambda) in values.iter().enumerate() {
            if k > 0 && lambda - values[k - 1] > cluster {
                cluster_start = k;
            }
            let mut shift = lambda;
            if k > cluster_start && shift - prev_shift < 10.0 * tiny {
                shift = prev_shift + 10.0 * tiny;
            }
            prev_shift = shift;
            let mut x: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * crate::math::sin(1.0 + (i * (k + 3)) as f64 * 0.7548776662))
                .collect();
            for _ in 0..4 {
                self.shifted_solve(shift, tiny, &mut x);
                for _ in 0..2 {
                    for prev in &out[cluster_start..k] {
                        let c = dot(&x, prev);
                        crate::math::axpy(-c, prev, &mut x);
                    }
                }
                let nx = sqrt(dot(&x, &x));
                if !(nx > 0.0) || !nx.is_finite() {
                    x = (0..n).map(|i| if i == k % n { 1.0 } else { 0.0 }).collect();
                    continue;
                }
                for v in x.iter_mut() {
                    *v /= nx;
                }
            }
            out.push(x);
        }
        out
    }

    /// Applies `Q` to a vector of the tridiagonal basis.
    fn back_transform(&self, x: &mut [f64]) {
        for (j, v) in self.reflectors.iter().enumerate().rev() {
            let sub = &mut x[j + 1..];
            let c = 2.0 * dot(sub, v);
            if c != 0.0 {
                for (s, &vi) in sub.iter_mut().zip(v) {
                    *s -= c * vi;
                }
            }
        }
    }
}

/// Rotates each cluster of nearly equal Ritz values to the Ritz vectors of
/// `m` restricted to the cluster span.
fn rayleigh_ritz_clusters(
    m: &DenseSymmetricMatrix,
    values: &mut [f64],
    vectors: &mut [Vec<f64>],
    cluster: f64,
) -> Result<(), LinalgError> {
    let k = values.len();
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && values[end] - values[end - 1] <= cluster {
            end += 1;
        }
        if end - start > 1 {
            let block = &vectors[start..end];
            let mv: Vec<Vec<f64>> = block.iter().map(|v| m.matvec(v)).collect();
            let size = end - start;
            let h = DenseSymmetricMatrix::from_upper_fn(size, |i, j| {
                0.5 * (dot(&block[i], &mv[j]) + dot(&block[j], &mv[i]))
            });
            let small = sym_eig_jacobi(&h)?;
            let n = block[0].len();
            let rotated: Vec<Vec<f64>> = (0..size)
                .map(|c| {
                    let mut out = vec![0.0; n];
                    for (r, v) in block.iter().enumerate() {
                        crate::math::axpy(small.vectors[(r, c)], v, &mut out);
                    }
                    out
                })
                .collect();
            for (c, v) in rotated.into_iter().enumerate() {
                vectors[start + c] = v;
            }
        }
        start = end;
    }
    Ok(())
}

/// All eigenvalues in ascending order.
pub fn sym_eigenvalues(m: &DenseSymmetricMatrix) -> Vec<f64> {
    let t = Tridiagonal::reduce(m);
    t.lowest_values(m.n())
}

/// The `k` smallest eigenpairs via the tridiagonal path.
pub fn sym_eig_lowest(m: &DenseSymmetricMatrix, k: usize) -> Result<SymmetricEigen, LinalgError> {
    let n = m.n();
    let k = k.min(n);
    if k == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: DenseMatrix::zeros(n, 0),
        });
    }
    let t = Tridiagonal::reduce(m);
    let mut values = t.lowest_values(k);
    let mut vecs = t.inverse_iteration(&values);
    for v in vecs.iter_mut() {
        t.back_transform(v);
        let nv = sqrt(dot(v, v));
        for x in v.iter_mut() {
            *x /= nv;
        }
    }
    let cluster = CLUSTER_TOL * t.norm();
    rayleigh_ritz_clusters(m, &mut values, &mut vecs, cluster)?;
    let mut vectors = DenseMatrix::from_columns(n, &vecs);
    normalize_signs(&mut vectors);
    Ok(SymmetricEigen { values, vectors })
}

/// Solves `A y = lambda D y` for diagonal `D > 0`; eigenvectors are
/// `D`-orthonormal.
pub fn generalized_eig_diag(
    a: &DenseSymmetricMatrix,
    d: &[f64],
    method: EigenMethod,
) -> Result<SymmetricEigen, LinalgError> {
    generalized_eig_diag_lowest(a, d, a.n(), method)
}

/// The `k` smallest pairs of `A y = lambda D y` for diagonal `D > 0`.
pub fn generalized_eig_diag_lowest(
    a: &DenseSymmetricMatrix,
    d: &[f64],
    k: usize,
    method: EigenMethod,
) -> Result<SymmetricEigen, LinalgError> {
    let scaled = a.scaled_by_diagonal(d)?;
    let n = a.n();
    let k = k.min(n);
    let mut eig = match method {
        EigenMethod::Jacobi => {
            let full = sym_eig_jacobi(&scaled)?;
            SymmetricEigen {
                values: full.values[..k].to_vec(),
                vectors: DenseMatrix::from_fn(n, k, |i, j| full.vectors[(i, j)]),
            }
        }
        EigenMethod::Tridiagonal => sym_eig_lowest(&scaled, k)?,
    };
    for i in 0..n {
        let s = 1.0 / sqrt(d[i]);
        for j in 0..k {
            eig.vectors[(i, j)] *= s;
        }
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, seed: u64) -> DenseSymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>() - 0.5).collect();
        DenseSymmetricMatrix::from_upper_fn(n, |i, j| vals[i * n + j])
    }

    fn check_pairs(m: &DenseSymmetricMatrix, e: &SymmetricEigen, tol: f64) {
        let scale = m.max_abs().max(1.0);
        for k in 0..e.len() {
            let v = e.vector(k);
            let mv = m.matvec(&v);
            for i in 0..v.len() {
                assert!(
                    (mv[i] - e.values[k] * v[i]).abs() <= tol * scale,
                    "pair {k} residual"
                );
            }
            for j in 0..e.len() {
                let g = dot(&v, &e.vector(j));
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-9, "orthogonality {k},{j}: {g}");
            }
        }
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn jacobi_two_by_two() {
        let m = DenseSymmetricMatrix::from_upper_fn(2, |i, j| [[2.0, 1.0], [1.0, 2.0]][i][j]);
        let e = sym_eig_jacobi(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        check_pairs(&m, &e, 1e-12);
    }

    #[test]
    fn jacobi_random_matrix() {
        let m = random_sym(15, 4);
        let e = sym_eig_jacobi(&m).unwrap();
        check_pairs(&m, &e, 1e-10);
    }

    #[test]
    fn tridiagonal_matches_jacobi() {
        for seed in 0..5 {
            let m = random_sym(20, seed);
            let j = sym_eig_jacobi(&m).unwrap();
            let t = sym_eig_lowest(&m, 20).unwrap();
            for (a, b) in j.values.iter().zip(&t.values) {
                assert!((a - b).abs() < 1e-11, "{a} vs {b}");
            }
            check_pairs(&m, &t, 1e-9);
            let all = sym_eigenvalues(&m);
            for (a, b) in all.iter().zip(&j.values) {
                assert!((a - b).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn lowest_subset_of_laplacian() {
        let n = 40;
        let m = DenseSymmetricMatrix::from_upper_fn(n, |i, j| {
            if i == j {
                2.0
            } else if j == i + 1 {
                -1.0
            } else {
                0.0
            }
        });
        let e = sym_eig_lowest(&m, 5).unwrap();
        for k in 0..5 {
            let theta = core::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64;
            let exact = 2.0 - 2.0 * crate::math::cos(theta);
            assert!((e.values[k] - exact).abs() < 1e-13);
        }
        check_pairs(&m, &e, 1e-10);
    }

    #[test]
    fn clustered_null_space_is_orthonormal() {
        // block diagonal with three disconnected Laplacian chains: triple zero
        let n = 30;
        let m = DenseSymmetricMatrix::from_upper_fn(n, |i, j| {
            let block = |x: usize| x / 10;
            let end = |x: usize| x.is_multiple_of(10) || x % 10 == 9;
            if i == j {
                if end(i) {
                    1.0
                } else {
                    2.0
                }
            } else if j == i + 1 && block(i) == block(j) {
                -1.0
            } else {
                0.0
            }
        });
        let e = sym_eig_lowest(&m, 4).unwrap();
        for k in 0..3 {
            assert!(e.values[k].abs() < 1e-13, "{}", e.values[k]);
        }
        assert!(e.values[3] > 1e-3);
        check_pairs(&m, &e, 1e-10);
    }

    #[test]
    fn generalized_vectors_are_d_orthonormal() {
        let a = random_sym(10, 9);
        let a = DenseSymmetricMatrix::from_upper_fn(10, |i, j| {
            a.get(i, j) + if i == j { 3.0 } else { 0.0 }
        });
        let d: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
        for method in [EigenMethod::Jacobi, EigenMethod::Tridiagonal] {
            let e = generalized_eig_diag(&a, &d, method).unwrap();
            for k in 0..10 {
                let y = e.vector(k);
                let ay = a.matvec(&y);
                for i in 0..10 {
                    assert!((ay[i] - e.values[k] * d[i] * y[i]).abs() < 1e-9);
                }
                for j in 0..10 {
                    let yj = e.vector(j);
                    let g: f64 = (0..10).map(|i| y[i] * d[i] * yj[i]).sum();
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn non_positive_scaling_is_rejected() {
        let a = DenseSymmetricMatrix::identity(2);
        let err = generalized_eig_diag(&a, &[1.0, 0.0], EigenMethod::Jacobi).unwrap_err();
        assert!(matches!(err, LinalgError::NonPositiveScaling { index: 1, .. }));
    }
}
