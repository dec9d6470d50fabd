use proptest::prelude::*;
use shalegas_core::linalg::{
    generalized_eig_diag, pcg_solve, sym_eig_jacobi, sym_eig_lowest, CholeskyFactor, CsrMatrix, DenseSymmetricMatrix,
    EigenMethod, GaussSeidel, IdentityPreconditioner, JacobiPreconditioner, SweepDirection,
};

/// `G G^T + shift I` from a row-major `n x n` generator.
fn spd(n: usize, g: &[f64], shift: f64) -> DenseSymmetricMatrix {
    DenseSymmetricMatrix::from_upper_fn(n, |i, j| {
        let s: f64 = (0..n).map(|k| g[i * n + k] * g[j * n + k]).sum();
        if i == j {
            s + shift
        } else {
            s
        }
    })
}

fn to_csr(m: &DenseSymmetricMatrix) -> CsrMatrix {
    let n = m.n();
    let mut t = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if v != 0.0 {
                t.push((i, j, v));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

fn system() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (2usize..12).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(-1.0f64..1.0, n * n),
            prop::collection::vec(-1.0f64..1.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pcg_matches_cholesky((n, g, b) in system()) {
        let m = spd(n, &g, 0.5);
        let a = to_csr(&m);
        prop_assume!(b.iter().any(|v| v.abs() > 1e-3));
        let exact = CholeskyFactor::new(&m).unwrap().solve(&b);
        for (x, rep) in [
            pcg_solve(&a, &b, &IdentityPreconditioner, 1e-12, 500).unwrap(),
            pcg_solve(&a, &b, &JacobiPreconditioner::new(&a).unwrap(), 1e-12, 500).unwrap(),
        ] {
            prop_assert!(rep.converged);
            let scale = exact.iter().fold(0.0f64, |s, v| s.max(v.abs()));
            for (p, q) in x.iter().zip(&exact) {
                prop_assert!((p - q).abs() <= 1e-8 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn symmetric_gauss_seidel_is_self_adjoint((n, g, x) in system(), y in prop::collection::vec(-1.0f64..1.0, 12)) {
        let a = to_csr(&spd(n, &g, 0.5));
        let gs = GaussSeidel::new(&a).unwrap();
        let apply = |r: &[f64]| {
            let mut z = vec![0.0; n];
            gs.sweep(&a, r, &mut z, SweepDirection::Forward);
            gs.sweep(&a, r, &mut z, SweepDirection::Backward);
            z
        };
        let y = &y[..n];
        let (mx, my) = (apply(&x), apply(y));
        let l: f64 = mx.iter().zip(y).map(|(p, q)| p * q).sum();
        let r: f64 = x.iter().zip(&my).map(|(p, q)| p * q).sum();
        prop_assert!((l - r).abs() <= 1e-10 * (1.0 + l.abs()));
    }

    #[test]
    fn eigensolvers_agree((n, g, d) in system()) {
        let m = spd(n, &g, 0.1);
        let jac = sym_eig_jacobi(&m).unwrap();
        let tri = sym_eig_lowest(&m, n).unwrap();
        let scale = m.max_abs();
        for (p, q) in jac.values.iter().zip(&tri.values) {
            prop_assert!((p - q).abs() <= 1e-10 * scale);
        }
        for k in 0..n {
            let v = tri.vector(k);
            let av = m.matvec(&v);
            for (a, b) in av.iter().zip(&v) {
                prop_assert!((a - tri.values[k] * b).abs() <= 1e-8 * scale);
            }
        }
        let dpos: Vec<f64> = d.iter().map(|v| 0.5 + v.abs()).collect();
        let ge = generalized_eig_diag(&m, &dpos, EigenMethod::Tridiagonal).unwrap();
        for k in 0..n {
            let v = ge.vector(k);
            let dn: f64 = v.iter().zip(&dpos).map(|(x, w)| w * x * x).sum();
            prop_assert!((dn - 1.0).abs() <= 1e-9);
            prop_assert!((m.quad_form(&v) - ge.values[k]).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn csr_matvec_matches_dense((n, g, x) in system()) {
        let m = spd(n, &g, 0.0);
        let a = to_csr(&m);
        let (p, q) = (a.matvec(&x), m.matvec(&x));
        for (u, v) in p.iter().zip(&q) {
            prop_assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
        prop_assert!(a.asymmetry() <= 1e-14);
    }
}
