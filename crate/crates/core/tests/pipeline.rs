use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;
use shalegas_core::assembly::{assemble_p1_mass, BlockSystem, WellTreatment};
use shalegas_core::linalg::{EigenMethod, IdentityPreconditioner, Preconditioner, SolveReport};
use shalegas_core::mesh::{build_structured_mesh, embed_fractures, generate_segments, CoarseCover, FineMesh, FractureGenerator};
use shalegas_core::physics::{CoefficientField, CoefficientModel, PhysicalConstants};
use shalegas_core::precond::{
    galerkin_accumulated, solve_local_eigenproblem, BasisRule, LocalOperator, TwoGridConfig, TwoGridPreconditioner,
};
use shalegas_core::timestep::{simulate_linearly_implicit, SolverOptions};

fn random_mesh(n: usize, count: usize, seed: u64) -> FineMesh {
    let segs = generate_segments(&FractureGenerator {
        count,
        length_min: 0.2,
        length_max: 0.5,
        orientations: vec![0.0, FRAC_PI_2, FRAC_PI_4],
        seed,
    })
    .unwrap();
    embed_fractures(&build_structured_mesh(n).unwrap(), &segs).unwrap()
}

fn system(mesh: &FineMesh, kf: f64, tau: f64) -> BlockSystem {
    let k = PhysicalConstants::default().with_contrast(kf);
    let model = CoefficientModel::new(k).unwrap();
    let field = CoefficientField::homogeneous(mesh, &k);
    BlockSystem::build(mesh, &model, &field, tau, &[], WellTreatment::Implicit).unwrap()
}

fn vector(n: usize, seed: u64) -> Vec<f64> {
    (0..n)
        .map(|i| ((i as f64 + 1.0) * 0.7548776662 + seed as f64 * 0.5698402910).fract() - 0.5)
        .collect()
}

#[test]
fn unit_mass_integrates_area() {
    let mesh = random_mesh(12, 4, 3);
    let m = assemble_p1_mass(&mesh, &vec![1.0; mesh.triangles().len()]).unwrap();
    let total: f64 = m.values().iter().sum();
    assert!((total - 1.0).abs() < 1e-13, "{total}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn chi_is_a_partition_of_unity(count in 0usize..6, seed in 0u64..1000, nc in prop::sample::select(vec![2usize, 3, 4, 6])) {
        let mesh = random_mesh(12, count, seed);
        let cover = CoarseCover::build(&mesh, nc).unwrap();
        let mut sum = vec![0.0; mesh.n_dofs()];
        for d in cover.domains() {
            for (&g, &c) in d.dofs.iter().zip(&d.chi) {
                prop_assert!((0.0..=1.0 + 1e-14).contains(&c));
                sum[g] += c;
            }
        }
        for s in sum {
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn operators_are_symmetric_and_diffusion_kills_constants(
        count in 1usize..6, seed in 0u64..1000, log_kf in 3.0f64..9.0, log_tau in 2.0f64..6.0,
    ) {
        let mesh = random_mesh(10, count, seed);
        let sys = system(&mesh, 10f64.powf(log_kf), 10f64.powf(log_tau));
        for m in [sys.a(), sys.s_lin(), sys.d_lin()] {
            prop_assert!(m.asymmetry() <= 1e-12);
        }
        prop_assert!(sys.s_lin().diagonal().iter().all(|&d| d > 0.0));
        let ones = vec![1.0; sys.n_dofs()];
        let scale = sys.d_lin().values().iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for r in sys.d_lin().matvec(&ones) {
            prop_assert!(r.abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn energy_never_grows_without_sources(count in 1usize..5, seed in 0u64..1000, log_tau in 1.0f64..6.0) {
        let mesh = random_mesh(10, count, seed);
        let sys = system(&mesh, 1e6, 10f64.powf(log_tau));
        let k = PhysicalConstants::default();
        let (lo, hi) = (k.c_min(), k.c_max());
        let phase = seed as f64 * 0.1;
        let c0: Vec<f64> = (0..mesh.n_dofs())
            .map(|g| {
                let p = mesh.dof_position(g);
                lo + (hi - lo) * (0.5 + 0.45 * (PI * p[0] + phase).sin() * (2.0 * PI * p[1]).cos())
            })
            .collect();
        let opts = SolverOptions { tol: 1e-13, max_iter: 5000, ..SolverOptions::default() };
        let (_, recs) = simulate_linearly_implicit(&sys, c0, 6, &IdentityPreconditioner, &opts).unwrap();
        let e0 = recs[0].energy.before.value;
        for r in &recs {
            prop_assert!(r.energy.before.hypothesis_ok);
            prop_assert!(r.energy.after.value <= r.energy.before.value + 1e-12 * e0);
        }
    }

    #[test]
    fn local_problems_satisfy_the_projection_bound(count in 1usize..6, seed in 0u64..1000, log_kf in 3.0f64..9.0) {
        let mesh = random_mesh(12, count, seed);
        let sys = system(&mesh, 10f64.powf(log_kf), 8640.0);
        let cover = CoarseCover::build(&mesh, 3).unwrap();
        let rule = BasisRule::Adaptive { delta: 1e-3 };
        for i in 0..cover.n_domains() {
            let p = solve_local_eigenproblem(&sys, &mesh, &cover, i, LocalOperator::DiffusionOnly, 12, EigenMethod::Tridiagonal).unwrap();
            let ones = vec![1.0; p.len()];
            let scale = p.a.max_abs();
            for r in p.a.matvec(&ones) {
                prop_assert!(r.abs() <= 1e-10 * scale);
            }
            prop_assert!(p.values()[0].abs() < 1e-10);
            let (m, _) = rule.count(p.values(), p.len());
            if m >= p.values().len() {
                continue;
            }
            for s in 0..10 {
                let v = vector(p.len(), seed * 31 + s);
                let pv = p.project(m, &v).unwrap();
                let r: Vec<f64> = v.iter().zip(&pv).map(|(a, b)| a - b).collect();
                let rhs = p.a.quad_form(&v) / p.values()[m];
                prop_assert!(p.d_norm_sq(&r) <= rhs * (1.0 + 1e-10) + 1e-14);
            }
        }
    }

    #[test]
    fn two_grid_cycle_is_spd_and_galerkin(count in 1usize..6, seed in 0u64..1000, log_kf in 3.0f64..9.0) {
        let mesh = random_mesh(12, count, seed);
        let sys = system(&mesh, 10f64.powf(log_kf), 8640.0);
        let cover = CoarseCover::build(&mesh, 3).unwrap();
        let tg = TwoGridPreconditioner::build(&sys, &mesh, &cover, &TwoGridConfig::default()).unwrap();
        let n = sys.n_dofs();
        let (x, y) = (vector(n, seed), vector(n, seed + 1));
        let (bx, by) = (tg.two_grid_apply(&x), tg.two_grid_apply(&y));
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        let (l, r) = (dot(&bx, &y), dot(&x, &by));
        prop_assert!((l - r).abs() <= 1e-10 * l.abs().max(r.abs()));
        prop_assert!(dot(&x, &bx) > 0.0);
        let mut z = vec![0.0; n];
        tg.apply(&x, &mut z);
        prop_assert_eq!(&z, &bx);
        let acc = galerkin_accumulated(sys.a(), tg.prolongation());
        let scale = acc.max_abs();
        for i in 0..acc.n() {
            for j in 0..acc.n() {
                prop_assert!((acc.get(i, j) - tg.coarse_operator().get(i, j)).abs() <= 1e-10 * scale);
            }
        }
    }
}

#[test]
fn two_grid_beats_jacobi_at_high_contrast() {
    let mesh = random_mesh(24, 8, 5);
    let sys = system(&mesh, 1e9, 8640.0);
    let cover = CoarseCover::build(&mesh, 4).unwrap();
    let tg = TwoGridPreconditioner::build(&sys, &mesh, &cover, &TwoGridConfig::default()).unwrap();
    let jac = shalegas_core::linalg::JacobiPreconditioner::new(sys.a()).unwrap();
    let b = sys.a().matvec(&vector(sys.n_dofs(), 2));
    let solve = |p: &dyn Preconditioner| -> SolveReport {
        shalegas_core::linalg::pcg_solve(sys.a(), &b, p, 1e-9, 5000).unwrap().1
    };
    let (rt, rj) = (solve(&tg), solve(&jac));
    assert!(rt.converged && rj.converged);
    assert!(rt.iterations * 3 < rj.iterations, "{} vs {}", rt.iterations, rj.iterations);
}
