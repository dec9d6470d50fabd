use std::path::Path;

use proptest::prelude::*;
use shalegas::config::Scenario;
use shalegas::io::{
    fractures_to_json, parse_fractures, parse_matrix_market, parse_raster, raster_to_text, to_matrix_market, to_vtk,
};
use shalegas_core::linalg::CsrMatrix;
use shalegas_core::mesh::{build_structured_mesh, embed_fractures, FractureGenerator, FractureSpec, Segment};
use shalegas_core::physics::Raster;

fn triplets() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
    (1usize..8, 1usize..8).prop_flat_map(|(r, c)| {
        (
            Just(r),
            Just(c),
            prop::collection::vec((0..r, 0..c, -1e6f64..1e6), 0..20),
        )
    })
}

proptest! {
    #[test]
    fn matrix_market_round_trips((r, c, t) in triplets()) {
        let a = CsrMatrix::from_triplets(r, c, &t).unwrap();
        let back = parse_matrix_market(&to_matrix_market(&a), "mem").unwrap();
        prop_assert_eq!(back.to_dense(), a.to_dense());
    }

    #[test]
    fn raster_round_trips(nx in 1usize..6, ny in 1usize..6, seed in 0u64..100) {
        let values: Vec<f64> = (0..nx * ny).map(|i| 0.5 + ((i as u64 * 7 + seed) % 13) as f64 / 7.0).collect();
        let r = Raster::new(nx, ny, values).unwrap();
        let back = parse_raster(&raster_to_text(&r), "mem").unwrap();
        prop_assert_eq!(back.values(), r.values());
        prop_assert_eq!((back.nx(), back.ny()), (nx, ny));
    }

    #[test]
    fn fracture_json_round_trips(
        segs in prop::collection::vec(((0.0f64..1.0, 0.0f64..1.0), (0.0f64..1.0, 0.0f64..1.0)), 0..5),
        count in 0usize..10, seed in any::<u64>(),
    ) {
        let spec = FractureSpec {
            segments: segs.iter().map(|&((a, b), (c, d))| Segment::new([a, b], [c, d])).collect(),
            generator: Some(FractureGenerator {
                count,
                length_min: 0.1,
                length_max: 0.3,
                orientations: vec![0.0, 90f64.to_radians()],
                seed,
            }),
        };
        let back = parse_fractures(&fractures_to_json(&spec), Path::new("mem.json")).unwrap();
        prop_assert_eq!(back.segments, spec.segments);
        let (g, h) = (back.generator.unwrap(), spec.generator.unwrap());
        prop_assert_eq!((g.count, g.seed), (h.count, h.seed));
        for (x, y) in g.orientations.iter().zip(&h.orientations) {
            prop_assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn scenario_text_round_trips(n in prop::sample::select(vec![8usize, 12, 16]), nt in 1usize..50, kf in 1e2f64..1e10, tol in 1e-12f64..1e-6) {
        let text = format!(
            "[mesh]\nn = {n}\ncoarse = 4\n[physics]\nkf = {kf}\n[time]\nnt = {nt}\nconvention = fence\n[solver]\ntol = {tol}\n[fractures]\nsegment = 0 0.0625 0.5 0.0625\n"
        );
        let s = Scenario::parse(&text, "mem", Path::new(".")).unwrap();
        let back = Scenario::parse(&s.to_config_string(), "mem", Path::new(".")).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn matrix_market_reads_symmetric_storage() {
    let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 4.0\n2 1 -1.5\n";
    let a = parse_matrix_market(text, "mem").unwrap();
    assert_eq!(a.get(0, 1), -1.5);
    assert_eq!(a.get(1, 0), -1.5);
    assert_eq!(a.get(1, 1), 0.0);
    assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\n1\n", "mem").is_err());
    assert!(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", "mem").is_err());
}

#[test]
fn raster_rejects_ragged_rows() {
    assert!(parse_raster("1 2\n3\n", "mem").is_err());
    assert!(parse_raster("# only a comment\n", "mem").is_err());
    assert!(parse_raster("1 x\n", "mem").is_err());
}

#[test]
fn fracture_json_rejects_unknown_fields() {
    assert!(parse_fractures(r#"{"segments": [], "extra": 1}"#, Path::new("x.json")).is_err());
    let spec = parse_fractures(
        r#"{"generator": {"count": 2, "length_min": 0.1, "length_max": 0.2, "orientations_deg": [90], "seed": 1}}"#,
        Path::new("x.json"),
    )
    .unwrap();
    let g = spec.generator.unwrap();
    assert!((g.orientations[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
}

#[test]
fn vtk_lists_triangles_and_fracture_lines() {
    let mesh = embed_fractures(&build_structured_mesh(4).unwrap(), &[Segment::new([0.0, 0.5], [1.0, 0.5])]).unwrap();
    let c: Vec<f64> = (0..mesh.n_dofs()).map(|g| g as f64 + 0.5).collect();
    let text = to_vtk(&mesh, Some(&c), "demo");
    let nt = mesh.triangles().len();
    let ne = mesh.fracture_edges().len();
    assert_eq!(ne, 4);
    assert!(text.contains(&format!("POINTS {} double", mesh.n_dofs())));
    assert!(text.contains(&format!("CELLS {} {}", nt + ne, 4 * nt + 3 * ne)));
    assert!(text.contains(&format!("CELL_TYPES {}", nt + ne)));
    assert_eq!(text.lines().filter(|l| *l == "3").count(), ne);
    assert!(text.contains("SCALARS c_m double 1") && text.contains("SCALARS c_f double 1"));
    let geometry_only = to_vtk(&mesh, None, "demo");
    assert!(!geometry_only.contains("POINT_DATA"));
}
