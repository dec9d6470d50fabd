//! Runs one scenario end to end and writes its outputs.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use shalegas_core::assembly::BlockSystem;
use shalegas_core::linalg::{IdentityPreconditioner, JacobiPreconditioner, Preconditioner};
use shalegas_core::mesh::{build_structured_mesh, embed_fractures, CoarseCover, FineMesh};
use shalegas_core::physics::{CoefficientField, CoefficientModel};
use shalegas_core::precond::TwoGridPreconditioner;
use shalegas_core::timestep::{
    step_linearly_implicit, step_picard_implicit, time_step, uniform_state, PicardOptions, SolverOptions,
    TimeLoopState,
};

use crate::config::{FieldSelection, PreconditionerKind, Scenario, Scheme};
use crate::error::{Error, Result};
use crate::io;

/// Mesh and fixed operator of a scenario at one step size.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub mesh: FineMesh,
    pub system: BlockSystem,
}

pub fn prepare(s: &Scenario, tau: f64) -> Result<Prepared> {
    let fail = |e: shalegas_core::Error| Error::solver(&s.name, e);
    let segments = s.fractures.resolve().map_err(|e| fail(e.into()))?;
    let base = build_structured_mesh(s.n).map_err(|e| fail(e.into()))?;
    let mesh = embed_fractures(&base, &segments).map_err(|e| fail(e.into()))?;
    let field = match &s.field {
        FieldSelection::Homogeneous => CoefficientField::homogeneous(&mesh, &s.constants),
        FieldSelection::Heterogeneous { phi, k } => {
            let phi = io::read_raster(phi)?;
            let k = io::read_raster(k)?;
            CoefficientField::heterogeneous(&mesh, &s.constants, &phi, &k)
        }
    };
    let model = CoefficientModel::new(s.constants).map_err(|e| fail(e.into()))?.frozen(s.frozen);
    let system = BlockSystem::build(&mesh, &model, &field, tau, &s.wells, s.well_treatment).map_err(|e| fail(e.into()))?;
    Ok(Prepared { mesh, system })
}

/// One row of `steps.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRow {
    pub step: usize,
    pub time_s: f64,
    pub iterations: usize,
    pub relative_residual: Option<f64>,
    pub converged: bool,
    pub c_min: f64,
    pub c_max: f64,
    pub out_of_bounds: bool,
    pub energy_before: Option<f64>,
    pub energy_after: Option<f64>,
    pub energy_hypothesis: Option<bool>,
    pub picard_iterations: Option<usize>,
}

/// One row of `spectra.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub domain: usize,
    pub index: usize,
    pub eigenvalue: f64,
    pub selected: bool,
}

/// Deterministic part of a run, written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub n_dofs: usize,
    pub n_matrix_dofs: usize,
    pub n_fracture_dofs: usize,
    pub n_fracture_edges: usize,
    pub tau_s: f64,
    pub steps: usize,
    pub preconditioner: String,
    pub n_coarse: Option<usize>,
    pub modes_per_domain: Vec<usize>,
    pub clamped_domains: Vec<usize>,
    pub total_iterations: usize,
    pub average_iterations: f64,
    pub all_converged: bool,
    pub any_out_of_bounds: bool,
    pub energy_decay_violations: usize,
    pub final_mean: f64,
}

/// Wall-clock seconds, written separately as `timings.json`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Timings {
    pub assembly_s: f64,
    pub preconditioner_s: f64,
    pub time_loop_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: Summary,
    pub steps: Vec<StepRow>,
    pub spectra: Vec<SpectrumRow>,
    pub timings: Timings,
    pub final_state: Vec<f64>,
    /// `(step, state)` pairs requested through `vtk_steps`.
    pub snapshots: Vec<(usize, Vec<f64>)>,
    pub prepared: Prepared,
    pub two_grid: Option<TwoGridPreconditioner>,
}

pub fn solver_options(s: &Scenario) -> SolverOptions {
    SolverOptions {
        tol: s.tol,
        max_iter: s.max_iter,
        warm_start: s.warm_start,
        require_convergence: true,
    }
}

pub fn picard_options(s: &Scenario) -> PicardOptions {
    let mut p = PicardOptions {
        tol_percent: s.picard_tol_percent,
        max_iter: s.picard_max_iter,
        ..PicardOptions::default()
    };
    p.inner.tol = s.picard_inner_tol;
    p
}

pub fn run_scenario(s: &Scenario) -> Result<RunReport> {
    run_with_options(s, &solver_options(s))
}

/// Runs the scenario; `opts.require_convergence = false` records
/// unconverged steps instead of failing.
pub fn run_with_options(s: &Scenario, opts: &SolverOptions) -> Result<RunReport> {
    let fail = |e: shalegas_core::Error| Error::solver(&s.name, e);
    let tau = time_step(s.t_max(), s.nt, s.convention).map_err(|e| fail(e.into()))?;
    let t0 = Instant::now();
    let prepared = prepare(s, tau)?;
    let assembly_s = t0.elapsed().as_secs_f64();
    let (mesh, sys) = (&prepared.mesh, &prepared.system);
    log::info!(
        "{}: {} DOFs ({} matrix, {} fracture), tau = {tau} s",
        s.name,
        sys.n_dofs(),
        sys.n_matrix_dofs(),
        sys.n_fracture_dofs()
    );

    let t1 = Instant::now();
    let mut spectra = Vec::new();
    let mut two_grid = None;
    let mut jacobi = None;
    match (s.scheme, s.preconditioner) {
        (Scheme::Picard, _) | (_, PreconditionerKind::Identity) => {}
        (_, PreconditionerKind::Jacobi) => {
            jacobi = Some(JacobiPreconditioner::new(sys.a()).map_err(|e| fail(e.into()))?);
        }
        (_, PreconditionerKind::TwoGrid) => {
            let cover = CoarseCover::build(mesh, s.coarse).map_err(|e| fail(e.into()))?;
            let tg = TwoGridPreconditioner::build(sys, mesh, &cover, &s.two_grid).map_err(|e| fail(e.into()))?;
            for (p, &m) in tg.problems().iter().zip(&tg.selection().counts) {
                for (index, &eigenvalue) in p.values().iter().enumerate() {
                    spectra.push(SpectrumRow {
                        domain: p.domain,
                        index,
                        eigenvalue,
                        selected: index < m,
                    });
                }
            }
            log::info!("{}: coarse dimension {}", s.name, tg.n_coarse());
            two_grid = Some(tg);
        }
    }
    let precond: &dyn Preconditioner = match (&two_grid, &jacobi) {
        (Some(tg), _) => tg,
        (_, Some(j)) => j,
        _ => &IdentityPreconditioner,
    };
    let preconditioner_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let c0 = uniform_state(sys, s.constants.c_init());
    let mut state = TimeLoopState::new(c0, tau);
    let mut snapshots = Vec::new();
    if s.vtk_steps.contains(&0) {
        snapshots.push((0, state.c.clone()));
    }
    let mut steps = Vec::with_capacity(s.nt);
    let picard = picard_options(s);
    for _ in 0..s.nt {
        let row = match s.scheme {
            Scheme::LinearlyImplicit => {
                let r = step_linearly_implicit(sys, &mut state, precond, opts).map_err(|e| fail(e.into()))?;
                StepRow {
                    step: r.step,
                    time_s: r.time,
                    iterations: r.report.iterations,
                    relative_residual: Some(r.report.final_relative_residual),
                    converged: r.report.converged,
                    c_min: r.min,
                    c_max: r.max,
                    out_of_bounds: r.out_of_bounds,
                    energy_before: Some(r.energy.before.value),
                    energy_after: Some(r.energy.after.value),
                    energy_hypothesis: Some(r.energy.before.hypothesis_ok),
                    picard_iterations: None,
                }
            }
            Scheme::Picard => {
                let r = step_picard_implicit(sys, &mut state, &picard).map_err(|e| fail(e.into()))?;
                let (c_min, c_max) = range(&state.c);
                let k = &s.constants;
                let slack = 1e-6 * k.c_max();
                StepRow {
                    step: r.step,
                    time_s: state.time(),
                    iterations: r.inner_iterations,
                    relative_residual: None,
                    converged: r.converged,
                    c_min,
                    c_max,
                    out_of_bounds: c_min < k.c_min() - slack || c_max > k.c_max() + slack,
                    energy_before: None,
                    energy_after: None,
                    energy_hypothesis: None,
                    picard_iterations: Some(r.iterations),
                }
            }
        };
        if s.vtk_steps.contains(&row.step) {
            snapshots.push((row.step, state.c.clone()));
        }
        steps.push(row);
    }
    let time_loop_s = t2.elapsed().as_secs_f64();

    let total_iterations: usize = steps.iter().map(|r| r.iterations).sum();
    let energy_decay_violations = steps
        .iter()
        .filter(|r| matches!((r.energy_before, r.energy_after), (Some(b), Some(a)) if a > b + 1e-12 * b.abs().max(1.0)))
        .count();
    let (n_coarse, modes_per_domain, clamped_domains) = match &two_grid {
        Some(tg) => (Some(tg.n_coarse()), tg.selection().counts.clone(), tg.selection().clamped.clone()),
        None => (None, Vec::new(), Vec::new()),
    };
    let pc_name = match (s.scheme, s.preconditioner) {
        (Scheme::Picard, _) => "jacobi (picard inner)",
        (_, PreconditionerKind::TwoGrid) => "two_grid",
        (_, PreconditionerKind::Jacobi) => "jacobi",
        (_, PreconditionerKind::Identity) => "none",
    };
    let summary = Summary {
        scenario: s.name.clone(),
        n_dofs: sys.n_dofs(),
        n_matrix_dofs: sys.n_matrix_dofs(),
        n_fracture_dofs: sys.n_fracture_dofs(),
        n_fracture_edges: mesh.fracture_edges().len(),
        tau_s: tau,
        steps: steps.len(),
        preconditioner: pc_name.into(),
        n_coarse,
        modes_per_domain,
        clamped_domains,
        total_iterations,
        average_iterations: total_iterations as f64 / steps.len().max(1) as f64,
        all_converged: steps.iter().all(|r| r.converged),
        any_out_of_bounds: steps.iter().any(|r| r.out_of_bounds),
        energy_decay_violations,
        final_mean: state.c.iter().sum::<f64>() / state.c.len() as f64,
    };
    Ok(RunReport {
        summary,
        steps,
        spectra,
        timings: Timings {
            assembly_s,
            preconditioner_s,
            time_loop_s,
        },
        final_state: state.c,
        snapshots,
        prepared,
        two_grid,
    })
}

fn range(c: &[f64]) -> (f64, f64) {
    c.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Writes `scenario.cfg`, `summary.json`, `timings.json`, `steps.csv`,
/// `spectra.csv` (two-grid runs), `final_state.csv`, one VTK file per
/// requested step and, if asked, the operators in Matrix Market format.
pub fn write_outputs(dir: &Path, s: &Scenario, report: &RunReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cfg = dir.join("scenario.cfg");
    std::fs::write(&cfg, s.to_config_string()).map_err(|e| Error::io(&cfg, e))?;
    write_json(&dir.join("summary.json"), &report.summary)?;
    write_json(&dir.join("timings.json"), &report.timings)?;
    write_csv(&dir.join("steps.csv"), &report.steps)?;
    if !report.spectra.is_empty() {
        write_csv(&dir.join("spectra.csv"), &report.spectra)?;
    }
    #[derive(Serialize)]
    struct StateRow {
        dof: usize,
        x: f64,
        y: f64,
        continuum: &'static str,
        c: f64,
    }
    let mesh = &report.prepared.mesh;
    let nm = mesh.n_matrix_dofs();
    let rows: Vec<StateRow> = report
        .final_state
        .iter()
        .enumerate()
        .map(|(g, &c)| {
            let p = mesh.dof_position(g);
            StateRow {
                dof: g,
                x: p[0],
                y: p[1],
                continuum: if g < nm { "matrix" } else { "fracture" },
                c,
            }
        })
        .collect();
    write_csv(&dir.join("final_state.csv"), &rows)?;
    for (step, c) in &report.snapshots {
        let title = format!("{} step {step}", s.name);
        io::write_vtk(&dir.join(format!("state_{step:05}.vtk")), mesh, Some(c), &title)?;
    }
    if s.dump_matrices {
        io::write_matrix_market(&dir.join("A.mtx"), report.prepared.system.a())?;
        if let Some(tg) = &report.two_grid {
            io::write_matrix_market(&dir.join("P.mtx"), tg.prolongation())?;
        }
    }
    Ok(())
}
