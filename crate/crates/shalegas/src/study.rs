//! Temporal convergence study and contrast sweep.

use serde::Serialize;
use shalegas_core::precond::BasisRule;
use shalegas_core::timestep::{relative_error, simulate_picard, time_step, uniform_state, SolverOptions};

use crate::config::{Scenario, Scheme};
use crate::error::{Error, Result};
use crate::runner::{picard_options, prepare, run_with_options, solver_options};

/// Iteration cap of the contrast sweep; runs that hit it are reported as
/// `">100"`.
pub const SWEEP_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub nt: usize,
    pub tau_s: f64,
    /// Relative L2 error of the linearly implicit solution, percent.
    pub error_percent: f64,
    /// Error at the previous (coarser) step count divided by this one.
    pub ratio: Option<f64>,
    pub order: Option<f64>,
    pub li_iterations: usize,
    pub picard_iterations: usize,
    pub picard_inner_iterations: usize,
    /// Picard iterations of each step.
    #[serde(skip)]
    pub picard_per_step: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub scenario: String,
    pub reference_nt: usize,
    pub reference_tol_percent: f64,
    pub reference_picard_iterations: usize,
    pub rows: Vec<ConvergenceRow>,
}

fn picard_final(s: &Scenario, nt: usize, tol_percent: f64) -> Result<(Vec<f64>, Vec<usize>, usize)> {
    let fail = |e: shalegas_core::Error| Error::solver(&s.name, e);
    let tau = time_step(s.t_max(), nt, s.convention).map_err(|e| fail(e.into()))?;
    let prepared = prepare(s, tau)?;
    let sys = &prepared.system;
    let mut opts = picard_options(s);
    opts.tol_percent = tol_percent;
    let c0 = uniform_state(sys, s.constants.c_init());
    let (state, recs) = simulate_picard(sys, c0, nt, &opts).map_err(|e| fail(e.into()))?;
    let outer = recs.iter().map(|r| r.iterations).collect();
    let inner = recs.iter().map(|r| r.inner_iterations).sum();
    Ok((state.c, outer, inner))
}

/// Compares linearly implicit runs at each `nts` against a Picard reference
/// at `reference_nt`, and records Picard iteration totals at each `nts`.
pub fn convergence_study(
    s: &Scenario,
    nts: &[usize],
    reference_nt: usize,
    reference_tol_percent: f64,
) -> Result<ConvergenceTable> {
    if nts.is_empty() {
        return Err(Error::Scenario("no step counts given".into()));
    }
    log::info!("{}: Picard reference with {reference_nt} steps", s.name);
    let (reference, reference_steps, _) = picard_final(s, reference_nt, reference_tol_percent)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(nts.len());
    for &nt in nts {
        let mut li = s.clone();
        li.nt = nt;
        li.scheme = Scheme::LinearlyImplicit;
        li.vtk_steps.clear();
        let report = run_with_options(&li, &solver_options(&li))?;
        let error_percent = relative_error(&reference, &report.final_state).map_err(|e| Error::solver(&s.name, e))?;
        let (_, picard_per_step, picard_inner_iterations) = picard_final(s, nt, s.picard_tol_percent)?;
        let (ratio, order) = match rows.last() {
            Some(prev) => {
                let ratio = prev.error_percent / error_percent;
                (Some(ratio), Some(ratio.ln() / (nt as f64 / prev.nt as f64).ln()))
            }
            None => (None, None),
        };
        log::info!("{}: N_t = {nt}, error {error_percent:.4}%", s.name);
        rows.push(ConvergenceRow {
            nt,
            tau_s: report.summary.tau_s,
            error_percent,
            ratio,
            order,
            li_iterations: report.summary.total_iterations,
            picard_iterations: picard_per_step.iter().sum(),
            picard_inner_iterations,
            picard_per_step,
        });
    }
    Ok(ConvergenceTable {
        scenario: s.name.clone(),
        reference_nt,
        reference_tol_percent,
        reference_picard_iterations: reference_steps.iter().sum(),
        rows,
    })
}

/// Parses `fixed:M`, `adaptive:DELTA` or `adaptive+1:DELTA`.
pub fn parse_basis_rule(text: &str) -> Result<BasisRule> {
    let bad = || Error::Scenario(format!("bad basis rule '{text}', expected fixed:M, adaptive:DELTA or adaptive+1:DELTA"));
    let (kind, value) = text.split_once(':').ok_or_else(bad)?;
    match kind {
        "fixed" => Ok(BasisRule::Fixed(value.parse().map_err(|_| bad())?)),
        "adaptive" => Ok(BasisRule::Adaptive {
            delta: value.parse().map_err(|_| bad())?,
        }),
        "adaptive+1" => Ok(BasisRule::AdaptivePlusOne {
            delta: value.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

pub fn basis_rule_label(rule: &BasisRule) -> String {
    match rule {
        BasisRule::Fixed(m) => format!("fixed:{m}"),
        BasisRule::Adaptive { delta } => format!("adaptive:{delta:e}"),
        BasisRule::AdaptivePlusOne { delta } => format!("adaptive+1:{delta:e}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastRow {
    pub kf: f64,
    pub basis: String,
    pub n_coarse: usize,
    /// Mean PCG iterations per step, or `">100"` if any step hit the cap.
    pub iterations: String,
    pub average_iterations: f64,
    pub converged: bool,
}

/// Average two-grid PCG iterations per step for every contrast and basis rule.
pub fn contrast_sweep(s: &Scenario, kfs: &[f64], rules: &[BasisRule]) -> Result<Vec<ContrastRow>> {
    let mut rows = Vec::with_capacity(kfs.len() * rules.len());
    for &kf in kfs {
        for rule in rules {
            let mut run = s.clone();
            run.kf = kf;
            run.constants = run.constants.with_contrast(kf);
            run.scheme = Scheme::LinearlyImplicit;
            run.preconditioner = crate::config::PreconditionerKind::TwoGrid;
            run.two_grid.rule = *rule;
            run.vtk_steps.clear();
            let opts = SolverOptions {
                max_iter: SWEEP_MAX_ITER,
                require_convergence: false,
                ..solver_options(&run)
            };
            let report = run_with_options(&run, &opts)?;
            let converged = report.summary.all_converged;
            let avg = report.summary.average_iterations;
            let label = basis_rule_label(rule);
            log::info!("kf = {kf:e}, {label}: {avg:.1} iterations");
            rows.push(ContrastRow {
                kf,
                basis: label,
                n_coarse: report.summary.n_coarse.unwrap_or(0),
                iterations: if converged { format!("{avg:.1}") } else { format!(">{SWEEP_MAX_ITER}") },
                average_iterations: avg,
                converged,
            });
        }
    }
    Ok(rows)
}
