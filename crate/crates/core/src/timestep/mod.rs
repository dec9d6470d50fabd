//! Linearly implicit time stepping with a fixed operator, the Picard-iterated
//! fully implicit reference, the discrete energy and the splitting checks.

mod energy;
mod splitting;

pub use energy::{energy_functional, EnergyDiagnostic, StepEnergy};
pub use splitting::{check_splitting_bounds, SplittingReport, DENSE_CHECK_LIMIT};

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::assembly::{AssemblyError, BlockSystem, NonlinearEvaluation};
use crate::linalg::{pcg_solve, pcg_solve_from, JacobiPreconditioner, LinalgError, Preconditioner, SolveReport};
use crate::math::norm2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimestepError {
    #[error("PCG did not converge at step {step}: {iterations} iterations, relative residual {residual:e}")]
    NotConverged {
        step: usize,
        iterations: usize,
        residual: f64,
    },
    #[error("reference vector has zero norm")]
    ZeroReference,
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("number of time steps must be positive")]
    NoSteps,
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// How `tau` follows from `T_max` and `N_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepConvention {
    /// `tau = T_max / N_t`.
    #[default]
    PerStep,
    /// `tau = T_max / (N_t - 1)`.
    Fence,
}

pub fn time_step(t_max: f64, n_t: usize, convention: StepConvention) -> Result<f64, TimestepError> {
    let div = match convention {
        StepConvention::PerStep => n_t,
        StepConvention::Fence => n_t.saturating_sub(1),
    };
    if div == 0 {
        return Err(TimestepError::NoSteps);
    }
    Ok(t_max / div as f64)
}

/// `||c_ref - c|| / ||c_ref|| * 100`.
pub fn relative_error(c_ref: &[f64], c: &[f64]) -> Result<f64, TimestepError> {
    if c_ref.len() != c.len() {
        return Err(TimestepError::LengthMismatch {
            expected: c_ref.len(),
            found: c.len(),
        });
    }
    let den = norm2(c_ref);
    if den == 0.0 {
        return Err(TimestepError::ZeroReference);
    }
    let diff: Vec<f64> = c_ref.iter().zip(c).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff) / den * 100.0)
}

/// Current and previous solution of the three-level scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeLoopState {
    pub c: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub step: usize,
    pub tau: f64,
}

impl TimeLoopState {
    /// Starts with `c^{-1} = c^0`.
    pub fn new(c0: Vec<f64>, tau: f64) -> Self {
        Self {
            c_prev: c0.clone(),
            c: c0,
            step: 0,
            tau,
        }
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.tau
    }

    fn advance(&mut self, next: Vec<f64>) {
        self.c_prev = core::mem::replace(&mut self.c, next);
        self.step += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Start PCG from `c^n` instead of zero.
    pub warm_start: bool,
    /// Fail when PCG stops short of `tol`.
    pub require_convergence: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 1000,
            warm_start: false,
            require_convergence: true,
        }
    }
}

/// Outcome of one linearly implicit step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub report: SolveReport,
    pub min: f64,
    pub max: f64,
    /// Whether the new state left `[c_min, c_max]` by more than `1e-6 c_max`.
    pub out_of_bounds: bool,
    pub energy: StepEnergy,
}

fn solve(
    a: &crate::linalg::CsrMatrix,
    b: &[f64],
    guess: Option<&[f64]>,
    precond: &dyn Preconditioner,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveReport), LinalgError> {
    match guess {
        Some(x0) => pcg_solve_from(a, b, x0, precond, opts.tol, opts.max_iter),
        None => pcg_solve(a, b, precond, opts.tol, opts.max_iter),
    }
}

/// One step `A c^{n+1} = b^n`; the state advances in place.
pub fn step_linearly_implicit(
    sys: &BlockSystem,
    state: &mut TimeLoopState,
    precond: &dyn Preconditioner,
    opts: &SolverOptions,
) -> Result<StepRecord, TimestepError> {
    let ev = sys.evaluate(&state.c)?;
    let b = sys.rhs_with(&ev, &state.c, &state.c_prev);
    let guess = opts.warm_start.then_some(state.c.as_slice());
    let (next, report) = solve(sys.a(), &b, guess, precond, opts)?;
    if opts.require_convergence && !report.converged {
        return Err(TimestepError::NotConverged {
            step: state.step + 1,
            iterations: report.iterations,
            residual: report.final_relative_residual,
        });
    }
    let energy = energy::energy_pair(sys, &ev, &next, &state.c, &state.c_prev);
    state.advance(next);
    Ok(record(sys, state, report, energy))
}

fn record(sys: &BlockSystem, state: &TimeLoopState, report: SolveReport, energy: StepEnergy) -> StepRecord {
    let k = &sys.model().constants;
    let tol = 1e-6 * k.c_max();
    let min = state.c.iter().copied().fold(f64::INFINITY, f64::min);
    let max = state.c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let out_of_bounds = min < k.c_min() - tol || max > k.c_max() + tol;
    if out_of_bounds {
        log::warn!(
            "step {}: concentration range [{min:.6e}, {max:.6e}] leaves [c_min, c_max]",
            state.step
        );
    }
    StepRecord {
        step: state.step,
        time: state.time(),
        report,
        min,
        max,
        out_of_bounds,
        energy,
    }
}

/// Runs `n_steps` linearly implicit steps from `c0`.
pub fn simulate_linearly_implicit(
    sys: &BlockSystem,
    c0: Vec<f64>,
    n_steps: usize,
    precond: &dyn Preconditioner,
    opts: &SolverOptions,
) -> Result<(TimeLoopState, Vec<StepRecord>), TimestepError> {
    let mut state = TimeLoopState::new(c0, sys.tau());
    let mut records = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        records.push(step_linearly_implicit(sys, &mut state, precond, opts)?);
    }
    Ok((state, records))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Stop once the relative change between iterates (percent) is below this.
    pub tol_percent: f64,
    pub max_iter: usize,
    pub inner: SolverOptions,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol_percent: 0.1,
            max_iter: 10,
            inner: SolverOptions {
                tol: 1e-9,
                max_iter: 5000,
                warm_start: true,
                require_convergence: true,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardRecord {
    pub step: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Relative change of the last iteration, percent.
    pub last_change: f64,
    pub inner_iterations: usize,
}

/// Fully implicit step `[S(c^m) + tau D(c^m)] c^{m+1} = S(c^m) c^n + tau F(c^m)`
/// iterated from `c^0 = c^n`.
pub fn step_picard_implicit(
    sys: &BlockSystem,
    state: &mut TimeLoopState,
    opts: &PicardOptions,
) -> Result<PicardRecord, TimestepError> {
    let tau = sys.tau();
    let mut iterate = state.c.clone();
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    let mut inner_iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let NonlinearEvaluation { s, d } = sys.evaluate(&iterate)?;
        let k = s.add_scaled(&d, tau)?;
        let mut rhs = s.matvec(&state.c);
        let f = sys.load(&iterate);
        for (r, fi) in rhs.iter_mut().zip(&f) {
            *r += tau * fi;
        }
        let jac = JacobiPreconditioner::new(&k)?;
        let guess = opts.inner.warm_start.then_some(iterate.as_slice());
        let (next, report) = solve(&k, &rhs, guess, &jac, &opts.inner)?;
        if opts.inner.require_convergence && !report.converged {
            return Err(TimestepError::NotConverged {
                step: state.step + 1,
                iterations: report.iterations,
                residual: report.final_relative_residual,
            });
        }
        inner_iterations += report.iterations;
        iterations += 1;
        last_change = relative_error(&next, &iterate)?;
        iterate = next;
        if sys.model().frozen || last_change <= opts.tol_percent {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "Picard iteration stopped after {} iterations at step {} (change {last_change:.3e}%)",
            iterations,
            state.step + 1
        );
    }
    state.advance(iterate);
    Ok(PicardRecord {
        step: state.step,
        iterations,
        converged,
        last_change,
        inner_iterations,
    })
}

pub fn simulate_picard(
    sys: &BlockSystem,
    c0: Vec<f64>,
    n_steps: usize,
    opts: &PicardOptions,
) -> Result<(TimeLoopState, Vec<PicardRecord>), TimestepError> {
    let mut state = TimeLoopState::new(c0, sys.tau());
    let mut records = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        records.push(step_picard_implicit(sys, &mut state, opts)?);
    }
    Ok((state, records))
}

/// Initial vector with every DOF at `c`.
pub fn uniform_state(sys: &BlockSystem, c: f64) -> Vec<f64> {
    vec![c; sys.n_dofs()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_linear_operator, WellBox, WellTreatment};
    use crate::linalg::IdentityPreconditioner;
    use crate::mesh::{build_structured_mesh, embed_fractures, Segment};
    use crate::physics::{CoefficientField, CoefficientModel, PhysicalConstants};

    fn system(frozen: bool, wells: bool, tau: f64) -> BlockSystem {
        let mesh = build_structured_mesh(8).unwrap();
        let mesh = embed_fractures(&mesh, &[Segment::new([0.0, 0.0], [1.0, 1.0])]).unwrap();
        let model = CoefficientModel::new(PhysicalConstants::default())
            .unwrap()
            .frozen(frozen);
        let field = CoefficientField::homogeneous(&mesh, &model.constants);
        let boxes = if wells {
            vec![WellBox::new(0.0, 0.2, 0.0, 0.2)]
        } else {
            vec![]
        };
        build_linear_operator(&mesh, &model, &field, tau, &boxes, WellTreatment::Implicit).unwrap()
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((relative_error(&[2.0, 0.0], &[1.0, 0.0]).unwrap() - 50.0).abs() < 1e-14);
        assert_eq!(relative_error(&[0.0], &[1.0]), Err(TimestepError::ZeroReference));
    }

    #[test]
    fn step_conventions() {
        assert_eq!(time_step(10.0, 10, StepConvention::PerStep).unwrap(), 1.0);
        assert_eq!(time_step(10.0, 11, StepConvention::Fence).unwrap(), 1.0);
        assert!(time_step(1.0, 1, StepConvention::Fence).is_err());
    }

    #[test]
    fn constant_state_is_steady_without_wells() {
        let sys = system(false, false, 3600.0);
        let c0 = uniform_state(&sys, sys.model().constants.c_init());
        let jac = JacobiPreconditioner::new(sys.a()).unwrap();
        let opts = SolverOptions {
            tol: 1e-12,
            ..Default::default()
        };
        let (state, recs) = simulate_linearly_implicit(&sys, c0.clone(), 3, &jac, &opts).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(relative_error(&c0, &state.c).unwrap() < 1e-8);
    }

    #[test]
    fn frozen_model_linearly_implicit_equals_picard() {
        let sys = system(true, true, 3600.0);
        let c0 = uniform_state(&sys, sys.model().constants.c_init());
        let opts = SolverOptions {
            tol: 1e-13,
            ..Default::default()
        };
        let (li, _) = simulate_linearly_implicit(&sys, c0.clone(), 4, &IdentityPreconditioner, &opts).unwrap();
        let popts = PicardOptions {
            inner: SolverOptions {
                tol: 1e-13,
                ..PicardOptions::default().inner
            },
            ..Default::default()
        };
        let (pc, recs) = simulate_picard(&sys, c0, 4, &popts).unwrap();
        assert!(recs.iter().all(|r| r.iterations == 1 && r.converged));
        assert!(relative_error(&pc.c, &li.c).unwrap() < 1e-8);
    }

    #[test]
    fn wells_drain_the_fracture() {
        let sys = system(false, true, 3600.0);
        let k = sys.model().constants;
        let c0 = uniform_state(&sys, k.c_init());
        let jac = JacobiPreconditioner::new(sys.a()).unwrap();
        let (state, recs) = simulate_linearly_implicit(&sys, c0.clone(), 5, &jac, &SolverOptions::default()).unwrap();
        assert!(recs.iter().all(|r| r.report.converged));
        let mass = |c: &[f64]| sys.s_lin().matvec(c).iter().sum::<f64>();
        assert!(mass(&state.c) < mass(&c0));
        let nm = sys.n_matrix_dofs();
        let f_mean: f64 = state.c[nm..].iter().sum::<f64>() / (state.c.len() - nm) as f64;
        assert!(f_mean < k.c_init());
        // The consistent mass lets matrix nodes beside the drained fracture overshoot.
        assert!(recs.iter().any(|r| r.out_of_bounds));
    }
}
