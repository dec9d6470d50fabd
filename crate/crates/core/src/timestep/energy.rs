use crate::assembly::{BlockSystem, NonlinearEvaluation};

/// `E = ||w||^2_{R - D/4} + ||y||^2_D` with `w = c^n - c^{n-1}` and
/// `2y = c^n + c^{n-1}`, where `R = (2 S_lin - S_n + tau D_lin) / (2 tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDiagnostic {
    pub w_part: f64,
    pub y_part: f64,
    pub value: f64,
    /// `false` when the `R - D/4` form came out negative.
    pub hypothesis_ok: bool,
}

impl EnergyDiagnostic {
    fn new(w_part: f64, y_part: f64, scale: f64) -> Self {
        Self {
            w_part,
            y_part,
            value: w_part + y_part,
            hypothesis_ok: w_part >= -1e-12 * scale,
        }
    }
}

/// Energy of one step before and after, both measured with the operators of
/// that step so that `after <= before` whenever the source vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEnergy {
    pub before: EnergyDiagnostic,
    pub after: EnergyDiagnostic,
}

pub fn energy_functional(sys: &BlockSystem, ev: &NonlinearEvaluation, c_n: &[f64], c_prev: &[f64]) -> EnergyDiagnostic {
    let tau = sys.tau();
    let n = c_n.len();
    let rp = ev.s.row_ptr();
    let ci = ev.s.col_idx();
    let (sl, dl) = (sys.s_lin().values(), sys.d_lin().values());
    let (sn, dn) = (ev.s.values(), ev.d.values());
    let mut ws = 0.0;
    let mut wd = 0.0;
    let mut yd = 0.0;
    let mut scale = 0.0;
    for i in 0..n {
        let wi = c_n[i] - c_prev[i];
        let yi = 0.5 * (c_n[i] + c_prev[i]);
        for k in rp[i]..rp[i + 1] {
            let j = ci[k];
            let wj = c_n[j] - c_prev[j];
            let yj = 0.5 * (c_n[j] + c_prev[j]);
            ws += wi * (2.0 * sl[k] - sn[k]) * wj;
            wd += wi * (2.0 * dl[k] - dn[k]) * wj;
            yd += yi * dn[k] * yj;
            scale += (wi * wj).abs() * ((2.0 * sl[k] - sn[k]).abs() / (2.0 * tau) + (2.0 * dl[k] - dn[k]).abs() / 4.0);
        }
    }
    EnergyDiagnostic::new(ws / (2.0 * tau) + wd / 4.0, yd, scale)
}

pub(super) fn energy_pair(
    sys: &BlockSystem,
    ev: &NonlinearEvaluation,
    c_next: &[f64],
    c_n: &[f64],
    c_prev: &[f64],
) -> StepEnergy {
    StepEnergy {
        before: energy_functional(sys, ev, c_n, c_prev),
        after: energy_functional(sys, ev, c_next, c_n),
    }
}
