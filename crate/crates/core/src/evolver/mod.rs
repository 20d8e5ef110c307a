//! Time integration of the regularized, gauged and direct equations, plus
//! the conservation and difference-bound reports built on their trajectories.

mod checks;
mod gauged;
mod regularized;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checks::{
    conservation_report, l2_difference_check, ConservationReport, ConservationSample, DifferenceReport,
    DifferenceSample,
};
pub use gauged::{solve_gauged, to_gauged_frame};
pub use regularized::{solve_direct, solve_regularized, step_regularized, DIRECT_BLOWUP_FACTOR};
pub use trajectory::{gauged_energy, FieldDump, StepDiagnostics, Termination, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Exponential trapezoid with the implicit stage resolved by Picard iteration.
    ExponentialPicard,
    /// Linear half step, RK4 nonlinear step, linear half step.
    StrangSplit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    pub epsilon: f64,
    pub scheme: Scheme,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub dealias: bool,
    /// Record every `output_stride` steps; the final step is always recorded.
    pub output_stride: usize,
    /// Exponent of the `H^s` diagnostic column.
    pub sobolev_index: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            t_final: 1.0,
            epsilon: 0.0,
            scheme: Scheme::ExponentialPicard,
            picard_tol: 1e-10,
            picard_max_iters: 50,
            dealias: true,
            output_stride: 10,
            sobolev_index: 2.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if self.dt > self.t_final {
            return bad(format!("dt = {} exceeds t_final = {}", self.dt, self.t_final));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must lie in [0, 1], got {}", self.epsilon));
        }
        if !(self.picard_tol > 0.0) {
            return bad(format!("picard_tol must be positive, got {}", self.picard_tol));
        }
        if self.picard_max_iters < 2 {
            return bad(format!(
                "picard_max_iters must be at least 2, got {}",
                self.picard_max_iters
            ));
        }
        if self.output_stride == 0 {
            return bad("output_stride must be positive".into());
        }
        if !self.sobolev_index.is_finite() {
            return bad("sobolev_index must be finite".into());
        }
        Ok(())
    }

    /// Number of steps and the step actually taken; `steps * dt_eff = t_final`.
    pub fn step_plan(&self) -> (usize, f64) {
        let steps = (self.t_final / self.dt).round().max(1.0) as usize;
        (steps, self.t_final / steps as f64)
    }

    /// True when step `k` (1-based) of `steps` is recorded.
    pub(crate) fn records(&self, k: usize, steps: usize) -> bool {
        k.is_multiple_of(self.output_stride) || k == steps
    }
}
