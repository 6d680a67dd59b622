//! Comparison methods sharing the objective, sketch and trace interfaces.
//!
//! * [`Hsodm`]: the full-space homogenized second-order method, run by the
//!   same engine as [`Rshtr`] without a sketch.
//! * [`GradientDescent`]: `d = -g` (GD) or `d = -P^T P g` with a fresh
//!   Gaussian sketch per iteration (RSGD), both with Armijo backtracking.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homotrs::{DirectionRule, LanczosOptions, StepKind};
use crate::linalg::{dot, norm};
use crate::operators::Objective;
use crate::rshtr::{
    AcceptMode, IterateState, OnSmallStep, Phase, RunResult, Rshtr, SketchKind, SolverConfig, StopReason, TraceRecord,
};
use crate::sketch::Sketch;

/// Anything that turns a start point into a traced run. `on_record` sees
/// every trace record together with the iterate after that iteration.
pub trait Solver {
    fn label(&self) -> String;

    fn run_observed(&self, obj: &Objective, x0: Vec<f64>, on_record: &mut dyn FnMut(&TraceRecord, &[f64])) -> Result<RunResult>;
}

impl Solver for Rshtr {
    fn label(&self) -> String {
        match self.config().sketch {
            SketchKind::Full => "hsodm".into(),
            _ => format!("rshtr-s{}", self.subspace_dim()),
        }
    }

    fn run_observed(&self, obj: &Objective, x0: Vec<f64>, on_record: &mut dyn FnMut(&TraceRecord, &[f64])) -> Result<RunResult> {
        self.run_with(obj, x0, |out| on_record(&out.record, &out.x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hsodm {
    pub delta: f64,
    pub radius: f64,
    pub direction_rule: DirectionRule,
    pub on_small_step: OnSmallStep,
    pub accept_mode: AcceptMode,
    pub grad_tol: f64,
    pub max_iter: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_budget_secs: Option<f64>,
    pub seed: u64,
    pub lanczos: LanczosOptions,
}

impl Default for Hsodm {
    /// `(delta, radius, nu) = (1e-3, 1e-3, 0.1)`.
    fn default() -> Self {
        Self {
            delta: 1e-3,
            radius: 1e-3,
            direction_rule: DirectionRule::Threshold(0.1),
            on_small_step: OnSmallStep::EnterLocalMode,
            accept_mode: AcceptMode::Always,
            grad_tol: 1e-8,
            max_iter: 1000,
            time_budget_secs: None,
            seed: 0,
            lanczos: LanczosOptions {
                check_every: Some(10),
                ..Default::default()
            },
        }
    }
}

impl Hsodm {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            sketch: SketchKind::Full,
            delta: Some(self.delta),
            radius: Some(self.radius),
            direction_rule: self.direction_rule,
            accept_mode: self.accept_mode,
            on_small_step: self.on_small_step,
            grad_tol: self.grad_tol,
            max_iter: self.max_iter,
            time_budget_secs: self.time_budget_secs,
            seed: self.seed,
            lanczos: self.lanczos,
            ..Default::default()
        }
    }

    pub fn build(&self, n: usize) -> Result<Rshtr> {
        Rshtr::new(self.solver_config(), n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmijoParams {
    /// Sufficient-decrease constant in `f(x + eta d) <= f(x) + c eta g^T d`.
    pub c: f64,
    pub beta: f64,
    pub eta0: f64,
    pub max_ls_iters: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self {
            c: 1e-4,
            beta: 0.5,
            eta0: 1.0,
            max_ls_iters: 60,
        }
    }
}

/// Gradient descent, optionally restricted to a random subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradientDescent {
    /// `Some(s)` draws an `s x n` sketch each iteration (RSGD).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subspace_dim: Option<usize>,
    pub armijo: ArmijoParams,
    pub grad_tol: f64,
    pub max_iter: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_budget_secs: Option<f64>,
    pub seed: u64,
}

impl Default for GradientDescent {
    fn default() -> Self {
        Self {
            subspace_dim: None,
            armijo: ArmijoParams::default(),
            grad_tol: 1e-8,
            max_iter: 1000,
            time_budget_secs: None,
            seed: 0,
        }
    }
}

/// One first-order iteration.
#[derive(Debug, Clone)]
pub struct FirstOrderStep {
    pub record: TraceRecord,
    pub direction: Vec<f64>,
    pub stop: Option<StopReason>,
}

impl GradientDescent {
    pub fn gd() -> Self {
        Self::default()
    }

    pub fn rsgd(s: usize) -> Self {
        Self {
            subspace_dim: Some(s),
            ..Self::default()
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let a = &self.armijo;
        if !(a.c > 0.0 && a.c < 1.0) || !(a.beta > 0.0 && a.beta < 1.0) || !(a.eta0 > 0.0) || a.max_ls_iters == 0 {
            return Err(Error::config(format!("invalid Armijo parameters {a:?}")));
        }
        if let Some(s) = self.subspace_dim {
            if s == 0 || s > n {
                return Err(Error::config(format!("RSGD needs 1 <= s <= n, got s = {s}, n = {n}")));
            }
        }
        Ok(())
    }

    /// Direction of iteration `k`: `-g`, or `-P_k^T P_k g`.
    pub fn direction(&self, k: usize, g: &[f64]) -> Result<Vec<f64>> {
        Ok(match self.subspace_dim {
            None => g.iter().map(|v| -v).collect(),
            Some(s) => {
                let sk = Sketch::sample(self.seed, k as u64, s, g.len())?;
                sk.apply_transpose(&sk.apply(g)?)?.into_iter().map(|v| -v).collect()
            }
        })
    }

    pub fn step(&self, obj: &Objective, state: &mut IterateState) -> Result<FirstOrderStep> {
        self.validate(state.x.len())?;
        let k = state.k;
        let d = self.direction(k, &state.g)?;
        let slope = dot(&state.g, &d);
        let dnorm = norm(&d);
        let a = self.armijo;
        let mut eta = a.eta0;
        let mut accepted = false;
        let mut ls_iters = 0;
        if dnorm > 0.0 && slope < 0.0 {
            let mut trial = vec![0.0; d.len()];
            for j in 0..a.max_ls_iters {
                for ((t, xi), di) in trial.iter_mut().zip(&state.x).zip(&d) {
                    *t = xi + eta * di;
                }
                let ft = match obj.eval_f(&trial) {
                    Ok(v) => v,
                    Err(Error::NumericalFailure(_)) => f64::INFINITY,
                    Err(e) => return Err(e),
                };
                ls_iters = j;
                if ft <= state.f + a.c * eta * slope {
                    state.g = obj.eval_grad(&trial)?;
                    state.gnorm = norm(&state.g);
                    state.x.copy_from_slice(&trial);
                    state.f = ft;
                    accepted = true;
                    break;
                }
                if j + 1 < a.max_ls_iters {
                    eta *= a.beta;
                }
            }
            if !accepted {
                log::warn!("iteration {k}: Armijo search exhausted at eta = {eta:e}");
                ls_iters = a.max_ls_iters;
            }
        }
        let stop = if state.gnorm <= self.grad_tol {
            Some(StopReason::GradientTolerance)
        } else if dnorm == 0.0 {
            Some(StopReason::Stationary)
        } else {
            None
        };
        let counts = state.counts(obj);
        let record = TraceRecord {
            k,
            phase: Phase::Global,
            f: state.f,
            gnorm: state.gnorm,
            dnorm,
            theta: f64::NAN,
            t: f64::NAN,
            lambda_min: f64::NAN,
            step_kind: StepKind::Gradient,
            eta,
            accepted,
            ls_iters,
            hvp_count: counts.hvp,
            grad_count: counts.grad,
            wall_ms: state.elapsed().as_secs_f64() * 1e3,
        };
        state.k += 1;
        Ok(FirstOrderStep { record, direction: d, stop })
    }
}

impl Solver for GradientDescent {
    fn label(&self) -> String {
        match self.subspace_dim {
            None => "gd".into(),
            Some(s) => format!("rsgd-s{s}"),
        }
    }

    fn run_observed(&self, obj: &Objective, x0: Vec<f64>, on_record: &mut dyn FnMut(&TraceRecord, &[f64])) -> Result<RunResult> {
        if x0.len() != obj.dim() {
            return Err(Error::config(format!("x0 has length {}, expected {}", x0.len(), obj.dim())));
        }
        self.validate(obj.dim())?;
        let mut state = IterateState::new(obj, x0)?;
        let f0 = state.f;
        let budget = self.time_budget_secs.map(Duration::from_secs_f64);
        let mut trace = Vec::new();
        let mut failures = 0;
        let stop_reason = loop {
            if state.gnorm <= self.grad_tol {
                break StopReason::GradientTolerance;
            }
            if trace.len() >= self.max_iter {
                break StopReason::Budget;
            }
            if budget.is_some_and(|b| state.elapsed() >= b) {
                break StopReason::TimeBudget;
            }
            let out = match self.step(obj, &mut state) {
                Ok(out) => out,
                Err(cause) => {
                    return Err(Error::RunAborted {
                        cause: Box::new(cause),
                        trace,
                    })
                }
            };
            failures += (!out.record.accepted && out.record.dnorm > 0.0) as usize;
            on_record(&out.record, &state.x);
            trace.push(out.record);
            if let Some(r) = out.stop {
                break r;
            }
        };
        let counts = state.counts(obj);
        Ok(RunResult {
            iterations: trace.len(),
            x: state.x,
            f: state.f,
            gnorm: state.gnorm,
            f0,
            stop_reason,
            trace,
            hvp_count: counts.hvp,
            grad_count: counts.grad,
            line_search_failures: failures,
            local_from: None,
        })
    }
}
