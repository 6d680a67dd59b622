//! The random subspace homogenized trust-region iteration.
//!
//! Each iteration draws a fresh sketch `P_k`, solves the homogenized
//! subproblem for `g~ = P_k g_k` and `H~ = P_k H_k P_k^T`, lifts the
//! resulting direction back with `P_k^T` and moves by one of two rules:
//!
//! * Global phase: if `|d| > radius` the step is shortened to length
//!   `radius` (fixed radius) or chosen by a cubic backtracking line search;
//!   otherwise the full step is taken and the run either stops or switches
//!   to the Local phase.
//! * Local phase: `delta = 0` and the full step `x + d` is always taken.
//!
//! The same engine drives the full-space method (no sketch) used as a
//! baseline, see [`SketchKind::Full`].

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homotrs::{
    extract_direction, solve_leftmost_dense, solve_leftmost_lanczos, BorderedOperator, DirectionRule, HomoSolution,
    LanczosOptions, StepKind, SubproblemMethod,
};
use crate::linalg::norm;
use crate::operators::{EvalCounts, Objective};
use crate::rng::aux_rng;
use crate::sketch::Sketch;

/// Largest radius for which the sufficient-decrease analysis holds.
pub const MAX_DERIVED_RADIUS: f64 = 0.353_553_390_593_273_8; // 1 / (2 sqrt 2)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SketchKind {
    /// `s x n` Gaussian with `N(0, 1/s)` entries.
    #[default]
    Gaussian,
    /// `n x n` with orthonormal rows.
    Orthogonal,
    /// No sketch: the subproblem lives in the ambient space.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    #[default]
    FixedRadius,
    LineSearch {
        gamma: f64,
        beta: f64,
        max_ls_iters: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AcceptMode {
    #[default]
    Always,
    /// Keep `x_k` unless the candidate strictly lowers `f`.
    MonotoneOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OnSmallStep {
    #[default]
    Terminate,
    EnterLocalMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Global,
    Local,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Global => "global",
            Phase::Local => "local",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Subspace dimension `s`; ignored by the orthogonal and full variants.
    pub subspace_dim: usize,
    pub sketch: SketchKind,
    pub epsilon: f64,
    /// Hessian Lipschitz estimate `M`.
    pub hessian_lipschitz: f64,
    /// Stand-in for the absolute constant in the derived `delta`.
    pub c_hat: f64,
    /// Overrides the derived `delta`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Overrides the derived radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub direction_rule: DirectionRule,
    pub step_mode: StepMode,
    pub accept_mode: AcceptMode,
    pub on_small_step: OnSmallStep,
    /// Local-phase stopping tolerance on `|g|`.
    pub grad_tol: f64,
    pub max_iter: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_budget_secs: Option<f64>,
    pub seed: u64,
    pub subproblem: SubproblemMethod,
    pub lanczos: LanczosOptions,
    /// Largest subspace for which a failed Lanczos solve falls back to a
    /// dense eigendecomposition.
    pub dense_threshold: usize,
    /// Accept `epsilon > M^2 / 8` when deriving parameters.
    pub force_params: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            subspace_dim: 100,
            sketch: SketchKind::Gaussian,
            epsilon: 1e-2,
            hessian_lipschitz: 1.0,
            c_hat: 1.0,
            delta: None,
            radius: None,
            direction_rule: DirectionRule::NonzeroT,
            step_mode: StepMode::FixedRadius,
            accept_mode: AcceptMode::Always,
            on_small_step: OnSmallStep::Terminate,
            grad_tol: 1e-8,
            max_iter: 1000,
            time_budget_secs: None,
            seed: 0,
            subproblem: SubproblemMethod::Lanczos,
            lanczos: LanczosOptions::default(),
            dense_threshold: 512,
            force_params: false,
        }
    }
}

/// `delta = (sqrt(n/s) + c_hat)^2 sqrt(eps)` and `radius = sqrt(eps) / M`,
/// valid for `0 < eps <= M^2 / 8`.
pub fn default_params(eps: f64, m: f64, n: usize, s: usize, c_hat: f64) -> Result<(f64, f64)> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::config(format!("Hessian Lipschitz estimate must be positive, got {m}")));
    }
    if !(eps > 0.0) || eps > m * m / 8.0 {
        return Err(Error::config(format!(
            "epsilon must lie in (0, M^2/8] = (0, {}], got {eps}",
            m * m / 8.0
        )));
    }
    default_params_unchecked(eps, m, n, s, c_hat)
}

/// [`default_params`] without the range check on `eps`; the radius is still
/// clamped to `1 / (2 sqrt 2)`.
pub fn default_params_unchecked(eps: f64, m: f64, n: usize, s: usize, c_hat: f64) -> Result<(f64, f64)> {
    if s == 0 || s > n {
        return Err(Error::config(format!("need 1 <= s <= n, got s = {s}, n = {n}")));
    }
    if !(eps > 0.0) || !(m > 0.0) || !(c_hat >= 0.0) {
        return Err(Error::config("epsilon and M must be positive, c_hat nonnegative"));
    }
    let root = eps.sqrt();
    let delta = ((n as f64 / s as f64).sqrt() + c_hat).powi(2) * root;
    let mut radius = root / m;
    if radius > MAX_DERIVED_RADIUS {
        log::warn!("derived radius {radius} exceeds 1/(2 sqrt 2); clamping");
        radius = MAX_DERIVED_RADIUS;
    }
    Ok((delta, radius))
}

#[derive(Debug, Clone)]
pub struct IterateState {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    pub gnorm: f64,
    pub phase: Phase,
    started: Instant,
    base_counts: EvalCounts,
}

impl IterateState {
    pub fn new(obj: &Objective, x0: Vec<f64>) -> Result<Self> {
        let base_counts = obj.counts();
        let f = obj.eval_f(&x0)?;
        let g = obj.eval_grad(&x0)?;
        Ok(Self {
            k: 0,
            gnorm: norm(&g),
            x: x0,
            f,
            g,
            phase: Phase::Global,
            started: Instant::now(),
            base_counts,
        })
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    /// Evaluations spent since the state was created.
    pub fn counts(&self, obj: &Objective) -> EvalCounts {
        let c = obj.counts();
        EvalCounts {
            f: c.f - self.base_counts.f,
            grad: c.grad - self.base_counts.grad,
            hvp: c.hvp - self.base_counts.hvp,
        }
    }
}

/// One row of a run trace. `f` and `gnorm` describe the iterate after the
/// step; the counters and `wall_ms` are cumulative over the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub phase: Phase,
    pub f: f64,
    pub gnorm: f64,
    pub dnorm: f64,
    pub theta: f64,
    pub t: f64,
    pub lambda_min: f64,
    pub step_kind: StepKind,
    pub eta: f64,
    pub accepted: bool,
    pub ls_iters: usize,
    pub hvp_count: u64,
    pub grad_count: u64,
    pub wall_ms: f64,
}

/// Column names of the trace CSV, in order.
pub const TRACE_COLUMNS: [&str; 15] = [
    "k",
    "phase",
    "f",
    "gnorm",
    "dnorm",
    "theta",
    "t",
    "lambda_min",
    "step_kind",
    "eta",
    "accepted",
    "ls_iters",
    "hvp_count",
    "grad_count",
    "wall_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Global phase step with `|d| <= radius` under [`OnSmallStep::Terminate`].
    SmallStep,
    GradientTolerance,
    /// Local phase with a zero direction.
    Stationary,
    Budget,
    TimeBudget,
}

/// Everything one iteration produced, including the subproblem data needed
/// to re-check its certificates.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub record: TraceRecord,
    /// Iterate the step started from.
    pub x_prev: Vec<f64>,
    /// Iterate after the step.
    pub x: Vec<f64>,
    pub sketch: Option<Sketch>,
    pub g_tilde: Vec<f64>,
    /// `delta` handed to the subproblem (0 in the Local phase).
    pub delta: f64,
    pub solution: HomoSolution,
    pub direction: Vec<f64>,
    pub line_search_exhausted: bool,
    pub stop: Option<StopReason>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub gnorm: f64,
    pub f0: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub trace: Vec<TraceRecord>,
    pub hvp_count: u64,
    pub grad_count: u64,
    pub line_search_failures: usize,
    /// Iteration after which the Local phase began.
    pub local_from: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub eta: f64,
    /// Index of the accepted trial, 0 when `eta = 1` passes.
    pub iters: usize,
    pub f_new: f64,
}

/// Backtracking from `eta = 1` by factors of `beta` until
/// `f(x + eta d) - f(x) <= -(gamma / 6) eta^3 |d|^3`.
pub fn backtracking_line_search(
    obj: &Objective,
    x: &[f64],
    d: &[f64],
    gamma: f64,
    beta: f64,
    max_ls_iters: usize,
) -> Result<LineSearchResult> {
    backtracking_from(obj, x, obj.eval_f(x)?, d, gamma, beta, max_ls_iters)
}

fn backtracking_from(
    obj: &Objective,
    x: &[f64],
    fx: f64,
    d: &[f64],
    gamma: f64,
    beta: f64,
    max_ls_iters: usize,
) -> Result<LineSearchResult> {
    validate_line_search(gamma, beta, max_ls_iters)?;
    let dn3 = norm(d).powi(3);
    if dn3 == 0.0 {
        return Err(Error::config("line search needs a nonzero direction"));
    }
    let mut eta = 1.0;
    let mut trial = vec![0.0; x.len()];
    for j in 0..max_ls_iters {
        for ((t, xi), di) in trial.iter_mut().zip(x).zip(d) {
            *t = xi + eta * di;
        }
        // Overflowing trial points count as rejected.
        let f_new = match obj.eval_f(&trial) {
            Ok(v) => v,
            Err(Error::NumericalFailure(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if f_new - fx <= -(gamma / 6.0) * eta.powi(3) * dn3 {
            return Ok(LineSearchResult { eta, iters: j, f_new });
        }
        if j + 1 < max_ls_iters {
            eta *= beta;
        }
    }
    Err(Error::LineSearchExhausted {
        last_eta: eta,
        iters: max_ls_iters,
    })
}

fn validate_line_search(gamma: f64, beta: f64, max_ls_iters: usize) -> Result<()> {
    if !(gamma > 0.0) || !(beta > 0.0 && beta < 1.0) || max_ls_iters == 0 {
        return Err(Error::config(format!(
            "line search needs gamma > 0, beta in (0, 1), max_ls_iters >= 1; got {gamma}, {beta}, {max_ls_iters}"
        )));
    }
    Ok(())
}

/// Configured solver with resolved `delta` and radius.
#[derive(Debug, Clone)]
pub struct Rshtr {
    cfg: SolverConfig,
    n: usize,
    s: usize,
    delta: f64,
    radius: f64,
}

impl Rshtr {
    pub fn new(cfg: SolverConfig, n: usize) -> Result<Self> {
        let s = match cfg.sketch {
            SketchKind::Gaussian => cfg.subspace_dim,
            SketchKind::Orthogonal | SketchKind::Full => n,
        };
        if s == 0 || s > n {
            return Err(Error::config(format!("subspace dimension must satisfy 1 <= s <= n, got s = {s}, n = {n}")));
        }
        cfg.direction_rule.validate()?;
        if let StepMode::LineSearch {
            gamma,
            beta,
            max_ls_iters,
        } = cfg.step_mode
        {
            validate_line_search(gamma, beta, max_ls_iters)?;
        }
        if !(cfg.grad_tol >= 0.0) {
            return Err(Error::config("grad_tol must be nonnegative"));
        }
        let derived = if cfg.delta.is_none() || cfg.radius.is_none() {
            Some(if cfg.force_params {
                default_params_unchecked(cfg.epsilon, cfg.hessian_lipschitz, n, s, cfg.c_hat)?
            } else {
                default_params(cfg.epsilon, cfg.hessian_lipschitz, n, s, cfg.c_hat)?
            })
        } else {
            None
        };
        let delta = cfg.delta.or(derived.map(|p| p.0)).unwrap_or_default();
        let radius = cfg.radius.or(derived.map(|p| p.1)).unwrap_or_default();
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::config(format!("delta must be finite and nonnegative, got {delta}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::config(format!("radius must be finite and positive, got {radius}")));
        }
        Ok(Self {
            cfg,
            n,
            s,
            delta,
            radius,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn subspace_dim(&self) -> usize {
        self.s
    }

    /// Sketch of iteration `k`; `None` for the full-space variant.
    pub fn sketch_for(&self, k: usize) -> Result<Option<Sketch>> {
        let k = k as u64;
        Ok(match self.cfg.sketch {
            SketchKind::Gaussian => Some(Sketch::sample(self.cfg.seed, k, self.s, self.n)?),
            SketchKind::Orthogonal => Some(Sketch::orthogonal(self.cfg.seed, k, self.n)?),
            SketchKind::Full => None,
        })
    }

    fn solve_subproblem(
        &self,
        obj: &Objective,
        x: &[f64],
        sketch: Option<&Sketch>,
        g_tilde: Vec<f64>,
        delta: f64,
        k: usize,
    ) -> Result<HomoSolution> {
        let op = BorderedOperator::new(g_tilde, delta, |u: &[f64]| match sketch {
            Some(sk) => sk.restricted_hvp(obj, x, u),
            None => obj.eval_hvp(x, u),
        })?;
        let dense = |op: &BorderedOperator| -> Result<HomoSolution> {
            let h = op.restricted_hessian()?;
            let mut sol = solve_leftmost_dense(&h, op.gradient(), op.delta())?;
            sol.hvp_count += op.dim() - 1;
            Ok(sol)
        };
        match self.cfg.subproblem {
            SubproblemMethod::Dense => dense(&op),
            SubproblemMethod::Lanczos => {
                let mut rng = aux_rng(self.cfg.seed, k as u64);
                match solve_leftmost_lanczos(&op, &mut rng, &self.cfg.lanczos) {
                    Err(Error::SubproblemNotConverged { best_residual, .. }) if op.dim() - 1 <= self.cfg.dense_threshold => {
                        log::debug!("iteration {k}: Lanczos residual {best_residual:e}, falling back to dense");
                        dense(&op)
                    }
                    other => other,
                }
            }
        }
    }

    /// One outer iteration from `state`, which is advanced in place.
    pub fn step(&self, obj: &Objective, state: &mut IterateState) -> Result<StepOutcome> {
        let k = state.k;
        let phase = state.phase;
        let delta = match phase {
            Phase::Global => self.delta,
            Phase::Local => 0.0,
        };
        let sketch = self.sketch_for(k)?;
        let g_tilde = match &sketch {
            Some(sk) => sk.apply(&state.g)?,
            None => state.g.clone(),
        };
        let sol = self.solve_subproblem(obj, &state.x, sketch.as_ref(), g_tilde.clone(), delta, k)?;
        let rule = match phase {
            Phase::Global => self.cfg.direction_rule,
            Phase::Local => DirectionRule::NonzeroT,
        };
        let (d, kind) = extract_direction(&sol, sketch.as_ref(), rule)?;
        let dnorm = norm(&d);

        let mut eta = 1.0;
        let mut ls_iters = 0;
        let mut ls_exhausted = false;
        let mut f_trial = None;
        let mut stop = None;
        let mut enter_local = false;
        if phase == Phase::Global && dnorm > self.radius {
            match self.cfg.step_mode {
                StepMode::FixedRadius => eta = self.radius / dnorm,
                StepMode::LineSearch {
                    gamma,
                    beta,
                    max_ls_iters,
                } => match backtracking_from(obj, &state.x, state.f, &d, gamma, beta, max_ls_iters) {
                    Ok(ls) => {
                        eta = ls.eta;
                        ls_iters = ls.iters;
                        f_trial = Some(ls.f_new);
                    }
                    Err(Error::LineSearchExhausted { last_eta, iters }) => {
                        log::warn!("iteration {k}: line search exhausted, using eta = {last_eta:e}");
                        eta = last_eta;
                        ls_iters = iters;
                        ls_exhausted = true;
                    }
                    Err(e) => return Err(e),
                },
            }
        } else if phase == Phase::Global {
            match self.cfg.on_small_step {
                OnSmallStep::Terminate => stop = Some(StopReason::SmallStep),
                OnSmallStep::EnterLocalMode => enter_local = true,
            }
        }

        let x_prev = state.x.clone();
        let moved = dnorm > 0.0;
        let candidate: Vec<f64> = if moved {
            state.x.iter().zip(&d).map(|(xi, di)| xi + eta * di).collect()
        } else {
            state.x.clone()
        };
        let f_new = match f_trial {
            Some(v) => v,
            None if moved => obj.eval_f(&candidate)?,
            None => state.f,
        };
        let accepted = match self.cfg.accept_mode {
            AcceptMode::Always => true,
            AcceptMode::MonotoneOnly => f_new < state.f,
        };
        if accepted && moved {
            state.g = obj.eval_grad(&candidate)?;
            state.gnorm = norm(&state.g);
            state.x = candidate;
            state.f = f_new;
        }
        if enter_local {
            state.phase = Phase::Local;
        }
        if phase == Phase::Local && stop.is_none() {
            if state.gnorm <= self.cfg.grad_tol {
                stop = Some(StopReason::GradientTolerance);
            } else if !moved {
                stop = Some(StopReason::Stationary);
            }
        }

        let counts = state.counts(obj);
        let record = TraceRecord {
            k,
            phase,
            f: state.f,
            gnorm: state.gnorm,
            dnorm,
            theta: sol.theta,
            t: sol.t,
            lambda_min: sol.lambda_min,
            step_kind: kind,
            eta,
            accepted,
            ls_iters,
            hvp_count: counts.hvp,
            grad_count: counts.grad,
            wall_ms: state.elapsed().as_secs_f64() * 1e3,
        };
        state.k += 1;
        Ok(StepOutcome {
            record,
            x_prev,
            x: state.x.clone(),
            sketch,
            g_tilde,
            delta,
            solution: sol,
            direction: d,
            line_search_exhausted: ls_exhausted,
            stop,
        })
    }

    pub fn run(&self, obj: &Objective, x0: Vec<f64>) -> Result<RunResult> {
        self.run_with(obj, x0, |_| {})
    }

    /// Runs to a stopping rule, calling `observer` after every iteration.
    pub fn run_with(&self, obj: &Objective, x0: Vec<f64>, mut observer: impl FnMut(&StepOutcome)) -> Result<RunResult> {
        if x0.len() != self.n {
            return Err(Error::config(format!("x0 has length {}, expected {}", x0.len(), self.n)));
        }
        let mut state = IterateState::new(obj, x0)?;
        let f0 = state.f;
        let mut trace = Vec::new();
        let mut ls_failures = 0;
        let mut local_from = None;
        let budget = self.cfg.time_budget_secs.map(Duration::from_secs_f64);
        let stop_reason = loop {
            if trace.len() >= self.cfg.max_iter {
                break StopReason::Budget;
            }
            if budget.is_some_and(|b| state.elapsed() >= b) {
                break StopReason::TimeBudget;
            }
            let before = state.phase;
            let out = match self.step(obj, &mut state) {
                Ok(out) => out,
                Err(cause) => {
                    return Err(Error::RunAborted {
                        cause: Box::new(cause),
                        trace,
                    })
                }
            };
            if before == Phase::Global && state.phase == Phase::Local {
                local_from = Some(out.record.k + 1);
            }
            ls_failures += out.line_search_exhausted as usize;
            observer(&out);
            trace.push(out.record);
            if let Some(reason) = out.stop {
                break reason;
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
            line_search_failures: ls_failures,
            local_from,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticProblem;

    fn quad(n: usize) -> Objective {
        Objective::new(QuadraticProblem::ill_conditioned(3, n, 10.0).unwrap())
    }

    #[test]
    fn default_params_examples() {
        let (d, r) = default_params(0.01, 1.0, 400, 100, 1.0).unwrap();
        assert!((d - 0.9).abs() < 1e-12 && (r - 0.1).abs() < 1e-12);
        let (d, r) = default_params(0.01, 1.0, 50, 50, 0.0).unwrap();
        assert!((d - 0.1).abs() < 1e-12 && (r - 0.1).abs() < 1e-12);
        let (_, r) = default_params(0.5, 2.0, 10, 5, 1.0).unwrap();
        assert!((r - 0.5f64.sqrt() / 2.0).abs() < 1e-15 && r <= MAX_DERIVED_RADIUS);
        assert!(default_params(0.2, 1.0, 10, 5, 1.0).is_err());
        assert!(default_params(0.0, 1.0, 10, 5, 1.0).is_err());
        let (_, r) = default_params_unchecked(4.0, 1.0, 10, 5, 1.0).unwrap();
        assert_eq!(r, MAX_DERIVED_RADIUS);
    }

    #[test]
    fn line_search_examples() {
        let obj = Objective::new(QuadraticProblem::sphere(1));
        let ls = backtracking_line_search(&obj, &[1.0], &[-1.0], 1.0, 0.5, 10).unwrap();
        assert_eq!((ls.eta, ls.iters), (1.0, 0));
        let ls = backtracking_line_search(&obj, &[1.0], &[-1.0], 4.0, 0.5, 10).unwrap();
        assert_eq!((ls.eta, ls.iters), (0.5, 1));
        assert!((ls.f_new - 0.125).abs() < 1e-15);
        match backtracking_line_search(&obj, &[1.0], &[1.0], 1.0, 0.5, 8) {
            Err(Error::LineSearchExhausted { last_eta, iters }) => {
                assert_eq!(iters, 8);
                assert_eq!(last_eta, 0.5f64.powi(7));
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn zero_budget_returns_start() {
        let obj = quad(10);
        let cfg = SolverConfig {
            subspace_dim: 5,
            max_iter: 0,
            ..Default::default()
        };
        let res = Rshtr::new(cfg, 10).unwrap().run(&obj, vec![0.5; 10]).unwrap();
        assert_eq!(res.stop_reason, StopReason::Budget);
        assert_eq!(res.x, vec![0.5; 10]);
        assert!(res.trace.is_empty());
    }

    #[test]
    fn fixed_radius_global_steps_have_length_radius() {
        let n = 30;
        let obj = quad(n);
        let cfg = SolverConfig {
            subspace_dim: 10,
            max_iter: 40,
            on_small_step: OnSmallStep::EnterLocalMode,
            ..Default::default()
        };
        let solver = Rshtr::new(cfg, n).unwrap();
        let mut x0 = vec![0.0; n];
        x0[0] = 20.0;
        let mut checked = 0;
        solver
            .run_with(&obj, x0, |out| {
                if out.record.phase == Phase::Global && out.record.dnorm > solver.radius() {
                    let step: Vec<f64> = out.direction.iter().map(|d| out.record.eta * d).collect();
                    assert!((norm(&step) - solver.radius()).abs() <= 1e-12);
                    checked += 1;
                }
            })
            .unwrap();
        assert!(checked > 0);
    }

    #[test]
    fn stationary_point_is_fixed_in_local_phase() {
        let n = 8;
        let q = QuadraticProblem::ill_conditioned(1, n, 5.0).unwrap();
        let xs = q.minimizer().unwrap();
        let obj = Objective::new(q);
        let cfg = SolverConfig {
            subspace_dim: 4,
            grad_tol: 0.0,
            delta: Some(0.0),
            radius: Some(10.0),
            on_small_step: OnSmallStep::EnterLocalMode,
            ..Default::default()
        };
        let solver = Rshtr::new(cfg, n).unwrap();
        let mut state = IterateState::new(&obj, xs.clone()).unwrap();
        state.phase = Phase::Local;
        let before = state.x.clone();
        let out = solver.step(&obj, &mut state).unwrap();
        let moved = norm(&crate::linalg::sub(&state.x, &before));
        assert!(moved <= 1e-12 * (1.0 + norm(&before)), "moved {moved}, g {}", out.record.gnorm);
    }

    #[test]
    fn full_space_local_step_on_sphere_decreases_f() {
        let n = 6;
        let obj = Objective::new(QuadraticProblem::sphere(n));
        for kind in [SketchKind::Orthogonal, SketchKind::Full] {
            let cfg = SolverConfig {
                sketch: kind,
                subproblem: SubproblemMethod::Dense,
                delta: Some(0.0),
                radius: Some(1.0),
                ..Default::default()
            };
            let solver = Rshtr::new(cfg, n).unwrap();
            let mut state = IterateState::new(&obj, vec![0.3; n]).unwrap();
            state.phase = Phase::Local;
            let f0 = state.f;
            solver.step(&obj, &mut state).unwrap();
            assert!(state.f < 0.5 * f0);
        }
    }

    #[test]
    fn monotone_mode_never_increases_f() {
        let n = 40;
        let obj = Objective::new(crate::problems::Rosenbrock::new(n));
        let cfg = SolverConfig {
            subspace_dim: 10,
            max_iter: 150,
            accept_mode: AcceptMode::MonotoneOnly,
            on_small_step: OnSmallStep::EnterLocalMode,
            ..Default::default()
        };
        let res = Rshtr::new(cfg, n).unwrap().run(&obj, vec![-1.0; n]).unwrap();
        let mut prev = res.f0;
        for r in &res.trace {
            assert!(r.f <= prev);
            prev = r.f;
        }
    }

    #[test]
    fn global_directions_descend() {
        let n = 20;
        let obj = Objective::new(crate::problems::Rosenbrock::new(n));
        let cfg = SolverConfig {
            subspace_dim: 6,
            max_iter: 30,
            ..Default::default()
        };
        let solver = Rshtr::new(cfg, n).unwrap();
        solver
            .run_with(&obj, vec![0.0; n], |out| {
                let g = obj.eval_grad(&out.x_prev).unwrap();
                if out.record.phase == Phase::Global && out.record.dnorm > 0.0 {
                    assert!(crate::linalg::dot(&g, &out.direction) <= 1e-12);
                }
            })
            .unwrap();
    }

    #[test]
    fn rejects_invalid_configs() {
        let bad = [
            SolverConfig {
                subspace_dim: 0,
                ..Default::default()
            },
            SolverConfig {
                subspace_dim: 20,
                ..Default::default()
            },
            SolverConfig {
                subspace_dim: 5,
                direction_rule: DirectionRule::Threshold(0.7),
                ..Default::default()
            },
            SolverConfig {
                subspace_dim: 5,
                step_mode: StepMode::LineSearch {
                    gamma: 1.0,
                    beta: 1.5,
                    max_ls_iters: 10,
                },
                ..Default::default()
            },
            SolverConfig {
                subspace_dim: 5,
                epsilon: 1.0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(Rshtr::new(cfg, 10), Err(Error::InvalidConfig(_))));
        }
    }
}
