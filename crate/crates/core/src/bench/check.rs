//! Invariant suites behind `rshtr-bench check`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{BenchConfig, ProblemKind, ProblemSpec};
use crate::error::Result;
use crate::homotrs::{solve_leftmost_dense, solve_leftmost_lanczos, BorderedOperator, LanczosOptions};
use crate::linalg::norm;
use crate::operators::{check_gradient, check_hvp, Objective};
use crate::rng::aux_rng;

pub const GRAD_CHECK_TOL: f64 = 1e-5;
pub const HVP_CHECK_TOL: f64 = 1e-4;
pub const CHECK_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Gradient and HVP checks at random points around the problem's start.
pub fn check_problem(spec: &ProblemSpec, seed: u64) -> Vec<CheckLine> {
    let inst = match spec.instantiate(seed) {
        Ok(i) => i,
        Err(e) => {
            return vec![CheckLine {
                name: format!("{}: instantiate", spec.name),
                passed: false,
                detail: e.to_string(),
            }]
        }
    };
    let obj = Objective::from_arc(inst.func.clone());
    let n = obj.dim();
    let mut rng = aux_rng(seed, 17);
    let (mut gw, mut hw) = (0.0_f64, 0.0_f64);
    let mut failure = None;
    for p in 0..CHECK_POINTS {
        let x: Vec<f64> = inst
            .x0
            .iter()
            .map(|v| v + 0.5 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        match (check_gradient(&obj, &x, GRAD_CHECK_TOL, seed + p as u64), check_hvp(&obj, &x, &v, HVP_CHECK_TOL)) {
            (Ok(g), Ok(h)) => {
                gw = gw.max(g.max_rel_error);
                hw = hw.max(h.max_rel_error);
            }
            (Err(e), _) | (_, Err(e)) => failure = Some(e.to_string()),
        }
    }
    let line = |what: &str, worst: f64, tol: f64| CheckLine {
        name: format!("{}: {what}", spec.name),
        passed: failure.is_none() && worst <= tol,
        detail: failure
            .clone()
            .unwrap_or_else(|| format!("max rel err {worst:.2e} (tol {tol:.0e}) over {CHECK_POINTS} points")),
    };
    vec![line("gradient", gw, GRAD_CHECK_TOL), line("hvp", hw, HVP_CHECK_TOL)]
}

/// Largest deviations between the Lanczos and dense subproblem solvers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OracleDeviation {
    pub instances: usize,
    pub lambda: f64,
    pub theta: f64,
    pub alignment: f64,
    pub kkt_residual: f64,
}

fn mixed_instance(rng: &mut impl Rng, s: usize) -> (DMatrix<f64>, Vec<f64>) {
    let b = DMatrix::from_fn(s, s, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = b.qr().q();
    let eig = nalgebra::DVector::from_fn(s, |i, _| {
        let u: f64 = rng.random_range(0.1..3.0);
        if i % 2 == 0 { -u } else { u }
    });
    let h = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    let h = (&h + h.transpose()) * 0.5;
    let g = (0..s).map(|_| rng.sample(StandardNormal)).collect();
    (h, g)
}

/// Solves `count` random mixed-sign instances of size `s` with both solvers,
/// cycling `delta` through `deltas`.
pub fn subproblem_oracle(count: usize, s: usize, deltas: &[f64], seed: u64) -> Result<OracleDeviation> {
    let mut rng = aux_rng(seed, 23);
    let mut dev = OracleDeviation {
        instances: count,
        ..Default::default()
    };
    for i in 0..count {
        let delta = deltas[i % deltas.len()];
        let (h, g) = mixed_instance(&mut rng, s);
        let dense = solve_leftmost_dense(&h, &g, delta)?;
        let op = BorderedOperator::from_dense(h.clone(), g.clone(), delta)?;
        let lz = solve_leftmost_lanczos(&op, &mut rng, &LanczosOptions::default())?;
        dev.lambda = dev.lambda.max((lz.lambda_min - dense.lambda_min).abs());
        dev.theta = dev.theta.max((lz.theta - dense.theta).abs());
        let mut wl = lz.v_tilde.clone();
        wl.push(lz.t);
        let mut wd = dense.v_tilde.clone();
        wd.push(dense.t);
        let plus: f64 = wl.iter().zip(&wd).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
        let minus: f64 = wl.iter().zip(&wd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        dev.alignment = dev.alignment.max(plus.min(minus));
        let fw = op.apply(&wl)?;
        let r: Vec<f64> = fw.iter().zip(&wl).map(|(a, b)| a - lz.lambda_min * b).collect();
        dev.kkt_residual = dev.kkt_residual.max(norm(&r) / norm(&wl));
    }
    Ok(dev)
}

fn default_problems() -> Vec<ProblemSpec> {
    let p = |name: &str, kind| ProblemSpec {
        name: name.into(),
        kind,
        start: None,
        instance_seed: None,
    };
    vec![
        p("quadratic", ProblemKind::Quadratic { n: 50, kappa: 100.0 }),
        p("rosenbrock", ProblemKind::Rosenbrock { n: 20 }),
        p(
            "ler",
            ProblemKind::Ler {
                n: 100,
                r: 10,
                ones_in_range: true,
            },
        ),
        p(
            "mf",
            ProblemKind::Mf {
                n_u: 20,
                n_v: 30,
                k: 3,
                true_rank: None,
                noise: 0.01,
                density: Some(0.5),
            },
        ),
        p("logistic", ProblemKind::Logistic(Default::default())),
        p(
            "softmax",
            ProblemKind::Softmax(super::config::DataSpec {
                n_classes: 4,
                ..Default::default()
            }),
        ),
    ]
}

/// Derivative checks on the configured problems (a built-in set when `cfg`
/// is `None`) plus the subproblem oracle comparison.
pub fn run_checks(cfg: Option<&BenchConfig>) -> Vec<CheckLine> {
    let problems = cfg.map_or_else(default_problems, |c| c.problems.clone());
    let seed = cfg.and_then(|c| c.seeds.first().copied()).unwrap_or(0);
    let mut lines: Vec<CheckLine> = problems.iter().flat_map(|p| check_problem(p, seed)).collect();
    let name = "subproblem: lanczos vs dense".to_string();
    lines.push(match subproblem_oracle(30, 20, &[0.0, 0.1, 1.0], seed) {
        Ok(d) => CheckLine {
            name,
            passed: d.lambda <= 1e-8 && d.theta <= 1e-8 && d.alignment <= 1e-6 && d.kkt_residual <= 1e-8,
            detail: format!(
                "|dlambda| {:.1e}, |dtheta| {:.1e}, alignment {:.1e}, residual {:.1e}",
                d.lambda, d.theta, d.alignment, d.kkt_residual
            ),
        },
        Err(e) => CheckLine {
            name,
            passed: false,
            detail: e.to_string(),
        },
    });
    lines
}
