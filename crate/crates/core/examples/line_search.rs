//! Fixed-radius steps against the cubic-decrease line search on a
//! Rosenbrock function of low effective dimension, started at the origin.
//!
//! cargo run --release --example line_search

use rshtr::operators::Objective;
use rshtr::problems::LerProblem;
use rshtr::rshtr::{AcceptMode, OnSmallStep, Rshtr, SolverConfig, StepMode};

fn main() -> rshtr::Result<()> {
    let (n, r) = (1000, 20);
    let obj = Objective::new(LerProblem::random(0, n, r)?);
    let line_search = StepMode::LineSearch {
        gamma: 1e-3,
        beta: 0.5,
        max_ls_iters: 60,
    };
    let runs = [
        ("fixed, always", StepMode::FixedRadius, AcceptMode::Always),
        ("fixed, monotone", StepMode::FixedRadius, AcceptMode::MonotoneOnly),
        ("line search", line_search, AcceptMode::MonotoneOnly),
    ];
    for (name, step_mode, accept_mode) in runs {
        let cfg = SolverConfig {
            subspace_dim: 50,
            step_mode,
            accept_mode,
            on_small_step: OnSmallStep::EnterLocalMode,
            grad_tol: 1e-6,
            max_iter: 60,
            ..Default::default()
        };
        let res = Rshtr::new(cfg, n)?.run(&obj, vec![0.0; n])?;
        let increases = res.trace.windows(2).filter(|w| w[1].f > w[0].f).count();
        let rejected = res.trace.iter().filter(|t| !t.accepted).count();
        let ls: usize = res.trace.iter().map(|t| t.ls_iters).sum();
        println!(
            "{name:<16} {:?} after {} iters, f {:.3e}, |g| {:.2e}, increases {increases}, rejected {rejected}, backtracks {ls}",
            res.stop_reason, res.iterations, res.f, res.gnorm
        );
    }
    Ok(())
}
