//! RSHTR on an ill-conditioned quadratic: global phase, switch to the local
//! phase, then the linear rate of the local iterates.
//!
//! cargo run --release --example quadratic_local

use rshtr::operators::Objective;
use rshtr::problems::QuadraticProblem;
use rshtr::rshtr::{OnSmallStep, Phase, Rshtr, SolverConfig};

fn main() -> rshtr::Result<()> {
    let n = 200;
    let q = QuadraticProblem::ill_conditioned(0, n, 100.0)?;
    let x_star = q.minimizer().expect("positive definite");
    let obj = Objective::new(q);

    for s in [20, 50, 100] {
        let cfg = SolverConfig {
            subspace_dim: s,
            epsilon: 1e-2,
            on_small_step: OnSmallStep::EnterLocalMode,
            grad_tol: 1e-8,
            max_iter: 20_000,
            ..Default::default()
        };
        let solver = Rshtr::new(cfg, n)?;
        let mut errors = Vec::new();
        let res = solver.run_with(&obj, vec![0.0; n], |out| {
            if out.record.phase == Phase::Local {
                let e: f64 = out.x.iter().zip(&x_star).map(|(a, b)| (a - b).powi(2)).sum();
                errors.push(e.sqrt());
            }
        })?;
        let tail = &errors[errors.len().saturating_sub(50)..];
        let rate = tail.windows(2).map(|w| w[1] / w[0]).sum::<f64>() / (tail.len() - 1) as f64;
        println!(
            "s {s:>3}: {:?} after {} iters, local from {:?}, |g| {:.2e}, mean local ratio {rate:.4}",
            res.stop_reason,
            res.iterations,
            res.local_from,
            res.gnorm
        );
    }
    Ok(())
}
