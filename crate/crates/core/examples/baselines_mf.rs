//! RSHTR against full-space HSODM, gradient descent and random subspace
//! gradient descent on matrix factorization, under a common time budget.
//!
//! cargo run --release --example baselines_mf

use rshtr::baselines::{GradientDescent, Hsodm, Solver};
use rshtr::homotrs::{DirectionRule, LanczosOptions};
use rshtr::operators::Objective;
use rshtr::problems::{MatrixFactorization, SyntheticMf};
use rshtr::rshtr::{OnSmallStep, Rshtr, SolverConfig, StepMode};

fn main() -> rshtr::Result<()> {
    let secs = 5.0;
    let mf = MatrixFactorization::synthetic(
        0,
        SyntheticMf {
            n_u: 100,
            n_v: 150,
            k: 8,
            true_rank: 8,
            noise: 0.0,
            density: None,
        },
    )?;
    let x0 = mf.random_start(0, 0.1);
    let obj = Objective::new(mf);
    let n = obj.dim();
    let lanczos = LanczosOptions {
        tol: 1e-8,
        check_every: Some(5),
        ..Default::default()
    };

    let rshtr = Rshtr::new(
        SolverConfig {
            subspace_dim: 100,
            delta: Some(1e-3),
            radius: Some(1e-3),
            direction_rule: DirectionRule::Threshold(0.1),
            step_mode: StepMode::LineSearch {
                gamma: 1e-3,
                beta: 0.5,
                max_ls_iters: 60,
            },
            on_small_step: OnSmallStep::EnterLocalMode,
            grad_tol: 1e-8,
            max_iter: usize::MAX,
            time_budget_secs: Some(secs),
            lanczos,
            force_params: true,
            ..Default::default()
        },
        n,
    )?;
    let hsodm = Hsodm {
        max_iter: usize::MAX,
        time_budget_secs: Some(secs),
        lanczos,
        ..Default::default()
    }
    .build(n)?;
    let budget = |mut gd: GradientDescent| {
        gd.max_iter = usize::MAX;
        gd.time_budget_secs = Some(secs);
        gd
    };
    let solvers: Vec<Box<dyn Solver>> = vec![
        Box::new(rshtr),
        Box::new(hsodm),
        Box::new(budget(GradientDescent::gd())),
        Box::new(budget(GradientDescent::rsgd(100))),
    ];

    println!("n = {n}, {secs} s each");
    for solver in &solvers {
        obj.reset_counts();
        let res = solver.run_observed(&obj, x0.clone(), &mut |_, _| {})?;
        println!(
            "{:<12} iters {:>7} f {:.4e} |g| {:.2e} hvps {:>8}",
            solver.label(),
            res.iterations,
            res.f,
            res.gnorm,
            res.hvp_count
        );
    }
    Ok(())
}
