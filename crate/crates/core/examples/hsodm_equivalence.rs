//! With an orthogonal full-dimensional sketch RSHTR reduces to HSODM: both
//! runs produce the same iterates.
//!
//! cargo run --release --example hsodm_equivalence

use rshtr::baselines::Hsodm;
use rshtr::homotrs::DirectionRule;
use rshtr::operators::Objective;
use rshtr::problems::Rosenbrock;
use rshtr::rshtr::{Rshtr, SketchKind};

fn main() -> rshtr::Result<()> {
    let n = 32;
    let obj = Objective::new(Rosenbrock::new(n));
    let x0 = vec![-1.0; n];
    let hsodm = Hsodm {
        delta: 0.05,
        radius: 0.2,
        direction_rule: DirectionRule::NonzeroT,
        grad_tol: 0.0,
        max_iter: 50,
        ..Default::default()
    };
    let full = hsodm.build(n)?.run(&obj, x0.clone())?;
    let mut cfg = hsodm.solver_config();
    cfg.sketch = SketchKind::Orthogonal;
    cfg.subspace_dim = n;
    let sketched = Rshtr::new(cfg, n)?.run(&obj, x0)?;
    let gap = full.x.iter().zip(&sketched.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("hsodm     f {:.6e} |g| {:.2e}", full.f, full.gnorm);
    println!("rshtr-orth f {:.6e} |g| {:.2e}", sketched.f, sketched.gnorm);
    println!("max |x_hsodm - x_rshtr| after {} iters: {gap:.2e}", full.iterations);
    Ok(())
}
