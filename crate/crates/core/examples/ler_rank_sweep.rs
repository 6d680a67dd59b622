//! Gradient norm of RSHTR on Rosenbrock functions of low effective
//! dimension, for several effective ranks and a fixed subspace size. The
//! start is a random perturbation of the all-ones minimizer inside the
//! effective subspace.
//!
//! cargo run --release --example ler_rank_sweep

use rand::Rng;
use rand_distr::StandardNormal;
use rshtr::operators::Objective;
use rshtr::problems::LerProblem;
use rshtr::rng::aux_rng;
use rshtr::rshtr::{OnSmallStep, Rshtr, SolverConfig};

fn main() -> rshtr::Result<()> {
    let (n, s, iters) = (1000, 50, 100);
    println!("{:>6} {:>12} {:>12} {:>12}", "rank", "|g| @25", "|g| @50", "|g| @100");
    for r in [10, 25, 50, 150] {
        let ler = LerProblem::random(1, n, r)?;
        let mut rng = aux_rng(1, 0);
        let z: Vec<f64> = (0..r).map(|_| rng.sample::<f64, _>(StandardNormal) / (r as f64).sqrt()).collect();
        let x0: Vec<f64> = ler.lift(&z).iter().map(|v| 1.0 + v).collect();
        let obj = Objective::new(ler);
        let cfg = SolverConfig {
            subspace_dim: s,
            on_small_step: OnSmallStep::EnterLocalMode,
            grad_tol: 0.0,
            max_iter: iters,
            ..Default::default()
        };
        let res = Rshtr::new(cfg, n)?.run(&obj, x0)?;
        let at = |k: usize| res.trace.iter().find(|t| t.k == k).map_or(res.gnorm, |t| t.gnorm);
        println!("{r:>6} {:>12.3e} {:>12.3e} {:>12.3e}", at(25), at(50), at(100));
    }
    Ok(())
}
