//! Logistic regression on a LIBSVM file: a synthetic dataset is written to
//! a temporary file, loaded back with truncation, and fitted with RSHTR.
//!
//! cargo run --release --example classification [path.libsvm]

use std::sync::Arc;

use rshtr::operators::Objective;
use rshtr::problems::{Dataset, LoadOptions, LogisticRegression};
use rshtr::rshtr::{OnSmallStep, Rshtr, SolverConfig};

fn main() -> rshtr::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let path = std::env::temp_dir().join("rshtr-example.libsvm");
            let mut file = std::fs::File::create(&path)?;
            Dataset::synthetic(0, 800, 300, 0.05, 2).write_libsvm(&mut file)?;
            path
        }
    };
    let data = Dataset::load_libsvm(&path, LoadOptions::standard_truncation())?;
    println!(
        "{}: {} samples, {} features, classes {:?}",
        path.display(),
        data.n_samples(),
        data.n_features(),
        data.classes()
    );
    let obj = Objective::new(LogisticRegression::new(Arc::new(data))?);
    let n = obj.dim();
    let cfg = SolverConfig {
        subspace_dim: 50.min(n),
        on_small_step: OnSmallStep::EnterLocalMode,
        grad_tol: 1e-6,
        max_iter: 500,
        ..Default::default()
    };
    let res = Rshtr::new(cfg, n)?.run(&obj, vec![0.0; n])?;
    for t in res.trace.iter().step_by(25) {
        println!("k {:>4} {:<6} f {:.6} |g| {:.2e}", t.k, t.phase.as_str(), t.f, t.gnorm);
    }
    println!("{:?} after {} iters, f {:.6}", res.stop_reason, res.iterations, res.f);
    Ok(())
}
