//! The homogenized subproblem on a random indefinite matrix, solved by
//! Lanczos and by a dense eigendecomposition.
//!
//! cargo run --release --example subproblem

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rshtr::bench::subproblem_oracle;
use rshtr::homotrs::{extract_direction, solve_leftmost_dense, solve_leftmost_lanczos, BorderedOperator, DirectionRule, LanczosOptions};
use rshtr::rng::aux_rng;

fn main() -> rshtr::Result<()> {
    let s = 30;
    let mut rng = aux_rng(3, 0);
    let b = DMatrix::from_fn(s, s, |_, _| rng.sample::<f64, _>(StandardNormal));
    let h = (&b + b.transpose()) * 0.5;
    let g: Vec<f64> = (0..s).map(|_| rng.sample(StandardNormal)).collect();

    for delta in [0.0, 0.1, 1.0] {
        let dense = solve_leftmost_dense(&h, &g, delta)?;
        let op = BorderedOperator::from_dense(h.clone(), g.clone(), delta)?;
        let lz = solve_leftmost_lanczos(&op, &mut rng, &LanczosOptions::default())?;
        let (d, kind) = extract_direction(&lz, None, DirectionRule::NonzeroT)?;
        let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        println!(
            "delta {delta:<4} lambda dense {:+.10} lanczos {:+.10} theta {:.6} t {:.4} step {:?} |d| {dn:.4}",
            dense.lambda_min, lz.lambda_min, lz.theta, lz.t, kind
        );
    }

    let dev = subproblem_oracle(100, 30, &[0.0, 0.1, 1.0], 2024)?;
    println!(
        "{} instances: max |dlambda| {:.1e}, |dtheta| {:.1e}, alignment {:.1e}, residual {:.1e}",
        dev.instances, dev.lambda, dev.theta, dev.alignment, dev.kkt_residual
    );
    Ok(())
}
