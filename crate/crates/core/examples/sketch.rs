//! Seeded Gaussian sketches: reproducibility, norm preservation and the
//! binary dump round trip.
//!
//! cargo run --release --example sketch

use rand::Rng;
use rand_distr::StandardNormal;
use rshtr::linalg::norm;
use rshtr::rng::aux_rng;
use rshtr::sketch::Sketch;

fn main() -> rshtr::Result<()> {
    let (n, s) = (2000, 100);
    let a = Sketch::sample(42, 7, s, n)?;
    let b = Sketch::sample(42, 7, s, n)?;
    println!("same (seed, draw) gives the same matrix: {}", a == b);

    let mut rng = aux_rng(0, 0);
    let mut ratios: Vec<f64> = (0..200)
        .map(|_| {
            let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            norm(&a.apply(&x).unwrap()) / norm(&x)
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    println!(
        "|Px|/|x| over 200 vectors: min {:.3}, median {:.3}, max {:.3}",
        ratios[0], ratios[100], ratios[199]
    );

    let path = std::env::temp_dir().join("rshtr-sketch.bin");
    a.save(&path)?;
    let c = Sketch::load(&path)?;
    println!("dump {} round trips: {}", path.display(), a.entries() == c.entries());
    Ok(())
}
