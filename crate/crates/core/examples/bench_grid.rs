//! A benchmark grid from a TOML config, written to CSV traces and
//! summarized.
//!
//! cargo run --release --example bench_grid [config.toml]

use rshtr::bench::{run_bench, BenchConfig, RunOptions};

fn main() -> rshtr::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bench.toml").into());
    let cfg = BenchConfig::load(&path)?;
    let out = std::env::temp_dir().join("rshtr-bench-example");
    let opts = RunOptions {
        output_dir: Some(out),
        ..Default::default()
    };
    let outcome = run_bench(&cfg, &opts)?;
    for r in &outcome.reports {
        println!(
            "{:<12} {:<12} seed {} {:<18} iters {:>5} f {:.4e} q {}",
            r.problem,
            r.solver,
            r.seed,
            r.stop_reason,
            r.iterations,
            r.final_f,
            r.q.map_or("-".into(), |q| format!("{q:.2}"))
        );
    }
    println!("{} summary rows, traces in {}", outcome.summary.len(), outcome.output_dir.display());
    Ok(())
}
