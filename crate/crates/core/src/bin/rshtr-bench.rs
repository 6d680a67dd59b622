use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rshtr::bench::{report_dir, run_bench, run_checks, BenchConfig, RunOptions};
use rshtr::Error;

const EXIT_RUN_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "rshtr-bench", version, about = "Benchmark grids for RSHTR and baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (problem, solver, seed) cell of a config.
    Run {
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, env = "RSHTR_WORKERS")]
        workers: Option<usize>,
        /// Added to every seed in the config.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
    /// Derivative checks and the subproblem oracle comparison.
    Check {
        /// Checks the config's problems instead of the built-in set.
        config: Option<PathBuf>,
    },
    /// Rebuild runs.csv and summary.csv from existing traces.
    Report { dir: PathBuf },
}

fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::InvalidConfig(_) | Error::Parse { .. })
}

fn load(path: &PathBuf) -> Result<BenchConfig, ExitCode> {
    BenchConfig::load(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            seed_offset,
        } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let opts = RunOptions {
                output_dir: out,
                workers,
                seed_offset,
            };
            match run_bench(&cfg, &opts) {
                Ok(outcome) => {
                    for r in &outcome.reports {
                        let q = r.q.map_or("-".into(), |q| format!("{q:.2}"));
                        let status = if r.ok { r.stop_reason.as_str() } else { "FAILED" };
                        println!(
                            "{:<16} {:<16} seed {:<4} {:<18} iters {:<6} f {:<12.6e} |g| {:<10.3e} q {q}",
                            r.problem, r.solver, r.seed, status, r.iterations, r.final_f, r.final_gnorm
                        );
                    }
                    println!("wrote {} traces to {}", outcome.trace_files.len(), outcome.output_dir.display());
                    if outcome.failures() > 0 {
                        eprintln!("{} run(s) failed", outcome.failures());
                        return ExitCode::from(EXIT_RUN_FAILED);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(if is_config_error(&e) { EXIT_CONFIG } else { EXIT_RUN_FAILED })
                }
            }
        }
        Command::Check { config } => {
            let cfg = match config.as_ref().map(load).transpose() {
                Ok(c) => c,
                Err(code) => return code,
            };
            let lines = run_checks(cfg.as_ref());
            let mut failed = 0;
            for l in &lines {
                println!("{} {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail);
                failed += usize::from(!l.passed);
            }
            if failed > 0 {
                eprintln!("{failed} check(s) failed");
                return ExitCode::from(EXIT_RUN_FAILED);
            }
            ExitCode::SUCCESS
        }
        Command::Report { dir } => match report_dir(&dir) {
            Ok(outcome) => {
                println!(
                    "summarized {} traces in {}",
                    outcome.trace_files.len(),
                    outcome.output_dir.display()
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_RUN_FAILED)
            }
        },
    }
}
