//! Benchmark grid: configuration, problem instances, runs and reports.

mod check;
mod config;
mod order;
mod problem;
mod run;

pub use check::{check_problem, run_checks, subproblem_oracle, CheckLine, OracleDeviation};
pub use config::*;
pub use order::{decreasing_tail, estimate_order, OrderEstimate, MIN_ORDER_POINTS};
pub use problem::{IterateError, ProblemInstance};
pub use run::{
    read_trace, report_dir, run_bench, summarize, trace_file_name, write_trace, BenchOutcome, ConvergenceReport,
    RunOptions, SummaryRow, ORDER_FLOOR, RUNS_FILE, SUMMARY_FILE,
};
