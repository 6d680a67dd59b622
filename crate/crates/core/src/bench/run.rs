use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::BenchConfig;
use super::order::{decreasing_tail, estimate_order};
use crate::error::{Error, Result};
use crate::operators::Objective;
use crate::rshtr::{Phase, TraceRecord};

/// Errors at or below this value are treated as converged to rounding and
/// excluded from order estimates.
pub const ORDER_FLOOR: f64 = 1e-12;

pub const RUNS_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
const TIME_GRID_POINTS: usize = 50;

const PLOT_STUB: &str = r#"# Plots mean +/- std of f from summary.csv.
import sys
import pandas as pd
import matplotlib.pyplot as plt

d = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "summary.csv")
for axis, label in [("iter", "iteration"), ("time_ms", "time [ms]")]:
    fig, ax = plt.subplots()
    for (p, s), g in d[d.axis == axis].groupby(["problem", "solver"]):
        ax.plot(g.point, g.mean_f, label=f"{p} / {s}")
        ax.fill_between(g.point, g.mean_f - g.std_f, g.mean_f + g.std_f, alpha=0.2)
    ax.set_xlabel(label)
    ax.set_ylabel("f")
    ax.set_yscale("log")
    ax.legend()
    fig.savefig(f"summary_{axis}.png", dpi=150)
"#;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed_offset: u64,
}

/// Per-run outcome, one row of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub problem: String,
    pub solver: String,
    pub seed: u64,
    pub ok: bool,
    pub message: String,
    pub stop_reason: String,
    pub final_f: f64,
    pub final_gnorm: f64,
    pub iterations: usize,
    pub hvp_count: u64,
    pub grad_count: u64,
    /// `iterate` (distance to a known minimizer) or `value` (`f - f_best`).
    pub error_metric: String,
    pub local_points: usize,
    pub q: Option<f64>,
    pub rho: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub problem: String,
    pub solver: String,
    /// `iter` or `time_ms`.
    pub axis: String,
    pub point: f64,
    pub mean_f: f64,
    pub std_f: f64,
    pub runs: usize,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub output_dir: PathBuf,
    pub reports: Vec<ConvergenceReport>,
    pub summary: Vec<SummaryRow>,
    pub trace_files: Vec<PathBuf>,
}

impl BenchOutcome {
    pub fn failures(&self) -> usize {
        self.reports.iter().filter(|r| !r.ok).count()
    }
}

pub fn trace_file_name(problem: &str, solver: &str, seed: u64) -> String {
    format!("{problem}__{solver}__seed{seed}.csv")
}

fn parse_trace_file_name(name: &str) -> Option<(String, String, u64)> {
    let stem = name.strip_suffix(".csv")?;
    let mut parts = stem.split("__");
    let (p, s, seed) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() {
        return None;
    }
    Some((p.to_string(), s.to_string(), seed.strip_prefix("seed")?.parse().ok()?))
}

pub(crate) fn trace_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Writes records as CSV with the fixed trace header.
pub fn write_trace<W: Write>(w: W, records: &[TraceRecord]) -> Result<()> {
    let mut wr = trace_writer(w);
    for r in records {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    let mut rd = csv::Reader::from_path(path.as_ref()).map_err(csv_err)?;
    let headers = rd.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(crate::rshtr::TRACE_COLUMNS.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: format!("unexpected trace header {headers:?}"),
        });
    }
    rd.deserialize().map(|r| r.map_err(csv_err)).collect()
}

fn csv_err(e: csv::Error) -> Error {
    let (line, message) = match e.position() {
        Some(p) => (p.line() as usize, e.to_string()),
        None => (0, e.to_string()),
    };
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        _ => Error::Parse {
            line,
            column: 0,
            message,
        },
    }
}

/// Local-phase order estimate from per-record errors.
fn order_from(errors: &[f64]) -> (usize, Option<f64>, Option<f64>) {
    let tail = decreasing_tail(errors, ORDER_FLOOR);
    match estimate_order(tail) {
        Ok(est) => (tail.len(), Some(est.q), Some(est.rho)),
        Err(_) => (tail.len(), None, None),
    }
}

/// Value-based errors `f_k - f_best` over the Local-phase records.
fn value_errors(trace: &[TraceRecord]) -> Vec<f64> {
    let f_best = trace.iter().map(|r| r.f).fold(f64::INFINITY, f64::min);
    trace
        .iter()
        .filter(|r| r.phase == Phase::Local)
        .map(|r| r.f - f_best)
        .collect()
}

struct Cell<'a> {
    problem: &'a super::config::ProblemSpec,
    solver: &'a super::config::SolverSpec,
    seed: u64,
}

fn run_cell(cfg: &BenchConfig, cell: &Cell, dir: &Path) -> (ConvergenceReport, Vec<TraceRecord>, PathBuf) {
    let path = dir.join(trace_file_name(&cell.problem.name, &cell.solver.name, cell.seed));
    let mut report = ConvergenceReport {
        problem: cell.problem.name.clone(),
        solver: cell.solver.name.clone(),
        seed: cell.seed,
        ok: false,
        message: String::new(),
        stop_reason: String::new(),
        final_f: f64::NAN,
        final_gnorm: f64::NAN,
        iterations: 0,
        hvp_count: 0,
        grad_count: 0,
        error_metric: "value".into(),
        local_points: 0,
        q: None,
        rho: None,
        wall_ms: 0.0,
    };
    let mut records = Vec::new();
    let outcome = (|| -> Result<()> {
        let inst = cell.problem.instantiate(cell.seed)?;
        let n = inst.func.dim();
        let solver = cell.solver.build(n, cell.seed, cfg.max_iter, cfg.time_budget_secs)?;
        let obj = Objective::from_arc(inst.func.clone());
        let mut wr = trace_writer(BufWriter::new(File::create(&path)?));
        let mut write_err: Option<Error> = None;
        let mut local_errors = Vec::new();
        let mut last_written = None;
        let res = solver.run_observed(&obj, inst.x0.clone(), &mut |rec, x| {
            if rec.k % cfg.trace_every == 0 {
                if let Err(e) = wr.serialize(rec) {
                    write_err.get_or_insert(csv_err(e));
                }
                last_written = Some(rec.k);
            }
            if let (Some(err), Phase::Local) = (&inst.error, rec.phase) {
                local_errors.push(err(x));
            }
            records.push(rec.clone());
        });
        if let Some(last) = records.last() {
            if last_written != Some(last.k) {
                wr.serialize(last).map_err(csv_err)?;
            }
        }
        wr.flush()?;
        if let Some(e) = write_err {
            return Err(e);
        }
        let res = res?;
        report.stop_reason = format!("{:?}", res.stop_reason);
        report.final_f = res.f;
        report.final_gnorm = res.gnorm;
        report.iterations = res.iterations;
        report.hvp_count = res.hvp_count;
        report.grad_count = res.grad_count;
        report.wall_ms = res.trace.last().map_or(0.0, |r| r.wall_ms);
        let errors = if inst.error.is_some() {
            report.error_metric = "iterate".into();
            local_errors
        } else {
            value_errors(&res.trace)
        };
        (report.local_points, report.q, report.rho) = order_from(&errors);
        Ok(())
    })();
    match outcome {
        Ok(()) => report.ok = true,
        Err(e) => {
            log::error!("{} / {} / seed {}: {e}", cell.problem.name, cell.solver.name, cell.seed);
            if let Some(last) = records.last() {
                report.iterations = records.len();
                report.final_f = last.f;
                report.final_gnorm = last.gnorm;
            }
            report.message = e.to_string();
        }
    }
    (report, records, path)
}

/// Runs every (problem, solver, seed) cell of `cfg`, writing one trace CSV
/// per cell plus `runs.csv` and `summary.csv`. Failed runs are recorded in
/// the reports and do not stop the grid.
pub fn run_bench(cfg: &BenchConfig, opts: &RunOptions) -> Result<BenchOutcome> {
    cfg.validate()?;
    let dir = opts.output_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&dir)?;
    let mut cells = Vec::new();
    for problem in &cfg.problems {
        for solver in &cfg.solvers {
            for &seed in &cfg.seeds {
                cells.push(Cell {
                    problem,
                    solver,
                    seed: seed + opts.seed_offset,
                });
            }
        }
    }
    let workers = opts.workers.or(cfg.workers).unwrap_or_else(rayon::current_num_threads).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(e.to_string()))?;
    let results: Vec<_> = pool.install(|| cells.par_iter().map(|c| run_cell(cfg, c, &dir)).collect());

    let mut reports = Vec::with_capacity(results.len());
    let mut traces = Vec::with_capacity(results.len());
    let mut files = Vec::with_capacity(results.len());
    for (rep, rec, path) in results {
        traces.push(((rep.problem.clone(), rep.solver.clone()), rec));
        reports.push(rep);
        files.push(path);
    }
    let summary = summarize(&traces);
    write_reports(&dir, &reports, &summary)?;
    std::fs::write(dir.join("bench.toml"), cfg.to_toml()?)?;
    Ok(BenchOutcome {
        output_dir: dir,
        reports,
        summary,
        trace_files: files,
    })
}

fn write_reports(dir: &Path, reports: &[ConvergenceReport], summary: &[SummaryRow]) -> Result<()> {
    let mut wr = trace_writer(BufWriter::new(File::create(dir.join(RUNS_FILE))?));
    for r in reports {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    let mut wr = trace_writer(BufWriter::new(File::create(dir.join(SUMMARY_FILE))?));
    for r in summary {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    std::fs::write(dir.join("plot_summary.py"), PLOT_STUB)?;
    Ok(())
}

/// `f` of the last record at or before `at` on the given axis; the first
/// record stands in before the run's first point.
fn value_at(trace: &[TraceRecord], at: f64, axis: fn(&TraceRecord) -> f64) -> f64 {
    let idx = trace.partition_point(|r| axis(r) <= at);
    trace[idx.saturating_sub(1)].f
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    if lo == hi {
        return (lo, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean and standard deviation of `f` across seeds on a shared iteration
/// grid and a shared wall-clock grid, per (problem, solver).
pub fn summarize(traces: &[((String, String), Vec<TraceRecord>)]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<&(String, String), Vec<&[TraceRecord]>> = BTreeMap::new();
    for (key, tr) in traces {
        if !tr.is_empty() {
            groups.entry(key).or_default().push(tr);
        }
    }
    let mut rows = Vec::new();
    for ((problem, solver), runs) in groups {
        let mut ks: Vec<usize> = runs.iter().flat_map(|t| t.iter().map(|r| r.k)).collect();
        ks.sort_unstable();
        ks.dedup();
        let t_max = runs.iter().map(|t| t.last().unwrap().wall_ms).fold(0.0, f64::max);
        let time_grid = (0..TIME_GRID_POINTS).map(|i| t_max * i as f64 / (TIME_GRID_POINTS - 1) as f64);
        let iter_axis: fn(&TraceRecord) -> f64 = |r| r.k as f64;
        let time_axis: fn(&TraceRecord) -> f64 = |r| r.wall_ms;
        for (name, axis, points) in [
            ("iter", iter_axis, ks.iter().map(|k| *k as f64).collect::<Vec<_>>()),
            ("time_ms", time_axis, time_grid.collect()),
        ] {
            for p in points {
                let vals: Vec<f64> = runs.iter().map(|t| value_at(t, p, axis)).collect();
                let (mean_f, std_f) = mean_std(&vals);
                rows.push(SummaryRow {
                    problem: problem.clone(),
                    solver: solver.clone(),
                    axis: name.into(),
                    point: p,
                    mean_f,
                    std_f,
                    runs: vals.len(),
                });
            }
        }
    }
    rows
}

/// Rebuilds `runs.csv` and `summary.csv` from the trace files in `dir`.
/// Order estimates use the value metric since traces hold no iterates.
pub fn report_dir(dir: impl AsRef<Path>) -> Result<BenchOutcome> {
    let dir = dir.as_ref();
    let mut entries: Vec<(String, String, u64, PathBuf)> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            let (p, s, seed) = parse_trace_file_name(&name)?;
            Some((p, s, seed, e.path()))
        })
        .collect();
    if entries.is_empty() {
        return Err(Error::InsufficientData(format!("no trace files in {}", dir.display())));
    }
    entries.sort();
    let mut reports = Vec::new();
    let mut traces = Vec::new();
    let mut files = Vec::new();
    for (problem, solver, seed, path) in entries {
        let trace = read_trace(&path)?;
        let last = trace.last();
        let (local_points, q, rho) = order_from(&value_errors(&trace));
        reports.push(ConvergenceReport {
            problem: problem.clone(),
            solver: solver.clone(),
            seed,
            ok: true,
            message: String::new(),
            stop_reason: String::new(),
            final_f: last.map_or(f64::NAN, |r| r.f),
            final_gnorm: last.map_or(f64::NAN, |r| r.gnorm),
            iterations: last.map_or(0, |r| r.k + 1),
            hvp_count: last.map_or(0, |r| r.hvp_count),
            grad_count: last.map_or(0, |r| r.grad_count),
            error_metric: "value".into(),
            local_points,
            q,
            rho,
            wall_ms: last.map_or(0.0, |r| r.wall_ms),
        });
        traces.push(((problem, solver), trace));
        files.push(path);
    }
    let summary = summarize(&traces);
    write_reports(dir, &reports, &summary)?;
    Ok(BenchOutcome {
        output_dir: dir.to_path_buf(),
        reports,
        summary,
        trace_files: files,
    })
}
