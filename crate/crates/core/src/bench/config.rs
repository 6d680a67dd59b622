//! Benchmark grid configuration, stored as TOML.
//!
//! ```toml
//! version = 1
//! output_dir = "results"
//! seeds = [0, 1, 2, 3, 4]
//! max_iter = 500
//!
//! [[problems]]
//! name = "ler-r20"
//! [problems.ler]
//! n = 1000
//! r = 20
//!
//! [[solvers]]
//! name = "rshtr"
//! [solvers.rshtr]
//! subspace_dim = 50
//! on_small_step = "enter_local_mode"
//! ```
//!
//! The full schema is described in `docs/bench-config.md`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{GradientDescent, Hsodm, Solver};
use crate::error::{Error, Result};
use crate::rshtr::{Rshtr, SolverConfig};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub version: u32,
    pub output_dir: PathBuf,
    pub seeds: Vec<u64>,
    /// Overrides every solver's iteration budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// Overrides every solver's wall-clock budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget_secs: Option<f64>,
    /// Write every `trace_every`-th record (the last record is always kept).
    #[serde(default = "one")]
    pub trace_every: usize,
    /// Concurrent runs; `None` uses all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub problems: Vec<ProblemSpec>,
    pub solvers: Vec<SolverSpec>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ProblemKind,
    /// Starting point; each problem has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<StartSpec>,
    /// Fixes the random instance across seeds; otherwise the run seed is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// Diagonal quadratic with log-spaced spectrum in `[1, kappa]`.
    Quadratic { n: usize, kappa: f64 },
    Rosenbrock { n: usize },
    Ler {
        n: usize,
        r: usize,
        /// Put the all-ones vector in the effective subspace.
        #[serde(default = "yes")]
        ones_in_range: bool,
    },
    Mf {
        n_u: usize,
        n_v: usize,
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        true_rank: Option<usize>,
        #[serde(default)]
        noise: f64,
        /// Observed fraction; present means masked.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        density: Option<f64>,
    },
    /// `user item rating` triples, one per line.
    MfRatings { path: PathBuf, k: usize },
    Logistic(DataSpec),
    Softmax(DataSpec),
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    #[default]
    Libsvm,
    Csv,
}

/// A file-backed or synthetic classification dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: DataFormat,
    #[serde(default = "default_max_features")]
    pub max_features: usize,
    #[serde(default = "default_max_samples")]
    pub max_samples: usize,
    /// Synthetic generator, used when `path` is absent.
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_features")]
    pub n_features: usize,
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_classes")]
    pub n_classes: usize,
}

fn default_max_features() -> usize {
    10_000
}
fn default_max_samples() -> usize {
    1_000
}
fn default_samples() -> usize {
    500
}
fn default_features() -> usize {
    200
}
fn default_density() -> f64 {
    0.1
}
fn default_classes() -> usize {
    2
}

impl Default for DataSpec {
    fn default() -> Self {
        Self {
            path: None,
            format: DataFormat::Libsvm,
            max_features: default_max_features(),
            max_samples: default_max_samples(),
            n_samples: default_samples(),
            n_features: default_features(),
            density: default_density(),
            n_classes: default_classes(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartSpec {
    Zeros,
    Ones,
    Constant(f64),
    /// `N(0, scale^2)` entries from the run seed.
    Gaussian(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub name: String,
    #[serde(flatten)]
    pub method: SolverMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Rshtr(SolverConfig),
    Hsodm(Hsodm),
    Gd(GradientDescent),
    Rsgd(GradientDescent),
}

impl SolverSpec {
    /// Solver for one grid cell: the run seed and the grid budgets replace
    /// the configured ones.
    pub fn build(&self, n: usize, seed: u64, max_iter: Option<usize>, time_budget: Option<f64>) -> Result<Box<dyn Solver + Send + Sync>> {
        Ok(match &self.method {
            SolverMethod::Rshtr(cfg) => {
                let mut cfg = cfg.clone();
                cfg.seed = seed;
                cfg.max_iter = max_iter.unwrap_or(cfg.max_iter);
                cfg.time_budget_secs = time_budget.or(cfg.time_budget_secs);
                Box::new(Rshtr::new(cfg, n)?)
            }
            SolverMethod::Hsodm(h) => {
                let mut h = h.clone();
                h.seed = seed;
                h.max_iter = max_iter.unwrap_or(h.max_iter);
                h.time_budget_secs = time_budget.or(h.time_budget_secs);
                Box::new(h.build(n)?)
            }
            SolverMethod::Gd(g) | SolverMethod::Rsgd(g) => {
                let mut g = g.clone();
                if matches!(self.method, SolverMethod::Gd(_)) {
                    g.subspace_dim = None;
                } else if g.subspace_dim.is_none() {
                    return Err(Error::config(format!("solver '{}': rsgd needs subspace_dim", self.name)));
                }
                g.seed = seed;
                g.max_iter = max_iter.unwrap_or(g.max_iter);
                g.time_budget_secs = time_budget.or(g.time_budget_secs);
                Box::new(g)
            }
        })
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.contains("__")
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    /// Reads a config file; relative data paths are resolved against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in &mut cfg.problems {
            let data_path = match &mut p.kind {
                ProblemKind::MfRatings { path, .. } => Some(path),
                ProblemKind::Logistic(d) | ProblemKind::Softmax(d) => d.path.as_mut(),
                _ => None,
            };
            if let Some(dp) = data_path {
                if dp.is_relative() {
                    *dp = base.join(&*dp);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::config(format!(
                "unsupported config version {}, expected {CONFIG_VERSION}",
                self.version
            )));
        }
        if self.seeds.is_empty() || self.problems.is_empty() || self.solvers.is_empty() {
            return Err(Error::config("seeds, problems and solvers must be nonempty"));
        }
        if self.trace_every == 0 {
            return Err(Error::config("trace_every must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers must be at least 1"));
        }
        let mut seen = HashSet::new();
        for name in self.problems.iter().map(|p| &p.name) {
            if !valid_name(name) || !seen.insert(("p", name)) {
                return Err(Error::config(format!("problem name '{name}' is invalid or repeated")));
            }
        }
        for name in self.solvers.iter().map(|s| &s.name) {
            if !valid_name(name) || !seen.insert(("s", name)) {
                return Err(Error::config(format!("solver name '{name}' is invalid or repeated")));
            }
        }
        let mut seeds = HashSet::new();
        if !self.seeds.iter().all(|s| seeds.insert(*s)) {
            return Err(Error::config("seeds must be distinct"));
        }
        Ok(())
    }
}
