use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use super::config::{DataFormat, DataSpec, ProblemKind, ProblemSpec, StartSpec};
use crate::error::{Error, Result};
use crate::linalg::{norm, sub};
use crate::operators::SmoothFunction;
use crate::problems::{
    Dataset, LerProblem, LoadOptions, LogisticRegression, MatrixFactorization, QuadraticProblem, Rosenbrock,
    SoftmaxRegression, SyntheticMf,
};
use crate::rng::aux_rng;

pub type IterateError = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A concrete objective with its start point and, when the minimizer is
/// known, the distance-to-solution metric used for order estimates.
#[derive(Clone)]
pub struct ProblemInstance {
    pub name: String,
    pub func: Arc<dyn SmoothFunction>,
    pub x0: Vec<f64>,
    pub error: Option<IterateError>,
}

impl std::fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("dim", &self.func.dim())
            .field("has_error_metric", &self.error.is_some())
            .finish()
    }
}

fn load_dataset(spec: &DataSpec, seed: u64) -> Result<Dataset> {
    let opts = LoadOptions {
        max_features: Some(spec.max_features),
        max_samples: Some(spec.max_samples),
    };
    match &spec.path {
        Some(p) => match spec.format {
            DataFormat::Libsvm => Dataset::load_libsvm(p, opts),
            DataFormat::Csv => Dataset::load_dense_csv(p, opts),
        },
        None => Ok(Dataset::synthetic(
            seed,
            spec.n_samples,
            spec.n_features,
            spec.density,
            spec.n_classes,
        )),
    }
}

fn start_point(spec: StartSpec, n: usize, seed: u64) -> Vec<f64> {
    match spec {
        StartSpec::Zeros => vec![0.0; n],
        StartSpec::Ones => vec![1.0; n],
        StartSpec::Constant(c) => vec![c; n],
        StartSpec::Gaussian(scale) => {
            let mut rng = aux_rng(seed, u64::MAX / 5);
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    scale * z
                })
                .collect()
        }
    }
}

impl ProblemSpec {
    /// Builds the instance of grid cell `seed`.
    pub fn instantiate(&self, seed: u64) -> Result<ProblemInstance> {
        let iseed = self.instance_seed.unwrap_or(seed);
        let mut error: Option<IterateError> = None;
        let mut solve_from_start: Option<Arc<LerProblem>> = None;
        let (func, default_start): (Arc<dyn SmoothFunction>, StartSpec) = match &self.kind {
            ProblemKind::Quadratic { n, kappa } => {
                let q = QuadraticProblem::ill_conditioned(iseed, *n, *kappa)?;
                let xs = q.minimizer().ok_or_else(|| Error::numerical("quadratic has no minimizer"))?;
                error = Some(Arc::new(move |x: &[f64]| norm(&sub(x, &xs))));
                (Arc::new(q), StartSpec::Zeros)
            }
            ProblemKind::Rosenbrock { n } => {
                if *n < 2 {
                    return Err(Error::config("rosenbrock needs n >= 2"));
                }
                (Arc::new(Rosenbrock::new(*n)), StartSpec::Zeros)
            }
            ProblemKind::Ler { n, r, ones_in_range } => {
                let ler = if *ones_in_range {
                    LerProblem::random(iseed, *n, *r)?
                } else {
                    LerProblem::gaussian(iseed, *n, *r)?
                };
                let ler = Arc::new(ler);
                if let Some(xs) = ler.known_minimizer() {
                    let l = ler.clone();
                    error = Some(Arc::new(move |x: &[f64]| l.effective_error(x, &xs)));
                } else {
                    solve_from_start = Some(ler.clone());
                }
                (ler, StartSpec::Zeros)
            }
            ProblemKind::Mf {
                n_u,
                n_v,
                k,
                true_rank,
                noise,
                density,
            } => {
                let mf = MatrixFactorization::synthetic(
                    iseed,
                    SyntheticMf {
                        n_u: *n_u,
                        n_v: *n_v,
                        k: *k,
                        true_rank: true_rank.unwrap_or(*k),
                        noise: *noise,
                        density: *density,
                    },
                )?;
                (Arc::new(mf), StartSpec::Gaussian(0.1))
            }
            ProblemKind::MfRatings { path, k } => {
                (Arc::new(MatrixFactorization::from_ratings(path, *k)?), StartSpec::Gaussian(0.1))
            }
            ProblemKind::Logistic(d) => {
                let ds = Arc::new(load_dataset(d, iseed)?);
                (Arc::new(LogisticRegression::new(ds)?), StartSpec::Zeros)
            }
            ProblemKind::Softmax(d) => {
                let ds = Arc::new(load_dataset(d, iseed)?);
                (Arc::new(SoftmaxRegression::new(ds)?), StartSpec::Zeros)
            }
        };
        let x0 = start_point(self.start.unwrap_or(default_start), func.dim(), seed);
        if let Some(ler) = solve_from_start {
            // Minimizer of the basin containing x0; without one, order
            // estimates fall back to the value metric.
            let tol = 1e-9 * (1.0 + ler.value(&x0).abs());
            if let Ok(xs) = ler.effective_minimizer(&x0, tol, 500) {
                error = Some(Arc::new(move |x: &[f64]| ler.effective_error(x, &xs)));
            }
        }
        Ok(ProblemInstance {
            name: self.name.clone(),
            func,
            x0,
            error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ProblemKind) -> ProblemSpec {
        ProblemSpec {
            name: "p".into(),
            kind,
            start: None,
            instance_seed: None,
        }
    }

    #[test]
    fn instances_have_expected_dimensions_and_metrics() {
        let q = spec(ProblemKind::Quadratic { n: 30, kappa: 10.0 }).instantiate(1).unwrap();
        assert_eq!(q.func.dim(), 30);
        assert!(q.error.is_some());
        let ler = spec(ProblemKind::Ler {
            n: 50,
            r: 5,
            ones_in_range: true,
        })
        .instantiate(1)
        .unwrap();
        let err = ler.error.as_ref().unwrap();
        assert!(err(&vec![1.0; 50]) < 1e-12);
        let mf = spec(ProblemKind::Mf {
            n_u: 20,
            n_v: 30,
            k: 3,
            true_rank: None,
            noise: 0.0,
            density: None,
        })
        .instantiate(2)
        .unwrap();
        assert_eq!(mf.func.dim(), 150);
        assert!(mf.x0.iter().any(|v| *v != 0.0));
    }

    #[test]
    fn instance_seed_pins_the_instance() {
        let mut s = spec(ProblemKind::Quadratic { n: 5, kappa: 3.0 });
        s.instance_seed = Some(4);
        let a = s.instantiate(0).unwrap();
        let b = s.instantiate(9).unwrap();
        let x = vec![0.3; 5];
        assert_eq!(a.func.value(&x), b.func.value(&x));
    }
}
