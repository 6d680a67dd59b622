use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::operators::SmoothFunction;
use crate::rng::aux_rng;

#[derive(Debug, Clone, PartialEq)]
enum Curvature {
    Diagonal(Vec<f64>),
    /// Row-major symmetric matrix.
    Dense(Vec<f64>),
}

/// `f(x) = 1/2 x^T A x - b^T x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    n: usize,
    a: Curvature,
    b: Vec<f64>,
}

impl QuadraticProblem {
    /// `1/2 |x|^2`
    pub fn sphere(n: usize) -> Self {
        Self {
            n,
            a: Curvature::Diagonal(vec![1.0; n]),
            b: vec![0.0; n],
        }
    }

    pub fn diagonal(eigenvalues: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() != b.len() || b.is_empty() {
            return Err(Error::config("diagonal quadratic: spectrum and b differ in length"));
        }
        Ok(Self {
            n: b.len(),
            a: Curvature::Diagonal(eigenvalues),
            b,
        })
    }

    pub fn dense(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != n * n || b.len() != n {
            return Err(Error::config("dense quadratic: shape mismatch"));
        }
        for i in 0..n {
            for j in 0..i {
                if (a[i * n + j] - a[j * n + i]).abs() > 1e-12 * (1.0 + a[i * n + j].abs()) {
                    return Err(Error::config("dense quadratic: matrix is not symmetric"));
                }
            }
        }
        Ok(Self {
            n,
            a: Curvature::Dense(a),
            b,
        })
    }

    /// Diagonal quadratic with eigenvalues log-spaced in `[1, kappa]` and a
    /// Gaussian right-hand side drawn from `seed`.
    pub fn ill_conditioned(seed: u64, n: usize, kappa: f64) -> Result<Self> {
        if n == 0 || !(kappa >= 1.0) {
            return Err(Error::config(format!("need n >= 1 and kappa >= 1, got n = {n}, kappa = {kappa}")));
        }
        let eig = (0..n)
            .map(|i| {
                let frac = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                kappa.powf(frac)
            })
            .collect();
        let mut rng = aux_rng(seed, u64::MAX / 2);
        let b = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        Self::diagonal(eig, b)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        match &self.a {
            Curvature::Diagonal(d) => d.iter().zip(v).map(|(a, b)| a * b).collect(),
            Curvature::Dense(a) => (0..self.n).map(|i| dot(&a[i * self.n..(i + 1) * self.n], v)).collect(),
        }
    }

    /// Solution of `A x = b`; available for the diagonal form with a
    /// nonsingular spectrum, or through a dense Cholesky otherwise.
    pub fn minimizer(&self) -> Option<Vec<f64>> {
        match &self.a {
            Curvature::Diagonal(d) => {
                if d.iter().any(|v| *v <= 0.0) {
                    return None;
                }
                Some(self.b.iter().zip(d).map(|(b, a)| b / a).collect())
            }
            Curvature::Dense(a) => {
                let m = nalgebra::DMatrix::from_row_slice(self.n, self.n, a);
                let chol = m.cholesky()?;
                Some(chol.solve(&nalgebra::DVector::from_column_slice(&self.b)).as_slice().to_vec())
            }
        }
    }
}

impl SmoothFunction for QuadraticProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.matvec(x)) - dot(&self.b, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.matvec(x);
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi -= bi;
        }
        g
    }

    fn hvp(&self, _x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        Some(self.matvec(v))
    }

    fn name(&self) -> String {
        format!("quadratic-n{}", self.n)
    }
}
