//! Low effective Rosenbrock: `f(x) = R(A^T A x)` where `A` has `r < n`
//! orthonormal rows, so `f` only depends on the projection `Pi x` onto an
//! `r`-dimensional subspace.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::rosenbrock::{rosen_grad, rosen_hvp, rosen_value};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, sub};
use crate::operators::SmoothFunction;
use crate::rng::aux_rng;
use crate::sketch::orthonormalize_rows;

#[derive(Debug, Clone)]
pub struct LerProblem {
    n: usize,
    r: usize,
    /// Row-major `r x n`, orthonormal rows.
    rows: Vec<f64>,
}

impl LerProblem {
    /// Random instance whose effective subspace contains the all-ones
    /// vector, so the Rosenbrock minimizer is attainable: `f(1) = 0`.
    /// The remaining `r - 1` directions come from a Gaussian draw.
    pub fn random(seed: u64, n: usize, r: usize) -> Result<Self> {
        Self::build(seed, n, r, true)
    }

    /// Random instance spanned by `r` orthonormalized Gaussian rows only.
    pub fn gaussian(seed: u64, n: usize, r: usize) -> Result<Self> {
        Self::build(seed, n, r, false)
    }

    fn build(seed: u64, n: usize, r: usize, with_ones: bool) -> Result<Self> {
        if r == 0 || r >= n {
            return Err(Error::config(format!("LER needs 1 <= r < n, got r = {r}, n = {n}")));
        }
        let mut rng = aux_rng(seed, u64::MAX / 3);
        let mut rows: Vec<f64> = (0..r * n).map(|_| StandardNormal.sample(&mut rng)).collect();
        if with_ones {
            rows[..n].fill(1.0);
        }
        orthonormalize_rows(&mut rows, r, n)?;
        Ok(Self { n, r, rows })
    }

    /// Explicit `r x n` row-major matrix; rows are orthonormalized.
    pub fn from_rows(n: usize, r: usize, mut rows: Vec<f64>) -> Result<Self> {
        if r == 0 || r >= n || rows.len() != r * n {
            return Err(Error::config("LER rows: shape mismatch or r >= n"));
        }
        orthonormalize_rows(&mut rows, r, n)?;
        Ok(Self { n, r, rows })
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.n..(i + 1) * self.n]
    }

    /// `A x`
    pub fn reduce(&self, x: &[f64]) -> Vec<f64> {
        (0..self.r).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A^T z`
    pub fn lift(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &zi) in z.iter().enumerate() {
            axpy(zi, self.row(i), &mut out);
        }
        out
    }

    /// `Pi x = A^T A x`
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.lift(&self.reduce(x))
    }

    /// The all-ones vector when it lies in the effective subspace.
    pub fn known_minimizer(&self) -> Option<Vec<f64>> {
        let ones = vec![1.0; self.n];
        let p = self.project(&ones);
        (norm(&sub(&p, &ones)) <= 1e-10 * (self.n as f64).sqrt()).then_some(ones)
    }

    /// `|Pi (x - x_star)|`
    pub fn effective_error(&self, x: &[f64], x_star: &[f64]) -> f64 {
        norm(&self.reduce(&sub(x, x_star)))
    }

    /// Newton iteration in effective coordinates `z = A x` started from
    /// `x_start`, with a Levenberg shift whenever the reduced Hessian is not
    /// positive definite. Returns `A^T z*`.
    pub fn effective_minimizer(&self, x_start: &[f64], grad_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        let r = self.r;
        let mut z = self.reduce(x_start);
        let value = |z: &[f64]| rosen_value(&self.lift(z));
        for _ in 0..max_iter {
            let y = self.lift(&z);
            let gz = self.reduce(&rosen_grad(&y));
            if norm(&gz) <= grad_tol {
                return Ok(self.lift(&z));
            }
            let mut h = DMatrix::zeros(r, r);
            for j in 0..r {
                let col = self.reduce(&rosen_hvp(&y, self.row(j)));
                for i in 0..r {
                    h[(i, j)] = col[i];
                }
            }
            let h = (&h + h.transpose()) * 0.5;
            let rhs = -DVector::from_column_slice(&gz);
            let mut shift = 0.0;
            let step = loop {
                let shifted = &h + DMatrix::identity(r, r) * shift;
                if let Some(ch) = shifted.cholesky() {
                    break ch.solve(&rhs);
                }
                shift = if shift == 0.0 { 1e-8 * (1.0 + h.norm()) } else { shift * 10.0 };
            };
            let f0 = value(&z);
            let slope = dot(&gz, step.as_slice());
            let mut eta = 1.0;
            loop {
                let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + eta * b).collect();
                if value(&trial) <= f0 + 1e-4 * eta * slope || eta < 1e-12 {
                    z = trial;
                    break;
                }
                eta *= 0.5;
            }
        }
        Err(Error::numerical("effective-space Newton did not reach the gradient tolerance"))
    }
}

impl SmoothFunction for LerProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        rosen_value(&self.project(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.project(&rosen_grad(&self.project(x)))
    }

    fn hvp(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let y = self.project(x);
        Some(self.project(&rosen_hvp(&y, &self.project(v))))
    }

    fn name(&self) -> String {
        format!("ler-n{}-r{}", self.n, self.r)
    }
}
