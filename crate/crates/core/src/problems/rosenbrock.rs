use crate::operators::SmoothFunction;

/// Chained Rosenbrock function `sum_i 100 (x_{i+1} - x_i^2)^2 + (x_i - 1)^2`.
#[derive(Debug, Clone, Copy)]
pub struct Rosenbrock {
    n: usize,
}

impl Rosenbrock {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Rosenbrock needs n >= 2");
        Self { n }
    }
}

pub(crate) fn rosen_value(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| {
            let a = w[1] - w[0] * w[0];
            let b = w[0] - 1.0;
            100.0 * a * a + b * b
        })
        .sum()
}

pub(crate) fn rosen_grad(x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len().saturating_sub(1) {
        let a = x[i + 1] - x[i] * x[i];
        g[i] += -400.0 * x[i] * a + 2.0 * (x[i] - 1.0);
        g[i + 1] += 200.0 * a;
    }
    g
}

pub(crate) fn rosen_hvp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let mut hv = vec![0.0; x.len()];
    for i in 0..x.len().saturating_sub(1) {
        let dii = 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
        let off = -400.0 * x[i];
        hv[i] += dii * v[i] + off * v[i + 1];
        hv[i + 1] += off * v[i] + 200.0 * v[i + 1];
    }
    hv
}

impl SmoothFunction for Rosenbrock {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        rosen_value(x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        rosen_grad(x)
    }

    fn hvp(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        Some(rosen_hvp(x, v))
    }

    fn name(&self) -> String {
        format!("rosenbrock-n{}", self.n)
    }
}
