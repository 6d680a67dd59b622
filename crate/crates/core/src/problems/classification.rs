//! Cross-entropy classification losses on row-sparse data, with a bias
//! feature appended to every sample (`x_hat = [x; 1]`).
//!
//! * [`LogisticRegression`]: two classes, logits `(w^T x_hat, 0)`; the
//!   decision vector has `d + 1` entries.
//! * [`SoftmaxRegression`]: `K` classes, logits `w_j^T x_hat`; the decision
//!   vector stacks `w_0, ..., w_{K-1}` and has `K (d + 1)` entries.

use std::sync::Arc;

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::operators::SmoothFunction;

fn class_indices(ds: &Dataset) -> (Vec<usize>, usize) {
    let classes = ds.classes();
    let idx = ds
        .labels
        .iter()
        .map(|l| classes.partition_point(|c| c < l))
        .collect();
    (idx, classes.len())
}

/// `x_hat^T w` for sample `i`, with `w` of length `d + 1`.
fn affine(ds: &Dataset, i: usize, w: &[f64]) -> f64 {
    let d = ds.n_features();
    let (idx, val) = ds.features.row(i);
    idx.iter().zip(val).map(|(j, v)| w[*j] * v).sum::<f64>() + w[d]
}

/// `out += c * x_hat` for sample `i`.
fn add_sample(ds: &Dataset, i: usize, c: f64, out: &mut [f64]) {
    let d = ds.n_features();
    let (idx, val) = ds.features.row(i);
    for (j, v) in idx.iter().zip(val) {
        out[*j] += c * v;
    }
    out[d] += c;
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone)]
pub struct LogisticRegression {
    data: Arc<Dataset>,
    /// 1 for the larger of the two label values, 0 otherwise.
    targets: Vec<f64>,
}

impl LogisticRegression {
    pub fn new(data: Arc<Dataset>) -> Result<Self> {
        let (idx, k) = class_indices(&data);
        if k != 2 {
            return Err(Error::config(format!("logistic regression needs exactly 2 classes, found {k}")));
        }
        let targets = idx.into_iter().map(|c| c as f64).collect();
        Ok(Self { data, targets })
    }
}

impl SmoothFunction for LogisticRegression {
    fn dim(&self) -> usize {
        self.data.n_features() + 1
    }

    fn value(&self, w: &[f64]) -> f64 {
        let n = self.targets.len() as f64;
        self.targets
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let z = affine(&self.data, i, w);
                softplus(z) - y * z
            })
            .sum::<f64>()
            / n
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let n = self.targets.len() as f64;
        let mut g = vec![0.0; self.dim()];
        for (i, y) in self.targets.iter().enumerate() {
            let p = sigmoid(affine(&self.data, i, w));
            add_sample(&self.data, i, (p - y) / n, &mut g);
        }
        g
    }

    fn hvp(&self, w: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let n = self.targets.len() as f64;
        let mut out = vec![0.0; self.dim()];
        for i in 0..self.targets.len() {
            let p = sigmoid(affine(&self.data, i, w));
            let xv = affine(&self.data, i, v);
            add_sample(&self.data, i, p * (1.0 - p) * xv / n, &mut out);
        }
        Some(out)
    }

    fn name(&self) -> String {
        format!("logistic-d{}", self.data.n_features())
    }
}

#[derive(Debug, Clone)]
pub struct SoftmaxRegression {
    data: Arc<Dataset>,
    classes: Vec<usize>,
    k: usize,
}

impl SoftmaxRegression {
    pub fn new(data: Arc<Dataset>) -> Result<Self> {
        let (classes, k) = class_indices(&data);
        if k < 2 {
            return Err(Error::config("softmax regression needs at least 2 classes"));
        }
        Ok(Self { data, classes, k })
    }

    pub fn n_classes(&self) -> usize {
        self.k
    }

    fn block(&self) -> usize {
        self.data.n_features() + 1
    }

    fn logits(&self, i: usize, w: &[f64]) -> Vec<f64> {
        let b = self.block();
        (0..self.k).map(|j| affine(&self.data, i, &w[j * b..(j + 1) * b])).collect()
    }
}

fn log_softmax_parts(z: &[f64]) -> (f64, Vec<f64>) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    (m + s.ln(), e.into_iter().map(|v| v / s).collect())
}

impl SmoothFunction for SoftmaxRegression {
    fn dim(&self) -> usize {
        self.k * self.block()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let n = self.classes.len() as f64;
        self.classes
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let z = self.logits(i, w);
                let (lse, _) = log_softmax_parts(&z);
                lse - z[y]
            })
            .sum::<f64>()
            / n
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let n = self.classes.len() as f64;
        let b = self.block();
        let mut g = vec![0.0; self.dim()];
        for (i, &y) in self.classes.iter().enumerate() {
            let (_, p) = log_softmax_parts(&self.logits(i, w));
            for j in 0..self.k {
                let c = p[j] - if j == y { 1.0 } else { 0.0 };
                add_sample(&self.data, i, c / n, &mut g[j * b..(j + 1) * b]);
            }
        }
        g
    }

    fn hvp(&self, w: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let n = self.classes.len() as f64;
        let b = self.block();
        let mut out = vec![0.0; self.dim()];
        for i in 0..self.classes.len() {
            let (_, p) = log_softmax_parts(&self.logits(i, w));
            let u = self.logits(i, v);
            let mean: f64 = p.iter().zip(&u).map(|(a, b)| a * b).sum();
            for j in 0..self.k {
                let r = p[j] * (u[j] - mean);
                add_sample(&self.data, i, r / n, &mut out[j * b..(j + 1) * b]);
            }
        }
        Some(out)
    }

    fn name(&self) -> String {
        format!("softmax-d{}-k{}", self.data.n_features(), self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{check_gradient, check_hvp, Objective};
    use crate::problems::dataset::SparseRows;

    fn gauss_vec(seed: u64, n: usize) -> Vec<f64> {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = crate::rng::aux_rng(seed, 31);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let ds = Arc::new(Dataset::synthetic(2, 40, 12, 0.4, 3));
        let sr = Objective::new(SoftmaxRegression::new(ds).unwrap());
        let bin = Arc::new(Dataset::synthetic(3, 40, 12, 0.4, 2));
        let lr = Objective::new(LogisticRegression::new(bin).unwrap());
        for obj in [sr, lr] {
            for seed in 0..5 {
                let x = gauss_vec(seed, obj.dim());
                assert!(check_gradient(&obj, &x, 1e-5, seed).unwrap().passed);
                assert!(check_hvp(&obj, &x, &gauss_vec(seed + 10, obj.dim()), 1e-4).unwrap().passed);
            }
        }
    }

    #[test]
    fn two_class_softmax_reduces_to_logistic() {
        let ds = Arc::new(Dataset::synthetic(5, 30, 8, 0.5, 2));
        let lr = LogisticRegression::new(ds.clone()).unwrap();
        let sr = SoftmaxRegression::new(ds).unwrap();
        let w = gauss_vec(1, sr.dim());
        let b = lr.dim();
        let diff: Vec<f64> = (0..b).map(|j| w[b + j] - w[j]).collect();
        assert!((lr.value(&diff) - sr.value(&w)).abs() <= 1e-10);
        let gl = lr.gradient(&diff);
        let gs = sr.gradient(&w);
        for j in 0..b {
            assert!((gs[b + j] - gl[j]).abs() <= 1e-10);
            assert!((gs[j] + gl[j]).abs() <= 1e-10);
        }
    }

    #[test]
    fn separable_pair_loss_is_positive_and_decreasing_under_gd() {
        let ds = Arc::new(Dataset {
            features: SparseRows {
                n_cols: 1,
                indptr: vec![0, 1, 2],
                indices: vec![0, 0],
                values: vec![1.0, -1.0],
            },
            labels: vec![1.0, -1.0],
        });
        let lr = LogisticRegression::new(ds).unwrap();
        let mut w = vec![0.0, 0.0];
        let mut prev = lr.value(&w);
        for _ in 0..50 {
            let g = lr.gradient(&w);
            w.iter_mut().zip(&g).for_each(|(a, b)| *a -= 1.0 * b);
            let f = lr.value(&w);
            assert!(f <= prev && f >= 0.0);
            prev = f;
        }
        assert!(prev < 0.1);
    }

    #[test]
    fn logistic_rejects_multiclass() {
        let ds = Arc::new(Dataset::synthetic(5, 30, 8, 0.5, 3));
        assert!(LogisticRegression::new(ds).is_err());
    }
}
