//! Low-rank matrix factorization, optionally masked:
//! `f(U, V) = |(U V - R) .* X|_F^2 / (n_u n_v)`.
//!
//! The decision vector is `vec(U) || vec(V)` with both factors row-major,
//! `U` of shape `n_u x k` and `V` of shape `k x n_v`, so `n = (n_u + n_v) k`.

use std::io::BufRead;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::operators::SmoothFunction;
use crate::rng::aux_rng;

#[derive(Debug, Clone)]
pub struct MatrixFactorization {
    n_u: usize,
    n_v: usize,
    k: usize,
    target: Vec<f64>,
    mask: Option<Vec<f64>>,
}

/// Parameters of a synthetic instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticMf {
    pub n_u: usize,
    pub n_v: usize,
    pub k: usize,
    /// Rank of the planted factorization; defaults to `k`.
    pub true_rank: usize,
    pub noise: f64,
    /// Fraction of observed entries; `None` means unmasked.
    pub density: Option<f64>,
}

impl MatrixFactorization {
    pub fn new(n_u: usize, n_v: usize, k: usize, target: Vec<f64>, mask: Option<Vec<f64>>) -> Result<Self> {
        if n_u == 0 || n_v == 0 || k == 0 || target.len() != n_u * n_v {
            return Err(Error::config("matrix factorization: shape mismatch"));
        }
        if let Some(m) = &mask {
            if m.len() != n_u * n_v || m.iter().any(|v| *v != 0.0 && *v != 1.0) {
                return Err(Error::config("mask must be a 0/1 matrix of the target's shape"));
            }
        }
        Ok(Self {
            n_u,
            n_v,
            k,
            target,
            mask,
        })
    }

    /// Planted low-rank target `R = U* V* + noise`, with an optional random
    /// observation mask.
    pub fn synthetic(seed: u64, spec: SyntheticMf) -> Result<Self> {
        let SyntheticMf {
            n_u,
            n_v,
            k,
            true_rank,
            noise,
            density,
        } = spec;
        if true_rank == 0 {
            return Err(Error::config("planted rank must be positive"));
        }
        let mut rng = aux_rng(seed, u64::MAX / 5);
        let sd = 1.0 / (true_rank as f64).sqrt().sqrt();
        let mut gauss = move || -> f64 { StandardNormal.sample(&mut rng) };
        let u: Vec<f64> = (0..n_u * true_rank).map(|_| sd * gauss()).collect();
        let v: Vec<f64> = (0..true_rank * n_v).map(|_| sd * gauss()).collect();
        let mut target = vec![0.0; n_u * n_v];
        for i in 0..n_u {
            for l in 0..true_rank {
                let uil = u[i * true_rank + l];
                let vrow = &v[l * n_v..(l + 1) * n_v];
                for (t, vl) in target[i * n_v..(i + 1) * n_v].iter_mut().zip(vrow) {
                    *t += uil * vl;
                }
            }
        }
        if noise > 0.0 {
            target.iter_mut().for_each(|t| *t += noise * gauss());
        }
        let mask = density.map(|p| {
            let mut mrng = aux_rng(seed, u64::MAX / 7);
            (0..n_u * n_v)
                .map(|_| if rand::Rng::random::<f64>(&mut mrng) < p { 1.0 } else { 0.0 })
                .collect()
        });
        Self::new(n_u, n_v, k, target, mask)
    }

    /// Ratings in `user item rating [...]` whitespace-separated lines
    /// (MovieLens `u.data` layout). Users and items are 1-based; missing
    /// entries are masked out.
    pub fn from_ratings(path: impl AsRef<Path>, k: usize) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut triples = Vec::new();
        let (mut n_u, mut n_v) = (0usize, 0usize);
        for (ln, line) in file.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields = super::dataset::tokens_with_columns(&line);
            if fields.len() < 3 {
                return Err(Error::Parse {
                    line: ln + 1,
                    column: line.len() + 1,
                    message: "expected `user item rating`".into(),
                });
            }
            let parse_idx = |&(tok, c): &(&str, usize)| -> Result<usize> {
                tok.parse::<usize>().ok().filter(|v| *v >= 1).ok_or(Error::Parse {
                    line: ln + 1,
                    column: c,
                    message: format!("bad index `{tok}`"),
                })
            };
            let u = parse_idx(&fields[0])?;
            let i = parse_idx(&fields[1])?;
            let r: f64 = fields[2].0.parse().map_err(|_| Error::Parse {
                line: ln + 1,
                column: fields[2].1,
                message: format!("bad rating `{}`", fields[2].0),
            })?;
            n_u = n_u.max(u);
            n_v = n_v.max(i);
            triples.push((u - 1, i - 1, r));
        }
        let mut target = vec![0.0; n_u * n_v];
        let mut mask = vec![0.0; n_u * n_v];
        for (u, i, r) in triples {
            target[u * n_v + i] = r;
            mask[u * n_v + i] = 1.0;
        }
        Self::new(n_u, n_v, k, target, Some(mask))
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_u, self.n_v, self.k)
    }

    pub fn is_masked(&self) -> bool {
        self.mask.is_some()
    }

    /// Same target with an explicit mask (all ones reproduces the unmasked
    /// problem exactly).
    pub fn with_mask(&self, mask: Vec<f64>) -> Result<Self> {
        Self::new(self.n_u, self.n_v, self.k, self.target.clone(), Some(mask))
    }

    /// Decision vector from explicit factors.
    pub fn pack(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.n_u * self.k);
        assert_eq!(v.len(), self.k * self.n_v);
        u.iter().chain(v).copied().collect()
    }

    /// Deterministic small random start `N(0, scale^2)`.
    pub fn random_start(&self, seed: u64, scale: f64) -> Vec<f64> {
        let mut rng = aux_rng(seed, u64::MAX / 11);
        (0..self.dim())
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * z
            })
            .collect()
    }

    fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        x.split_at(self.n_u * self.k)
    }

    fn norm_const(&self) -> f64 {
        1.0 / (self.n_u * self.n_v) as f64
    }

    /// `A B` for row-major `A (n_u x k)` and `B (k x n_v)`.
    fn product(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let (n_u, n_v, k) = (self.n_u, self.n_v, self.k);
        let mut out = vec![0.0; n_u * n_v];
        for i in 0..n_u {
            let row = &mut out[i * n_v..(i + 1) * n_v];
            for l in 0..k {
                let a_il = a[i * k + l];
                if a_il == 0.0 {
                    continue;
                }
                for (o, b_lj) in row.iter_mut().zip(&b[l * n_v..(l + 1) * n_v]) {
                    *o += a_il * b_lj;
                }
            }
        }
        out
    }

    fn apply_mask(&self, m: &mut [f64]) {
        if let Some(mask) = &self.mask {
            m.iter_mut().zip(mask).for_each(|(e, x)| *e *= x);
        }
    }

    /// Masked residual `(U V - R) .* X`.
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let (u, v) = self.split(x);
        let mut e = self.product(u, v);
        e.iter_mut().zip(&self.target).for_each(|(e, r)| *e -= r);
        self.apply_mask(&mut e);
        e
    }

    /// `(E V^T, U^T E)` for an `n_u x n_v` matrix `E`.
    fn back_project(&self, e: &[f64], u: &[f64], v: &[f64], gu: &mut [f64], gv: &mut [f64], c: f64) {
        let (n_u, n_v, k) = (self.n_u, self.n_v, self.k);
        for i in 0..n_u {
            let erow = &e[i * n_v..(i + 1) * n_v];
            for l in 0..k {
                let vrow = &v[l * n_v..(l + 1) * n_v];
                let s: f64 = erow.iter().zip(vrow).map(|(a, b)| a * b).sum();
                gu[i * k + l] += c * s;
            }
            for l in 0..k {
                let u_il = c * u[i * k + l];
                if u_il == 0.0 {
                    continue;
                }
                for (g, e_ij) in gv[l * n_v..(l + 1) * n_v].iter_mut().zip(erow) {
                    *g += u_il * e_ij;
                }
            }
        }
    }
}

impl SmoothFunction for MatrixFactorization {
    fn dim(&self) -> usize {
        (self.n_u + self.n_v) * self.k
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.residual(x).iter().map(|e| e * e).sum::<f64>() * self.norm_const()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (u, v) = self.split(x);
        let e = self.residual(x);
        let mut g = vec![0.0; self.dim()];
        let (gu, gv) = g.split_at_mut(self.n_u * self.k);
        self.back_project(&e, u, v, gu, gv, 2.0 * self.norm_const());
        g
    }

    fn hvp(&self, x: &[f64], dir: &[f64]) -> Option<Vec<f64>> {
        let (u, v) = self.split(x);
        let (du, dv) = self.split(dir);
        let e = self.residual(x);
        // L = X .* (dU V + U dV)
        let mut l = self.product(du, v);
        let udv = self.product(u, dv);
        l.iter_mut().zip(&udv).for_each(|(a, b)| *a += b);
        self.apply_mask(&mut l);
        let c = 2.0 * self.norm_const();
        let mut out = vec![0.0; self.dim()];
        let (hu, hv) = out.split_at_mut(self.n_u * self.k);
        // L V^T and U^T L
        self.back_project(&l, u, v, hu, hv, c);
        // E dV^T and dU^T E
        self.back_project(&e, du, dv, hu, hv, c);
        Some(out)
    }

    fn name(&self) -> String {
        let kind = if self.mask.is_some() { "mfm" } else { "mf" };
        format!("{kind}-{}x{}-k{}", self.n_u, self.n_v, self.k)
    }
}
