use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::tridiag::symmetric_tridiagonal_eigen;
use super::{certify, BorderedOperator, HomoSolution, SubproblemMethod};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LanczosOptions {
    /// Residual tolerance relative to `max(1, |F|)`, with `|F|` estimated
    /// by the extreme Ritz values.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Cap on Lanczos steps per sweep; `None` runs the full dimension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    /// Check the Ritz residual every this many steps and stop early once it
    /// is below tolerance. `None` never stops early.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_every: Option<usize>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_sweeps: 3,
            max_steps: None,
            check_every: None,
        }
    }
}

fn random_unit(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

struct Sweep {
    lambda: f64,
    w: Vec<f64>,
    fw: Vec<f64>,
    scale: f64,
    applications: usize,
}

fn lanczos_sweep(op: &BorderedOperator, rng: &mut impl Rng, opts: &LanczosOptions) -> Result<Sweep> {
    let m = op.dim();
    let max_steps = opts.max_steps.unwrap_or(m).clamp(1, m);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_steps);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_steps);
    let mut alpha: Vec<f64> = Vec::with_capacity(max_steps);
    let mut beta: Vec<f64> = Vec::with_capacity(max_steps);
    let mut cur = random_unit(rng, m);
    let mut norm_est = 0.0_f64;

    loop {
        let fq = op.apply(&cur)?;
        let a = dot(&cur, &fq);
        let mut w = fq.clone();
        axpy(-a, &cur, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(cur);
        images.push(fq);
        alpha.push(a);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        norm_est = norm_est.max(a.abs() + b + beta.last().copied().unwrap_or(0.0));

        let steps = basis.len();
        if steps >= max_steps {
            break;
        }
        if let Some(every) = opts.check_every {
            if every > 0 && steps % every == 0 {
                let (vals, vecs) = symmetric_tridiagonal_eigen(&alpha, &beta);
                let scale = vals.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
                let last = vecs[(steps - 1) * steps];
                if b * last.abs() <= 0.1 * opts.tol * scale {
                    break;
                }
            }
        }
        if b <= 1e-12 * norm_est.max(f64::MIN_POSITIVE) {
            // Invariant subspace: continue in its orthogonal complement.
            let mut fresh = random_unit(rng, m);
            orthogonalize(&mut fresh, &basis);
            let fnorm = norm(&fresh);
            if fnorm <= 1e-8 {
                break;
            }
            fresh.iter_mut().for_each(|x| *x /= fnorm);
            beta.push(0.0);
            cur = fresh;
        } else {
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            cur = w;
        }
    }

    let k = basis.len();
    let (vals, vecs) = symmetric_tridiagonal_eigen(&alpha, &beta[..k - 1]);
    let scale = vals.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let mut x = vec![0.0; m];
    let mut fx = vec![0.0; m];
    for j in 0..k {
        let yj = vecs[j * k];
        axpy(yj, &basis[j], &mut x);
        axpy(yj, &images[j], &mut fx);
    }
    let xn = norm(&x);
    x.iter_mut().for_each(|v| *v /= xn);
    fx.iter_mut().for_each(|v| *v /= xn);
    let lambda = dot(&x, &fx);
    Ok(Sweep {
        lambda,
        w: x,
        fw: fx,
        scale,
        applications: k,
    })
}

/// Leftmost eigenpair of `op` by Lanczos with full reorthogonalization from
/// a random unit start.
///
/// Each sweep runs up to `dim` steps; an invariant subspace found early is
/// extended with a fresh random direction, so a full sweep spans the whole
/// space. If the residual misses tolerance the solve restarts from a new
/// random vector, up to `max_sweeps` times.
pub fn solve_leftmost_lanczos(op: &BorderedOperator, rng: &mut impl Rng, opts: &LanczosOptions) -> Result<HomoSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::config("Lanczos tolerance must be positive"));
    }
    let sweeps = opts.max_sweeps.max(1);
    let mut best: Option<HomoSolution> = None;
    let mut applications = 0;
    for sweep in 1..=sweeps {
        let sw = lanczos_sweep(op, rng, opts)?;
        applications += sw.applications;
        let sol = certify(
            op.gradient(),
            op.delta(),
            sw.w,
            sw.fw,
            sw.lambda,
            opts.tol * sw.scale,
            applications,
            sweep,
            SubproblemMethod::Lanczos,
        );
        if sol.is_converged() {
            return Ok(sol);
        }
        if best.as_ref().is_none_or(|b| sol.residual < b.residual) {
            best = Some(sol);
        }
    }
    Err(Error::SubproblemNotConverged {
        best_residual: best.map(|b| b.residual).unwrap_or(f64::INFINITY),
        sweeps,
    })
}
