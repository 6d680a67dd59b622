//! The homogenized trust-region subproblem.
//!
//! Given a (restricted) gradient `g`, a Hessian action `u -> H u` and a
//! shift `delta >= 0`, the subproblem asks for the leftmost eigenpair of the
//! bordered matrix
//!
//! ```text
//!     F = [ H    g     ]
//!         [ g^T  -delta ]
//! ```
//!
//! The unit eigenvector `[v; t]` encodes the step `v / t` (or a negative
//! curvature direction `v` when `t` vanishes) and `theta = -lambda_min` is
//! the multiplier of the unit-ball constraint.
//!
//! [`solve_leftmost_lanczos`] is the matrix-free solver used by the methods;
//! [`solve_leftmost_dense`] builds `F` explicitly and serves as a reference
//! and as a fallback for small subspaces.

mod dense;
mod lanczos;
pub(crate) mod tridiag;

pub use dense::solve_leftmost_dense;
pub use lanczos::{solve_leftmost_lanczos, LanczosOptions};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::sketch::Sketch;

/// Absolute threshold below which `t` counts as zero, relative to `|[v; t]|`.
pub const T_ZERO_TOL: f64 = 1e-12;

type HvpFn<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a;

/// Matrix-free bordered operator `[u; tau] -> [H u + tau g; g^T u - delta tau]`.
pub struct BorderedOperator<'a> {
    g: Vec<f64>,
    delta: f64,
    hvp: Box<HvpFn<'a>>,
}

impl std::fmt::Debug for BorderedOperator<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BorderedOperator")
            .field("dim", &self.dim())
            .field("delta", &self.delta)
            .finish()
    }
}

impl<'a> BorderedOperator<'a> {
    pub fn new(g: Vec<f64>, delta: f64, hvp: impl Fn(&[f64]) -> Result<Vec<f64>> + 'a) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::config(format!("delta must be a finite nonnegative number, got {delta}")));
        }
        if g.is_empty() {
            return Err(Error::config("bordered operator needs a nonempty gradient"));
        }
        Ok(Self {
            g,
            delta,
            hvp: Box::new(hvp),
        })
    }

    /// Operator backed by an explicit symmetric matrix `h`.
    pub fn from_dense(h: DMatrix<f64>, g: Vec<f64>, delta: f64) -> Result<BorderedOperator<'static>> {
        if h.nrows() != g.len() || h.ncols() != g.len() {
            return Err(Error::config("dense Hessian and gradient dimensions differ"));
        }
        BorderedOperator::new(g, delta, move |u: &[f64]| {
            let hu = &h * nalgebra::DVector::from_column_slice(u);
            Ok(hu.as_slice().to_vec())
        })
    }

    /// Dimension of the bordered space, `s + 1`.
    pub fn dim(&self) -> usize {
        self.g.len() + 1
    }

    pub fn gradient(&self) -> &[f64] {
        &self.g
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn hessian_apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        (self.hvp)(u)
    }

    pub fn apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        let s = self.g.len();
        if w.len() != s + 1 {
            return Err(Error::config(format!("bordered apply: expected length {}, got {}", s + 1, w.len())));
        }
        let (u, tau) = (&w[..s], w[s]);
        let mut out = (self.hvp)(u)?;
        if out.len() != s {
            return Err(Error::numerical("Hessian action returned a vector of the wrong length"));
        }
        for (o, gi) in out.iter_mut().zip(&self.g) {
            *o += tau * gi;
        }
        out.push(dot(&self.g, u) - self.delta * tau);
        Ok(out)
    }

    /// Explicit `s x s` Hessian from `s` applications of the Hessian action,
    /// symmetrized.
    pub fn restricted_hessian(&self) -> Result<DMatrix<f64>> {
        let s = self.g.len();
        let mut h = DMatrix::zeros(s, s);
        let mut e = vec![0.0; s];
        for j in 0..s {
            e[j] = 1.0;
            let col = (self.hvp)(&e)?;
            e[j] = 0.0;
            for i in 0..s {
                h[(i, j)] = col[i];
            }
        }
        Ok((&h + h.transpose()) * 0.5)
    }

    /// Explicit `(s + 1) x (s + 1)` bordered matrix.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let s = self.g.len();
        let h = self.restricted_hessian()?;
        Ok(bordered_matrix(&h, &self.g, self.delta, s))
    }
}

pub(crate) fn bordered_matrix(h: &DMatrix<f64>, g: &[f64], delta: f64, s: usize) -> DMatrix<f64> {
    let mut f = DMatrix::zeros(s + 1, s + 1);
    f.view_mut((0, 0), (s, s)).copy_from(h);
    for i in 0..s {
        f[(i, s)] = g[i];
        f[(s, i)] = g[i];
    }
    f[(s, s)] = -delta;
    f
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubproblemMethod {
    Lanczos,
    Dense,
}

/// Leftmost eigenpair of the bordered matrix with its certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct HomoSolution {
    pub lambda_min: f64,
    pub v_tilde: Vec<f64>,
    pub t: f64,
    /// Multiplier of the ball constraint, `max(0, -lambda_min)`.
    pub theta: f64,
    /// `|F w + theta w|` for `w = [v; t]`.
    pub residual: f64,
    /// Absolute residual tolerance the solve was held to.
    pub tolerance: f64,
    /// `g^T v`, kept for the sign rule of small-`t` directions.
    pub g_dot_v: f64,
    /// Applications of the Hessian action spent on this solve.
    pub hvp_count: usize,
    pub sweeps: usize,
    pub method: SubproblemMethod,
}

impl HomoSolution {
    pub fn is_converged(&self) -> bool {
        self.residual <= self.tolerance
    }

    pub fn eigvec_norm(&self) -> f64 {
        (dot(&self.v_tilde, &self.v_tilde) + self.t * self.t).sqrt()
    }
}

/// Normalizes a leftmost eigenpair `(lambda, w, F w)` into a [`HomoSolution`]
/// following the sign convention `t >= 0`, and `g^T v <= 0` when `t` is
/// numerically zero.
pub(crate) fn certify(
    g: &[f64],
    delta: f64,
    mut w: Vec<f64>,
    mut fw: Vec<f64>,
    lambda: f64,
    tolerance: f64,
    hvp_count: usize,
    sweeps: usize,
    method: SubproblemMethod,
) -> HomoSolution {
    let s = g.len();
    if lambda >= 0.0 {
        // Only reachable with delta = 0 and F positive semidefinite: the
        // interior point [0; 1] is optimal and the multiplier vanishes.
        let mut r = g.to_vec();
        r.push(-delta);
        return HomoSolution {
            lambda_min: lambda,
            v_tilde: vec![0.0; s],
            t: 1.0,
            theta: 0.0,
            residual: norm(&r),
            tolerance,
            g_dot_v: 0.0,
            hvp_count,
            sweeps,
            method,
        };
    }
    let wn = norm(&w);
    w.iter_mut().for_each(|v| *v /= wn);
    fw.iter_mut().for_each(|v| *v /= wn);
    let mut flip = w[s] < 0.0;
    if w[s].abs() <= T_ZERO_TOL {
        flip = dot(g, &w[..s]) > 0.0;
    }
    if flip {
        w.iter_mut().for_each(|v| *v = -*v);
        fw.iter_mut().for_each(|v| *v = -*v);
    }
    let theta = -lambda;
    let residual = fw
        .iter()
        .zip(&w)
        .map(|(a, b)| (a + theta * b).powi(2))
        .sum::<f64>()
        .sqrt();
    let t = w[s];
    w.truncate(s);
    HomoSolution {
        lambda_min: lambda,
        g_dot_v: dot(g, &w),
        v_tilde: w,
        t,
        theta,
        residual,
        tolerance,
        hvp_count,
        sweeps,
        method,
    }
}

/// Rule turning `[v; t]` into a step direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DirectionRule {
    /// `v / t` whenever `t` is numerically nonzero.
    #[default]
    NonzeroT,
    /// `v / t` only when `|t| > nu`, with `nu` in `(0, 1/2)`.
    Threshold(f64),
}

impl DirectionRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DirectionRule::NonzeroT => Ok(()),
            DirectionRule::Threshold(nu) if nu > 0.0 && nu < 0.5 => Ok(()),
            DirectionRule::Threshold(nu) => Err(Error::config(format!("threshold nu must lie in (0, 1/2), got {nu}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// `d = P^T v / t`
    Homogeneous,
    /// `d = sign(-g^T v) P^T v`
    NegativeCurvature,
    /// First-order baselines.
    Gradient,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::Homogeneous => "homogeneous",
            StepKind::NegativeCurvature => "negative_curvature",
            StepKind::Gradient => "gradient",
        }
    }
}

/// Ambient direction from a subproblem solution. `sketch = None` means the
/// subproblem was solved in the full space.
pub fn extract_direction(sol: &HomoSolution, sketch: Option<&Sketch>, rule: DirectionRule) -> Result<(Vec<f64>, StepKind)> {
    let threshold = match rule {
        DirectionRule::NonzeroT => T_ZERO_TOL * sol.eigvec_norm(),
        DirectionRule::Threshold(nu) => nu,
    };
    let lifted = match sketch {
        Some(sk) => sk.apply_transpose(&sol.v_tilde)?,
        None => sol.v_tilde.clone(),
    };
    if sol.t.abs() > threshold {
        let inv_t = 1.0 / sol.t;
        Ok((lifted.into_iter().map(|v| v * inv_t).collect(), StepKind::Homogeneous))
    } else {
        let sign = if sol.g_dot_v > 0.0 { -1.0 } else { 1.0 };
        Ok((lifted.into_iter().map(|v| v * sign).collect(), StepKind::NegativeCurvature))
    }
}

#[cfg(test)]
mod tests;
