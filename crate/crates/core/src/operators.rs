//! Objective functions: value, gradient and Hessian-vector product hooks,
//! evaluation counters, and finite-difference verification oracles.
//!
//! A problem implements [`SmoothFunction`]. The solvers never talk to it
//! directly; they go through an [`Objective`], which validates inputs and
//! outputs, counts evaluations, and supplies a central-difference
//! Hessian-vector product when the problem has no analytic one.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{first_non_finite, max_abs, norm};

/// Hooks a problem provides. Implementations must be deterministic and
/// free of hidden mutable state so that they can be probed concurrently.
pub trait SmoothFunction: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Analytic Hessian-vector product. Returning `None` makes the
    /// [`Objective`] fall back to central differences of the gradient.
    fn hvp(&self, _x: &[f64], _v: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn name(&self) -> String {
        "anonymous".to_string()
    }
}

impl<T: SmoothFunction + ?Sized> SmoothFunction for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn hvp(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        (**self).hvp(x, v)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// Snapshot of the evaluation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub f: u64,
    pub grad: u64,
    pub hvp: u64,
}

/// A [`SmoothFunction`] wrapped with input validation and per-instance counters.
pub struct Objective {
    func: Arc<dyn SmoothFunction>,
    f_count: AtomicU64,
    grad_count: AtomicU64,
    hvp_count: AtomicU64,
}

impl std::fmt::Debug for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.func.name())
            .field("dim", &self.func.dim())
            .field("counts", &self.counts())
            .finish()
    }
}

impl Objective {
    pub fn new(func: impl SmoothFunction + 'static) -> Self {
        Self::from_arc(Arc::new(func))
    }

    pub fn from_arc(func: Arc<dyn SmoothFunction>) -> Self {
        Self {
            func,
            f_count: AtomicU64::new(0),
            grad_count: AtomicU64::new(0),
            hvp_count: AtomicU64::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.func.dim()
    }

    pub fn function(&self) -> &Arc<dyn SmoothFunction> {
        &self.func
    }

    pub fn counts(&self) -> EvalCounts {
        EvalCounts {
            f: self.f_count.load(Ordering::Relaxed),
            grad: self.grad_count.load(Ordering::Relaxed),
            hvp: self.hvp_count.load(Ordering::Relaxed),
        }
    }

    pub fn reset_counts(&self) {
        self.f_count.store(0, Ordering::Relaxed);
        self.grad_count.store(0, Ordering::Relaxed);
        self.hvp_count.store(0, Ordering::Relaxed);
    }

    fn check_input(&self, what: &str, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::config(format!(
                "{what}: expected vector of length {}, got {}",
                self.dim(),
                x.len()
            )));
        }
        if let Some((i, v)) = first_non_finite(x) {
            return Err(Error::numerical(format!("{what}: input x[{i}] = {v}")));
        }
        Ok(())
    }

    pub fn eval_f(&self, x: &[f64]) -> Result<f64> {
        self.check_input("f", x)?;
        self.f_count.fetch_add(1, Ordering::Relaxed);
        let f = self.func.value(x);
        if !f.is_finite() {
            let (imax, _) = x
                .iter()
                .enumerate()
                .fold((0, 0.0_f64), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
            return Err(Error::numerical(format!(
                "f(x) = {f} (largest coordinate x[{imax}] = {}, |x| = {:e})",
                x[imax],
                norm(x)
            )));
        }
        Ok(f)
    }

    pub fn eval_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input("gradient", x)?;
        self.grad_count.fetch_add(1, Ordering::Relaxed);
        let g = self.func.gradient(x);
        if g.len() != self.dim() {
            return Err(Error::numerical(format!(
                "gradient hook returned length {} for dimension {}",
                g.len(),
                self.dim()
            )));
        }
        if let Some((i, v)) = first_non_finite(&g) {
            return Err(Error::numerical(format!("gradient entry {i} is {v}")));
        }
        Ok(g)
    }

    /// Hessian-vector product `H(x) v`. Uses the analytic hook when present,
    /// otherwise `(g(x + h v) - g(x - h v)) / 2h` with
    /// `h = sqrt(eps) (1 + |x|) / |v|`.
    pub fn eval_hvp(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_input("hvp", x)?;
        if v.len() != x.len() {
            return Err(Error::config(format!(
                "hvp: direction has length {}, expected {}",
                v.len(),
                x.len()
            )));
        }
        self.hvp_count.fetch_add(1, Ordering::Relaxed);
        let vnorm = norm(v);
        if vnorm == 0.0 {
            return Ok(vec![0.0; x.len()]);
        }
        let hv = match self.func.hvp(x, v) {
            Some(hv) => hv,
            None => fd_hvp(self.func.as_ref(), x, v, f64::EPSILON.sqrt() * (1.0 + norm(x)) / vnorm.max(f64::MIN_POSITIVE)),
        };
        if let Some((i, val)) = first_non_finite(&hv) {
            return Err(Error::numerical(format!("hvp entry {i} is {val}")));
        }
        Ok(hv)
    }
}

fn fd_hvp(func: &dyn SmoothFunction, x: &[f64], v: &[f64], h: f64) -> Vec<f64> {
    let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let xm: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
    let gp = func.gradient(&xp);
    let gm = func.gradient(&xm);
    gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

/// Outcome of a derivative check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckReport {
    pub max_rel_error: f64,
    pub probes: usize,
    pub passed: bool,
}

fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Compares the gradient hook with central differences of `f`.
///
/// For `n <= 64` every coordinate is probed; above that, directional
/// derivatives along 8 random unit directions (seeded from `seed`) are
/// compared with `g·u`.
pub fn check_gradient(obj: &Objective, x: &[f64], tol: f64, seed: u64) -> Result<CheckReport> {
    let func = obj.function().as_ref();
    let n = obj.dim();
    let g = obj.eval_grad(x)?;
    let f0 = func.value(x).abs();
    let floor = 1e-8 * (1.0 + f0);
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    if n <= 64 {
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            dirs.push(e);
        }
    } else {
        let mut rng = crate::rng::aux_rng(seed, 0);
        for _ in 0..8 {
            let mut u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let un = norm(&u);
            u.iter_mut().for_each(|v| *v /= un);
            dirs.push(u);
        }
    }
    let h = f64::EPSILON.cbrt() * (1.0 + max_abs(x));
    let mut worst = 0.0_f64;
    for u in &dirs {
        let xp: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + h * b).collect();
        let xm: Vec<f64> = x.iter().zip(u).map(|(a, b)| a - h * b).collect();
        let fd = (func.value(&xp) - func.value(&xm)) / (2.0 * h);
        let an = crate::linalg::dot(&g, u);
        worst = worst.max(rel_err(an, fd, floor));
    }
    Ok(CheckReport {
        max_rel_error: worst,
        probes: dirs.len(),
        passed: worst <= tol,
    })
}

/// Compares `eval_hvp(x, v)` with central differences of the gradient hook.
pub fn check_hvp(obj: &Objective, x: &[f64], v: &[f64], tol: f64) -> Result<CheckReport> {
    let func = obj.function().as_ref();
    let hv = obj.eval_hvp(x, v)?;
    let vn = norm(v);
    if vn == 0.0 {
        let e = norm(&hv);
        return Ok(CheckReport {
            max_rel_error: e,
            probes: 1,
            passed: e <= tol,
        });
    }
    // A different step from the fallback's so a FD-backed hook is still
    // compared against something.
    let h = f64::EPSILON.cbrt() * (1.0 + max_abs(x)) / vn;
    let fd = fd_hvp(func, x, v, h);
    let diff: Vec<f64> = hv.iter().zip(&fd).map(|(a, b)| a - b).collect();
    let g_scale = norm(&func.gradient(x));
    let denom = norm(&hv).max(norm(&fd)).max(1e-8 * (1.0 + g_scale) * vn);
    let e = norm(&diff) / denom;
    Ok(CheckReport {
        max_rel_error: e,
        probes: 1,
        passed: e <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{QuadraticProblem, Rosenbrock};

    fn sphere(n: usize) -> Objective {
        Objective::new(QuadraticProblem::sphere(n))
    }

    struct NoHvp(Rosenbrock);
    impl SmoothFunction for NoHvp {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn value(&self, x: &[f64]) -> f64 {
            self.0.value(x)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            self.0.gradient(x)
        }
    }

    struct Perturbed(Rosenbrock);
    impl SmoothFunction for Perturbed {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn value(&self, x: &[f64]) -> f64 {
            self.0.value(x)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            let mut g = self.0.gradient(x);
            g[0] += 1e-2 * (1.0 + g[0].abs());
            g
        }
    }

    #[test]
    fn sphere_values() {
        let obj = sphere(2);
        assert_eq!(obj.eval_f(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(obj.eval_grad(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        assert_eq!(obj.eval_hvp(&[5.0, -1.0], &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn rosenbrock_values() {
        let obj = Objective::new(Rosenbrock::new(2));
        assert_eq!(obj.eval_f(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(obj.eval_f(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(obj.eval_grad(&[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        let g = obj.eval_grad(&[0.0, 0.0]).unwrap();
        // central differences with h = 1e-6
        let h = 1e-6;
        let fd0 = (obj.eval_f(&[h, 0.0]).unwrap() - obj.eval_f(&[-h, 0.0]).unwrap()) / (2.0 * h);
        let fd1 = (obj.eval_f(&[0.0, h]).unwrap() - obj.eval_f(&[0.0, -h]).unwrap()) / (2.0 * h);
        assert!((fd0 + 2.0).abs() < 1e-6 && fd1.abs() < 1e-6);
        assert!((g[0] + 2.0).abs() < 1e-12 && g[1].abs() < 1e-12);
        let hv = obj.eval_hvp(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(hv, vec![2.0, 0.0]);
        let fd = Objective::new(NoHvp(Rosenbrock::new(2)));
        let hv_fd = fd.eval_hvp(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((hv_fd[0] - 2.0).abs() < 1e-6 && hv_fd[1].abs() < 1e-6);
    }

    #[test]
    fn zero_direction_gives_zero() {
        let obj = Objective::new(NoHvp(Rosenbrock::new(4)));
        let hv = obj.eval_hvp(&[0.3, -0.2, 1.0, 2.0], &[0.0; 4]).unwrap();
        assert_eq!(hv, vec![0.0; 4]);
    }

    #[test]
    fn counters_increase_by_one() {
        let obj = Objective::new(Rosenbrock::new(3));
        let x = [0.1, 0.2, 0.3];
        obj.eval_f(&x).unwrap();
        obj.eval_grad(&x).unwrap();
        obj.eval_grad(&x).unwrap();
        obj.eval_hvp(&x, &x).unwrap();
        assert_eq!(obj.counts(), EvalCounts { f: 1, grad: 2, hvp: 1 });
        obj.reset_counts();
        assert_eq!(obj.counts(), EvalCounts::default());
    }

    #[test]
    fn non_finite_is_reported() {
        let obj = sphere(2);
        assert!(matches!(obj.eval_f(&[f64::NAN, 0.0]), Err(Error::NumericalFailure(_))));
        let big = Objective::new(Rosenbrock::new(2));
        assert!(matches!(big.eval_f(&[1e200, 0.0]), Err(Error::NumericalFailure(_))));
        assert!(matches!(obj.eval_f(&[1.0]), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn checks_pass_and_catch_defects() {
        let obj = sphere(5);
        let x = [0.3, -1.0, 2.0, 0.5, 0.1];
        assert!(check_gradient(&obj, &x, 1e-6, 1).unwrap().passed);
        assert!(check_hvp(&obj, &x, &[1.0, 0.0, 2.0, 0.0, -1.0], 1e-6).unwrap().passed);

        let good = Objective::new(Rosenbrock::new(6));
        let y = [-0.4, 0.9, 0.2, 1.3, -0.7, 0.5];
        assert!(check_gradient(&good, &y, 1e-5, 1).unwrap().passed);
        assert!(check_hvp(&good, &y, &[0.2, 0.1, -0.3, 0.5, 1.0, -1.0], 1e-4).unwrap().passed);

        let bad = Objective::new(Perturbed(Rosenbrock::new(6)));
        assert!(!check_gradient(&bad, &y, 1e-5, 1).unwrap().passed);
    }
}
