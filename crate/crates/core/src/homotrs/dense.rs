use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{bordered_matrix, certify, HomoSolution, SubproblemMethod};
use crate::error::{Error, Result};

/// Reference solver: full symmetric eigendecomposition of the explicit
/// bordered matrix built from `h`, `g` and `delta`.
pub fn solve_leftmost_dense(h: &DMatrix<f64>, g: &[f64], delta: f64) -> Result<HomoSolution> {
    let s = g.len();
    if h.nrows() != s || h.ncols() != s || s == 0 {
        return Err(Error::config(format!(
            "dense subproblem: Hessian is {}x{}, gradient has length {s}",
            h.nrows(),
            h.ncols()
        )));
    }
    if !(delta >= 0.0) {
        return Err(Error::config(format!("delta must be nonnegative, got {delta}")));
    }
    let f = bordered_matrix(h, g, delta, s);
    let eig = SymmetricEigen::try_new(f.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::numerical("dense symmetric eigensolver did not converge"))?;
    let (imin, lambda) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty spectrum");
    let scale = eig.eigenvalues.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let w: DVector<f64> = eig.eigenvectors.column(imin).into_owned();
    let fw = &f * &w;
    Ok(certify(
        g,
        delta,
        w.as_slice().to_vec(),
        fw.as_slice().to_vec(),
        lambda,
        1e-10 * scale,
        0,
        1,
        SubproblemMethod::Dense,
    ))
}
