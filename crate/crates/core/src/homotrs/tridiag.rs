//! Eigendecomposition of a symmetric tridiagonal matrix by the implicit QL
//! method (the EISPACK `tql2` scheme).

/// Eigenpairs of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `offdiag` (`offdiag[i]` couples rows `i` and `i + 1`).
///
/// Returns eigenvalues in ascending order and the eigenvectors as a
/// row-major `n x n` matrix whose column `j` belongs to eigenvalue `j`.
pub(crate) fn symmetric_tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    assert!(offdiag.len() + 1 >= n, "off-diagonal too short");
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&offdiag[..n.saturating_sub(1)]);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    if n <= 1 {
        return (d, z);
    }

    let eps = f64::EPSILON;
    let mut f = 0.0_f64;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    break;
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0_f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0_f64;
                let mut s2 = 0.0_f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zk = &mut z[k * n..(k + 1) * n];
                        let h = zk[i + 1];
                        zk[i + 1] = s * zk[i] + c * h;
                        zk[i] = c * zk[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let vals = order.iter().map(|&i| d[i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + new_col] = z[k * n + old_col];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    #[test]
    fn two_by_two() {
        let (vals, vecs) = symmetric_tridiagonal_eigen(&[1.0, 0.0], &[1.0]);
        let s5 = 5f64.sqrt();
        assert!((vals[0] - (1.0 - s5) / 2.0).abs() < 1e-14);
        assert!((vals[1] - (1.0 + s5) / 2.0).abs() < 1e-14);
        // eigenvector of the smallest eigenvalue is proportional to (lambda, 1)
        let ratio = vecs[0] / vecs[2];
        assert!((ratio - vals[0]).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_solver() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| ((i * 13 % 7) as f64) * 0.3 - 0.8).collect();
        let (vals, vecs) = symmetric_tridiagonal_eigen(&diag, &off);
        let mut t = DMatrix::zeros(n, n);
        for i in 0..n {
            t[(i, i)] = diag[i];
            if i + 1 < n {
                t[(i, i + 1)] = off[i];
                t[(i + 1, i)] = off[i];
            }
        }
        let mut want: Vec<f64> = SymmetricEigen::new(t.clone()).eigenvalues.iter().copied().collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        let z = DMatrix::from_row_slice(n, n, &vecs);
        for j in 0..n {
            let col = z.column(j);
            let r = &t * col - col * vals[j];
            assert!(r.norm() < 1e-12, "residual {}", r.norm());
        }
        let ortho = z.transpose() * &z - DMatrix::identity(n, n);
        assert!(ortho.norm() < 1e-12);
    }

    #[test]
    fn decoupled_blocks() {
        let (vals, _) = symmetric_tridiagonal_eigen(&[3.0, 1.0, -2.0], &[0.0, 0.0]);
        assert_eq!(vals, vec![-2.0, 1.0, 3.0]);
    }
}
