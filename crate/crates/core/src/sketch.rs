//! Gaussian sketching matrices.
//!
//! A [`Sketch`] is an `s x n` matrix with i.i.d. `N(0, 1/s)` entries, stored
//! densely in row-major order. It restricts the ambient problem to the random
//! subspace spanned by its rows: `g~ = P g`, `H~ u = P H P^T u`.

use std::io::{Read, Write};
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot};
use crate::operators::Objective;
use crate::rng::sketch_rng;

const DUMP_MAGIC: &[u8; 4] = b"SKCH";

#[derive(Debug, Clone, PartialEq)]
pub struct Sketch {
    rows: usize,
    cols: usize,
    seed: u64,
    draw: u64,
    data: Vec<f64>,
}

impl Sketch {
    /// Draws the sketch of iteration `draw` from the stream keyed by `seed`.
    pub fn sample(seed: u64, draw: u64, s: usize, n: usize) -> Result<Self> {
        if s == 0 || s > n {
            return Err(Error::config(format!("sketch needs 1 <= s <= n, got s = {s}, n = {n}")));
        }
        let mut rng = sketch_rng(seed, draw);
        let sd = 1.0 / (s as f64).sqrt();
        let data = (0..s * n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * sd
            })
            .collect();
        Ok(Self {
            rows: s,
            cols: n,
            seed,
            draw,
            data,
        })
    }

    /// Square sketch with orthonormal rows, obtained by Gram-Schmidt on a
    /// Gaussian draw. Mostly useful to compare against full-space solvers.
    pub fn orthogonal(seed: u64, draw: u64, n: usize) -> Result<Self> {
        let mut sk = Self::sample(seed, draw, n, n)?;
        orthonormalize_rows(&mut sk.data, n, n)?;
        Ok(sk)
    }

    /// Wraps an explicit row-major `s x n` matrix.
    pub fn from_rows(s: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if s == 0 || s > n || data.len() != s * n {
            return Err(Error::config(format!(
                "sketch of shape {s}x{n} needs {} entries with 1 <= s <= n, got {}",
                s * n,
                data.len()
            )));
        }
        Ok(Self {
            rows: s,
            cols: n,
            seed: 0,
            draw: 0,
            data,
        })
    }

    pub fn subspace_dim(&self) -> usize {
        self.rows
    }

    pub fn ambient_dim(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draw_index(&self) -> u64 {
        self.draw
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `P x`
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::config(format!(
                "sketch apply: expected length {}, got {}",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `P^T y`
    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::config(format!(
                "sketch transpose apply: expected length {}, got {}",
                self.rows,
                y.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), &mut out);
            }
        }
        Ok(out)
    }

    /// `P H(x) P^T u` with a single ambient Hessian-vector product.
    pub fn restricted_hvp(&self, obj: &Objective, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let lifted = self.apply_transpose(u)?;
        let hv = obj.eval_hvp(x, &lifted)?;
        self.apply(&hv)
    }

    /// Writes the debug dump: `"SKCH"`, `u32 s`, `u32 n`, 4 zero bytes,
    /// then `s * n` little-endian `f64` in row-major order.
    pub fn write_dump(&self, w: &mut impl Write) -> Result<()> {
        let s = u32::try_from(self.rows).map_err(|_| Error::config("sketch too large to dump"))?;
        let n = u32::try_from(self.cols).map_err(|_| Error::config("sketch too large to dump"))?;
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&s.to_le_bytes())?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&[0u8; 4])?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump(r: &mut impl Read) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[0..4] != DUMP_MAGIC {
            return Err(Error::Parse {
                line: 0,
                column: 0,
                message: "bad sketch dump magic".into(),
            });
        }
        let s = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let n = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let mut data = Vec::with_capacity(s * n);
        let mut buf = [0u8; 8];
        for _ in 0..s * n {
            r.read_exact(&mut buf)?;
            data.push(f64::from_le_bytes(buf));
        }
        Self::from_rows(s, n, data)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_dump(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_dump(&mut f)
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass, in place on a
/// row-major `rows x cols` matrix.
pub(crate) fn orthonormalize_rows(data: &mut [f64], rows: usize, cols: usize) -> Result<()> {
    for i in 0..rows {
        for _pass in 0..2 {
            for j in 0..i {
                let (head, tail) = data.split_at_mut(i * cols);
                let qj = &head[j * cols..(j + 1) * cols];
                let ri = &mut tail[..cols];
                let c = dot(qj, ri);
                axpy(-c, qj, ri);
            }
        }
        let ri = &mut data[i * cols..(i + 1) * cols];
        let nrm = dot(ri, ri).sqrt();
        if nrm <= 1e-12 {
            return Err(Error::numerical("rank-deficient matrix in orthonormalization"));
        }
        ri.iter_mut().for_each(|v| *v /= nrm);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use crate::problems::QuadraticProblem;
    use crate::rng::aux_rng;
    use nalgebra::{DMatrix, DVector, SymmetricEigen};
    use proptest::prelude::*;

    fn gaussian_vec(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = aux_rng(seed, 99);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = Sketch::sample(7, 0, 3, 5).unwrap();
        let b = Sketch::sample(7, 0, 3, 5).unwrap();
        assert_eq!(a, b);
        let c = Sketch::sample(7, 1, 3, 5).unwrap();
        assert_ne!(a.entries(), c.entries());
    }

    #[test]
    fn shape_checks() {
        let one = Sketch::sample(3, 0, 1, 1).unwrap();
        assert_eq!(one.entries().len(), 1);
        assert!(matches!(Sketch::sample(3, 0, 6, 5), Err(Error::InvalidConfig(_))));
        assert!(matches!(Sketch::sample(3, 0, 0, 5), Err(Error::InvalidConfig(_))));
        assert!(one.apply(&[1.0, 2.0]).is_err());
        assert!(one.apply_transpose(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn entry_statistics() {
        let s = 200;
        let sk = Sketch::sample(11, 0, s, 200).unwrap();
        let m = sk.entries().len() as f64;
        let mean = sk.entries().iter().sum::<f64>() / m;
        let var = sk.entries().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        assert!(mean.abs() <= 4.0 / m.sqrt(), "mean {mean}");
        assert!((var * s as f64 - 1.0).abs() <= 0.2, "var {var}");
    }

    #[test]
    fn zero_maps_to_zero() {
        let sk = Sketch::sample(1, 2, 4, 9).unwrap();
        assert_eq!(sk.apply(&[0.0; 9]).unwrap(), vec![0.0; 4]);
        assert_eq!(sk.apply_transpose(&[0.0; 4]).unwrap(), vec![0.0; 9]);
    }

    #[test]
    fn dense_reconstruction_is_exact() {
        let sk = Sketch::sample(5, 3, 4, 7).unwrap();
        for j in 0..7 {
            let mut e = vec![0.0; 7];
            e[j] = 1.0;
            let col = sk.apply(&e).unwrap();
            for i in 0..4 {
                assert_eq!(col[i].to_bits(), sk.row(i)[j].to_bits());
            }
        }
    }

    #[test]
    fn jl_norm_preservation() {
        let n = 200;
        let mut x = gaussian_vec(1, n);
        let xn = norm(&x);
        x.iter_mut().for_each(|v| *v /= xn);
        let inside = (0..2000u64)
            .filter(|&k| {
                let px = Sketch::sample(42, k, 50, n).unwrap().apply(&x).unwrap();
                (0.5..=1.5).contains(&norm(&px))
            })
            .count();
        assert!(inside as f64 / 2000.0 >= 0.99, "fraction {}", inside as f64 / 2000.0);
    }

    #[test]
    fn restricted_hvp_identity_hessian() {
        let obj = Objective::new(QuadraticProblem::sphere(8));
        let sk = Sketch::sample(2, 0, 3, 8).unwrap();
        let u = [0.5, -1.0, 2.0];
        let x = gaussian_vec(3, 8);
        let got = sk.restricted_hvp(&obj, &x, &u).unwrap();
        let want = sk.apply(&sk.apply_transpose(&u).unwrap()).unwrap();
        assert_eq!(got, want);
        assert_eq!(sk.restricted_hvp(&obj, &x, &[0.0; 3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn restricted_hvp_matches_dense_oracle() {
        let n = 6;
        let b = gaussian_vec(5, n * n);
        let a: Vec<f64> = (0..n * n).map(|k| (b[k] + b[(k % n) * n + k / n]) / 2.0).collect();
        let quad = QuadraticProblem::dense(n, a.clone(), vec![0.0; n]).unwrap();
        let obj = Objective::new(quad);
        let sk = Sketch::sample(9, 0, 3, n).unwrap();
        let p = DMatrix::from_row_slice(3, n, sk.entries());
        let h = DMatrix::from_row_slice(n, n, &a);
        let u = DVector::from_vec(vec![0.3, -1.2, 0.7]);
        let want = &p * &h * p.transpose() * &u;
        let got = sk.restricted_hvp(&obj, &gaussian_vec(6, n), u.as_slice()).unwrap();
        for i in 0..3 {
            assert!((got[i] - want[i]).abs() <= 1e-10 * (1.0 + want[i].abs()));
        }
    }

    #[test]
    fn psd_restriction_stays_psd() {
        let n = 20;
        let b = gaussian_vec(8, n * n);
        let bm = DMatrix::from_row_slice(n, n, &b);
        let a = &bm * bm.transpose();
        let obj = Objective::new(QuadraticProblem::dense(n, a.as_slice().to_vec(), vec![0.0; n]).unwrap());
        let sk = Sketch::sample(4, 0, 5, n).unwrap();
        let x = vec![0.0; n];
        let cols: Vec<f64> = (0..5)
            .flat_map(|j| {
                let mut e = vec![0.0; 5];
                e[j] = 1.0;
                sk.restricted_hvp(&obj, &x, &e).unwrap()
            })
            .collect();
        let ht = DMatrix::from_column_slice(5, 5, &cols);
        let sym = (&ht + ht.transpose()) * 0.5;
        let ev = SymmetricEigen::new(sym).eigenvalues;
        assert!(ev.min() >= -1e-10 * (1.0 + ev.max()));
    }

    #[test]
    fn orthogonal_sketch_is_orthogonal() {
        let sk = Sketch::orthogonal(3, 0, 12).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let d = dot(sk.row(i), sk.row(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dump_round_trip() {
        let sk = Sketch::sample(13, 4, 3, 5).unwrap();
        let mut buf = Vec::new();
        sk.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 8 * 15);
        assert_eq!(&buf[..4], b"SKCH");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 5);
        let back = Sketch::read_dump(&mut buf.as_slice()).unwrap();
        assert_eq!(back.entries(), sk.entries());
        buf[0] = b'X';
        assert!(Sketch::read_dump(&mut buf.as_slice()).is_err());
    }

    proptest! {
        #[test]
        fn adjoint_identity(seed in 0u64..1000, s in 1usize..8, extra in 0usize..8) {
            let n = s + extra;
            let sk = Sketch::sample(seed, 0, s, n).unwrap();
            let x = gaussian_vec(seed + 1, n);
            let y = gaussian_vec(seed + 2, s);
            let lhs = dot(&sk.apply(&x).unwrap(), &y);
            let rhs = dot(&x, &sk.apply_transpose(&y).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs())));
        }

        #[test]
        fn restricted_hvp_is_symmetric(seed in 0u64..500) {
            let obj = Objective::new(crate::problems::Rosenbrock::new(10));
            let sk = Sketch::sample(seed, 0, 4, 10).unwrap();
            let x = gaussian_vec(seed, 10);
            let u = gaussian_vec(seed + 7, 4);
            let v = gaussian_vec(seed + 8, 4);
            let a = dot(&u, &sk.restricted_hvp(&obj, &x, &v).unwrap());
            let b = dot(&v, &sk.restricted_hvp(&obj, &x, &u).unwrap());
            prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0));
        }
    }
}
