//! Archimedean embeddings of K = Q[t]/(P) into R^n.
//!
//! Roots are ordered with the real ones first (ascending), then one
//! representative per complex-conjugate pair (positive imaginary part). The
//! real coordinate rows are (sigma_1(x), ..., sigma_r1(x), sqrt(2) Re tau_1(x),
//! sqrt(2) Im tau_1(x), ...); with the sqrt(2) scaling the image of Z[t] has
//! covolume exactly sqrt(|disc P|).

use crate::error::{Error, Result};
use crate::poly::MonicIntPoly;
use crate::zmat::QLattice;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;

#[derive(Debug, Clone)]
pub struct Embedding {
    pub poly: MonicIntPoly,
    pub n: usize,
    pub r1: usize,
    pub r2: usize,
    /// r1 real roots ascending, then r2 upper-half-plane roots.
    pub roots: Vec<Complex64>,
    /// Row i is the real embedding vector of t^i.
    basis_rows: Vec<Vec<f64>>,
}

/// All complex roots by Durand-Kerner iteration, then Newton polish.
fn all_roots(poly: &MonicIntPoly) -> Result<Vec<Complex64>> {
    let n = poly.degree();
    let coeffs: Vec<f64> = poly.coeffs.iter().map(|c| c.to_f64().unwrap()).collect();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let eval_d = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * z + i as f64 * c;
        }
        acc
    };
    let bound = 1.0 + coeffs[..n].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut zs: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32 + 1) * bound).collect();
    for _ in 0..200 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= zs[i] - zs[j];
                }
            }
            let step = eval(zs[i]) / denom;
            zs[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 * bound {
            break;
        }
    }
    // Newton polish.
    for z in zs.iter_mut() {
        for _ in 0..5 {
            let d = eval_d(*z);
            if d.norm() < 1e-300 {
                break;
            }
            *z -= eval(*z) / d;
        }
    }
    for z in &zs {
        if eval(*z).norm() > 1e-9 * bound.max(1.0) {
            return Err(Error::nonconv(format!("root finding failed for {poly}")));
        }
    }
    Ok(zs)
}

impl Embedding {
    pub fn new(poly: &MonicIntPoly) -> Result<Self> {
        let n = poly.degree();
        let (r1, r2) = poly.signature()?;
        let zs = all_roots(poly)?;
        // Classify: the r1 roots closest to the real axis are real.
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| zs[a].im.abs().partial_cmp(&zs[b].im.abs()).unwrap());
        let mut reals: Vec<f64> = idx[..r1].iter().map(|&i| zs[i].re).collect();
        reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Re-polish the real roots with real Newton steps.
        for r in reals.iter_mut() {
            for _ in 0..4 {
                let d = poly.derivative_eval_f64(*r);
                if d.abs() < 1e-300 {
                    break;
                }
                *r -= poly.eval_f64(*r) / d;
            }
        }
        let mut pairs: Vec<Complex64> = idx[r1..]
            .iter()
            .map(|&i| zs[i])
            .filter(|z| z.im > 0.0)
            .collect();
        pairs.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        if pairs.len() != r2 {
            return Err(Error::nonconv("complex roots failed to pair up"));
        }
        let mut roots: Vec<Complex64> = reals.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        roots.extend(pairs);
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut basis_rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for k in 0..r1 {
                row.push(roots[k].re.powi(i as i32));
            }
            for k in 0..r2 {
                let v = roots[r1 + k].powu(i as u32);
                row.push(sqrt2 * v.re);
                row.push(sqrt2 * v.im);
            }
            basis_rows.push(row);
        }
        Ok(Embedding { poly: poly.clone(), n, r1, r2, roots, basis_rows })
    }

    /// Values of the element at the r1 + r2 canonical roots.
    pub fn values_q(&self, x: &[BigRational]) -> Vec<Complex64> {
        let coords: Vec<f64> = x.iter().map(|c| c.to_f64().unwrap()).collect();
        self.values_f64(&coords)
    }

    pub fn values_f64(&self, coords: &[f64]) -> Vec<Complex64> {
        self.roots
            .iter()
            .map(|&z| {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in coords.iter().rev() {
                    acc = acc * z + c;
                }
                acc
            })
            .collect()
    }

    /// Real embedding vector in R^n (sqrt(2)-scaled complex coordinates).
    pub fn embed_f64(&self, coords: &[f64]) -> Vec<f64> {
        assert_eq!(coords.len(), self.n);
        let mut out = vec![0.0; self.n];
        for (i, &c) in coords.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (j, b) in self.basis_rows[i].iter().enumerate() {
                out[j] += c * b;
            }
        }
        out
    }

    pub fn embed_q(&self, x: &[BigRational]) -> Vec<f64> {
        let coords: Vec<f64> = x.iter().map(|c| c.to_f64().unwrap()).collect();
        self.embed_f64(&coords)
    }

    /// Embedded row basis of a lattice.
    pub fn lattice_rows(&self, lat: &QLattice) -> Vec<Vec<f64>> {
        let q = lat.to_qmat();
        (0..q.nrows)
            .map(|i| {
                let coords: Vec<f64> = q.row(i).iter().map(|c| c.to_f64().unwrap()).collect();
                self.embed_f64(&coords)
            })
            .collect()
    }

    /// Exact covolume of the embedded lattice:
    /// sqrt(|disc P|) * |det of the rational basis|.
    pub fn covolume(&self, lat: &QLattice) -> f64 {
        assert!(lat.is_full_rank());
        let disc = self.poly.disc().to_f64().unwrap().abs();
        disc.sqrt() * lat.covolume_q().to_f64().unwrap()
    }

    /// Logarithmic embedding (log|sigma_i|, with weight 2 on complex places);
    /// length r1 + r2.
    pub fn log_embedding_q(&self, x: &[BigRational]) -> Vec<f64> {
        let vals = self.values_q(x);
        (0..self.r1 + self.r2)
            .map(|i| {
                let w = if i < self.r1 { 1.0 } else { 2.0 };
                w * vals[i].norm().ln()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(s: &str) -> Embedding {
        Embedding::new(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn known_real_roots() {
        let plastic = emb("x^3 - x - 1");
        assert_eq!((plastic.r1, plastic.r2), (1, 1));
        assert!((plastic.roots[0].re - 1.3247179572447460).abs() < 1e-12);
        let cbrt2 = emb("x^3 - 2");
        assert!((cbrt2.roots[0].re - 1.2599210498948732).abs() < 1e-12);
        let golden = emb("x^2 - x - 1");
        assert_eq!((golden.r1, golden.r2), (2, 0));
        assert!((golden.roots[1].re - 1.6180339887498949).abs() < 1e-12);
        assert!((golden.roots[0].re + 0.6180339887498949).abs() < 1e-12);
    }

    #[test]
    fn gaussian_roots() {
        let g = emb("x^2 + 1");
        assert_eq!((g.r1, g.r2), (0, 1));
        assert!((g.roots[0] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn covolume_of_equation_order_is_sqrt_disc() {
        for (s, d) in [("x^2 - x - 1", 5.0), ("x^2 + 1", 4.0), ("x^3 - x - 1", 23.0), ("x^3 - 2", 108.0)] {
            let e = emb(s);
            let cov = e.covolume(&QLattice::standard(e.n));
            assert!((cov - f64::sqrt(d)).abs() < 1e-9, "{s}: {cov}");
            // Cross-check against the f64 determinant of the embedded basis.
            let rows = e.lattice_rows(&QLattice::standard(e.n));
            let det = match e.n {
                2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
                3 => {
                    rows[0][0] * (rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1])
                        - rows[0][1] * (rows[1][0] * rows[2][2] - rows[1][2] * rows[2][0])
                        + rows[0][2] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0])
                }
                _ => unreachable!(),
            };
            assert!((det.abs() - cov).abs() < 1e-8 * cov, "{s}");
        }
    }

    #[test]
    fn embedding_is_multiplicative_on_values() {
        let e = emb("x^3 - x - 1");
        let k = crate::numfield::NumField::new(e.poly.clone()).unwrap();
        let a = k.from_i64(&[1, 2, -1]);
        let b = k.from_i64(&[0, 1, 1]);
        let ab = k.mul(&a, &b);
        let va = e.values_q(&a);
        let vb = e.values_q(&b);
        let vab = e.values_q(&ab);
        for i in 0..2 {
            assert!((va[i] * vb[i] - vab[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn log_embedding_sums_to_log_norm() {
        let e = emb("x^3 - x - 1");
        let k = crate::numfield::NumField::new(e.poly.clone()).unwrap();
        let x = k.from_i64(&[2, -1, 3]);
        let logs = e.log_embedding_q(&x);
        let total: f64 = logs.iter().sum();
        let norm = k.norm(&x).to_f64().unwrap().abs().ln();
        assert!((total - norm).abs() < 1e-9);
    }
}
