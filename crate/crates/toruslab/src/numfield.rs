//! Arithmetic in K = Q[t]/(P) on exact rational coordinate vectors over the
//! power basis 1, t, ..., t^(n-1).

use crate::error::{Error, Result};
use crate::poly::MonicIntPoly;
use crate::zmat::QMat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Field element as rational coordinates over the power basis.
pub type Elt = Vec<BigRational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumField {
    pub poly: MonicIntPoly,
    pub n: usize,
    /// Power sums Tr(t^k) for k = 0..2n-2, cached for traces.
    traces: Vec<BigInt>,
}

impl NumField {
    pub fn new(poly: MonicIntPoly) -> Result<Self> {
        if !poly.is_irreducible()? {
            return Err(Error::invalid(format!("{poly} is reducible over Q")));
        }
        Ok(Self::new_unchecked(poly))
    }

    /// Builds the quotient ring Q[t]/(P) without an irreducibility check;
    /// callers that need a field should use [`NumField::new`].
    pub fn new_unchecked(poly: MonicIntPoly) -> Self {
        let n = poly.degree();
        let traces = poly.power_sums(2 * n - 2);
        NumField { poly, n, traces }
    }

    pub fn zero(&self) -> Elt {
        vec![BigRational::zero(); self.n]
    }

    pub fn one(&self) -> Elt {
        let mut e = self.zero();
        e[0] = BigRational::one();
        e
    }

    /// The class of t.
    pub fn gen(&self) -> Elt {
        let mut e = self.zero();
        e[1] = BigRational::one();
        e
    }

    pub fn from_i64(&self, coords: &[i64]) -> Elt {
        assert_eq!(coords.len(), self.n);
        coords.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect()
    }

    pub fn is_zero(&self, a: &Elt) -> bool {
        a.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, a: &Elt, b: &Elt) -> Elt {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn sub(&self, a: &Elt, b: &Elt) -> Elt {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    pub fn neg(&self, a: &Elt) -> Elt {
        a.iter().map(|x| -x).collect()
    }

    pub fn scale(&self, a: &Elt, c: &BigRational) -> Elt {
        a.iter().map(|x| x * c).collect()
    }

    /// Reduce a polynomial of degree < 2n-1 modulo P (monic).
    fn reduce(&self, mut v: Vec<BigRational>) -> Elt {
        let n = self.n;
        for d in (n..v.len()).rev() {
            if v[d].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut v[d], BigRational::zero());
            for i in 0..n {
                let sub = &c * BigRational::from_integer(self.poly.coeffs[i].clone());
                v[d - n + i] -= sub;
            }
        }
        v.truncate(n);
        v
    }

    pub fn mul(&self, a: &Elt, b: &Elt) -> Elt {
        let mut v = vec![BigRational::zero(); 2 * self.n - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                v[i + j] += ai * bj;
            }
        }
        self.reduce(v)
    }

    pub fn pow(&self, a: &Elt, mut k: u64) -> Elt {
        let mut base = a.clone();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Matrix of multiplication by `a` (row convention: coords(x*a) =
    /// coords(x) * M).
    pub fn mul_matrix(&self, a: &Elt) -> QMat {
        let mut rows = Vec::with_capacity(self.n);
        let mut cur = a.clone();
        rows.push(cur.clone());
        for _ in 1..self.n {
            cur = self.mul_by_t(&cur);
            rows.push(cur.clone());
        }
        QMat::from_fn(self.n, self.n, |i, j| rows[i][j].clone())
    }

    fn mul_by_t(&self, a: &Elt) -> Elt {
        let mut v = vec![BigRational::zero(); self.n + 1];
        for (i, ai) in a.iter().enumerate() {
            v[i + 1] = ai.clone();
        }
        self.reduce(v)
    }

    pub fn trace(&self, a: &Elt) -> BigRational {
        let mut s = BigRational::zero();
        for (i, ai) in a.iter().enumerate() {
            s += ai * BigRational::from_integer(self.traces[i].clone());
        }
        s
    }

    /// Trace of a product, via the cached power sums (degree < 2n-1 after
    /// convolution, no reduction needed).
    pub fn trace_of_product(&self, a: &Elt, b: &Elt) -> BigRational {
        let mut s = BigRational::zero();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                s += ai * bj * BigRational::from_integer(self.traces[i + j].clone());
            }
        }
        s
    }

    pub fn norm(&self, a: &Elt) -> BigRational {
        self.mul_matrix(a).det()
    }

    pub fn inverse(&self, a: &Elt) -> Option<Elt> {
        let m = self.mul_matrix(a).inverse()?;
        Some(m.row(0).to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn golden() -> NumField {
        NumField::new("x^2 - x - 1".parse().unwrap()).unwrap()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn golden_ratio_arithmetic() {
        let k = golden();
        let t = k.gen();
        // t^2 = 1 + t
        assert_eq!(k.mul(&t, &t), k.from_i64(&[1, 1]));
        assert_eq!(k.trace(&t), q(1));
        assert_eq!(k.norm(&t), q(-1));
        let inv = k.inverse(&t).unwrap();
        assert_eq!(k.mul(&t, &inv), k.one());
        // 1/t = t - 1
        assert_eq!(inv, k.from_i64(&[-1, 1]));
    }

    #[test]
    fn cubic_norm_is_multiplicative() {
        let k = NumField::new("x^3 - x - 1".parse().unwrap()).unwrap();
        let mut rng = crate::rng::sample_rng(12, crate::rng::domains::PROPERTY, 0);
        for _ in 0..25 {
            let a: Elt = (0..3).map(|_| q(rng.gen_range(-5i64..=5))).collect();
            let b: Elt = (0..3).map(|_| q(rng.gen_range(-5i64..=5))).collect();
            let lhs = k.norm(&k.mul(&a, &b));
            let rhs = k.norm(&a) * k.norm(&b);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn trace_of_product_matches_direct() {
        let k = NumField::new("x^3 - 2".parse().unwrap()).unwrap();
        let mut rng = crate::rng::sample_rng(13, crate::rng::domains::PROPERTY, 0);
        for _ in 0..25 {
            let a: Elt = (0..3).map(|_| q(rng.gen_range(-4i64..=4))).collect();
            let b: Elt = (0..3).map(|_| q(rng.gen_range(-4i64..=4))).collect();
            assert_eq!(k.trace_of_product(&a, &b), k.trace(&k.mul(&a, &b)));
        }
    }

    #[test]
    fn inverse_of_zero_is_none() {
        let k = golden();
        assert!(k.inverse(&k.zero()).is_none());
    }

    #[test]
    fn mul_matrix_row_convention() {
        let k = NumField::new("x^3 - x - 1".parse().unwrap()).unwrap();
        let a = k.from_i64(&[1, 2, 0]);
        let b = k.from_i64(&[0, 1, 1]);
        let m = k.mul_matrix(&b);
        let prod = crate::zmat::row_mul(&a, &m);
        assert_eq!(prod, k.mul(&a, &b));
    }
}
