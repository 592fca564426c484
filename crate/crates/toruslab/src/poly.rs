//! Monic integer polynomials: parsing, display, discriminants, basic queries.

use crate::error::{Error, Result};
use crate::zmat::ZMat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

/// A monic polynomial with integer coefficients, `coeffs[i]` the coefficient
/// of `x^i` and `coeffs.last() == 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonicIntPoly {
    pub coeffs: Vec<BigInt>,
}

impl MonicIntPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::invalid("polynomial must have degree >= 1"));
        }
        if !coeffs.last().unwrap().is_one() {
            return Err(Error::invalid("polynomial must be monic"));
        }
        Ok(MonicIntPoly { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        MonicIntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect()).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn eval_q(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    pub fn eval_z(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.to_f64().unwrap();
        }
        acc
    }

    pub fn derivative_eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * x + i as f64 * c.to_f64().unwrap();
        }
        acc
    }

    /// Power sums `p_k = sum of k-th powers of the roots` for `k = 0..=kmax`,
    /// by Newton's identities; exact integers for a monic integer polynomial.
    pub fn power_sums(&self, kmax: usize) -> Vec<BigInt> {
        let n = self.degree();
        let mut p = Vec::with_capacity(kmax + 1);
        p.push(BigInt::from(n as i64));
        for k in 1..=kmax {
            let mut s = BigInt::zero();
            for i in 1..=k.saturating_sub(1).min(n) {
                s += &self.coeffs[n - i] * &p[k - i];
            }
            let mut pk = -s;
            if k <= n {
                pk -= BigInt::from(k as i64) * &self.coeffs[n - k];
            }
            p.push(pk);
        }
        p
    }

    /// Trace form matrix `T[i][j] = Tr(t^{i+j})` on the power basis of
    /// `Q[t]/(self)`.
    pub fn trace_form(&self) -> ZMat {
        let n = self.degree();
        let p = self.power_sums(2 * n - 2);
        ZMat::from_fn(n, n, |i, j| p[i + j].clone())
    }

    /// Discriminant, computed as the determinant of the trace form.
    pub fn disc(&self) -> BigInt {
        self.trace_form().det()
    }

    /// Companion matrix `C` with row convention: for a row coordinate vector
    /// `c` of an element of `Q[t]/(self)`, `c * C` is the coordinate vector
    /// of `t` times that element.
    pub fn companion(&self) -> ZMat {
        let n = self.degree();
        ZMat::from_fn(n, n, |i, j| {
            if i + 1 < n {
                if j == i + 1 {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            } else {
                -self.coeffs[j].clone()
            }
        })
    }

    /// Integer roots (monic, so any rational root is an integer dividing the
    /// constant term).
    pub fn integer_roots(&self) -> Vec<BigInt> {
        let c0 = self.coeffs[0].clone();
        let mut roots = Vec::new();
        if c0.is_zero() {
            roots.push(BigInt::zero());
        } else {
            let bound = c0.abs();
            let mut d = BigInt::one();
            while &d <= &bound {
                if (&c0 % &d).is_zero() {
                    for cand in [d.clone(), -d.clone()] {
                        if self.eval_z(&cand).is_zero() {
                            roots.push(cand);
                        }
                    }
                }
                d += 1;
            }
        }
        roots.sort();
        roots.dedup();
        roots
    }

    /// Irreducibility over Q; only implemented for degrees 2 and 3, where it
    /// reduces to having no rational (hence integer) root.
    pub fn is_irreducible(&self) -> Result<bool> {
        match self.degree() {
            2 | 3 => Ok(self.integer_roots().is_empty()),
            d => Err(Error::invalid(format!("irreducibility test limited to degree 2 or 3, got {d}"))),
        }
    }

    /// Signature `(r1, r2)`: real embeddings and conjugate pairs. Requires a
    /// separable polynomial of degree 2 or 3.
    pub fn signature(&self) -> Result<(usize, usize)> {
        let d = self.disc();
        if d.is_zero() {
            return Err(Error::invalid("polynomial is not separable"));
        }
        match (self.degree(), d.is_positive()) {
            (2, true) => Ok((2, 0)),
            (2, false) => Ok((0, 1)),
            (3, true) => Ok((3, 0)),
            (3, false) => Ok((1, 1)),
            (n, _) => Err(Error::invalid(format!("signature limited to degree 2 or 3, got {n}"))),
        }
    }

    pub fn is_totally_real(&self) -> bool {
        self.disc().is_positive()
    }
}

impl fmt::Display for MonicIntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let mut first = true;
        for i in (0..=n).rev() {
            let c = &self.coeffs[i];
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{mag}")?,
                1 => {
                    if mag.is_one() {
                        write!(f, "x")?;
                    } else {
                        write!(f, "{mag}x")?;
                    }
                }
                _ => {
                    if mag.is_one() {
                        write!(f, "x^{i}")?;
                    } else {
                        write!(f, "{mag}x^{i}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl FromStr for MonicIntPoly {
    type Err = Error;

    /// Parse strings like `x^3 - x - 1`, `X^2+5`, `2 - x + x^2`.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '*')
            .map(|c| if c == 'X' { 'x' } else { c })
            .collect();
        if compact.is_empty() {
            return Err(Error::invalid("empty polynomial"));
        }
        // Split into signed terms.
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (i, ch) in compact.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 {
                terms.push(cur.clone());
                cur.clear();
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut coeffs: Vec<BigInt> = Vec::new();
        for t in &terms {
            let (sign, body) = match t.strip_prefix('-') {
                Some(b) => (-1, b),
                None => (1, t.strip_prefix('+').unwrap_or(t)),
            };
            let (coeff_str, exp) = match body.find('x') {
                None => (body, 0usize),
                Some(pos) => {
                    let after = &body[pos + 1..];
                    let exp = if after.is_empty() {
                        1
                    } else if let Some(e) = after.strip_prefix('^') {
                        e.parse::<usize>().map_err(|_| Error::invalid(format!("bad exponent in term '{t}'")))?
                    } else {
                        return Err(Error::invalid(format!("bad term '{t}'")));
                    };
                    (&body[..pos], exp)
                }
            };
            let mag: BigInt = if coeff_str.is_empty() {
                if exp == 0 {
                    return Err(Error::invalid(format!("bad term '{t}'")));
                }
                BigInt::one()
            } else {
                coeff_str.parse().map_err(|_| Error::invalid(format!("bad coefficient in term '{t}'")))?
            };
            if coeffs.len() <= exp {
                coeffs.resize(exp + 1, BigInt::zero());
            }
            coeffs[exp] += BigInt::from(sign) * mag;
        }
        while coeffs.len() > 1 && coeffs.last().unwrap().is_zero() {
            coeffs.pop();
        }
        MonicIntPoly::new(coeffs)
    }
}
