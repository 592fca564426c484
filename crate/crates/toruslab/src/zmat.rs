//! Exact integer and rational linear algebra on small dense matrices.
//!
//! Everything here is row-oriented: a lattice is the row span of a basis
//! matrix, and linear maps act by right multiplication on row vectors. The
//! central canonical form is the row Hermite normal form (echelon, positive
//! pivots, entries above each pivot reduced into `[0, pivot)`), which makes
//! lattice equality a plain `==`. Matrices stay small (at most 9 columns in
//! practice) so the algorithms favour clarity over asymptotics.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Extended gcd normalised so the returned gcd is non-negative.
pub fn xgcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let eg = a.extended_gcd(b);
    if eg.gcd.is_negative() {
        (-eg.gcd, -eg.x, -eg.y)
    } else {
        (eg.gcd, eg.x, eg.y)
    }
}

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZMat {
    pub nrows: usize,
    pub ncols: usize,
    pub a: Vec<BigInt>,
}

impl ZMat {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        ZMat { nrows, ncols, a: vec![BigInt::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ZMat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut m = ZMat::zero(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                *m.at_mut(i, j) = f(i, j);
            }
        }
        m
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        ZMat::from_fn(nrows, ncols, |i, j| BigInt::from(rows[i][j]))
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.a[i * self.ncols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.a[i * self.ncols + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.a[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn transpose(&self) -> ZMat {
        ZMat::from_fn(self.ncols, self.nrows, |i, j| self.at(j, i).clone())
    }

    pub fn mul(&self, other: &ZMat) -> ZMat {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in ZMat::mul");
        ZMat::from_fn(self.nrows, other.ncols, |i, j| {
            let mut s = BigInt::zero();
            for k in 0..self.ncols {
                s += self.at(i, k) * other.at(k, j);
            }
            s
        })
    }

    pub fn mul_scalar(&self, c: &BigInt) -> ZMat {
        ZMat::from_fn(self.nrows, self.ncols, |i, j| self.at(i, j) * c)
    }

    /// Exact division of every entry; panics if any entry is not divisible.
    pub fn div_scalar_exact(&self, c: &BigInt) -> ZMat {
        assert!(!c.is_zero());
        ZMat::from_fn(self.nrows, self.ncols, |i, j| {
            let (q, r) = self.at(i, j).div_rem(c);
            assert!(r.is_zero(), "non-exact scalar division");
            q
        })
    }

    /// Gcd of all entries (non-negative, 0 for a zero matrix).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for e in &self.a {
            g = g.gcd(e);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.ncols {
            self.a.swap(i * self.ncols + c, j * self.ncols + c);
        }
    }

    pub fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.nrows {
            self.a.swap(r * self.ncols + i, r * self.ncols + j);
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for c in 0..self.ncols {
            let v = -self.at(i, c).clone();
            *self.at_mut(i, c) = v;
        }
    }

    fn truncate_rows(&mut self, n: usize) {
        self.a.truncate(n * self.ncols);
        self.nrows = n;
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        use num_traits::ToPrimitive;
        (0..self.nrows)
            .map(|i| (0..self.ncols).map(|j| self.at(i, j).to_f64().unwrap()).collect())
            .collect()
    }

    /// Row Hermite normal form with zero rows dropped; canonical per lattice.
    pub fn hnf(&self) -> ZMat {
        let mut m = self.clone();
        let mut piv = 0usize;
        for col in 0..m.ncols {
            if piv >= m.nrows {
                break;
            }
            let Some(r0) = (piv..m.nrows).find(|&r| !m.at(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(piv, r0);
            for r in piv + 1..m.nrows {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let a = m.at(piv, col).clone();
                let b = m.at(r, col).clone();
                let (g, x, y) = xgcd(&a, &b);
                let a1 = &a / &g;
                let b1 = &b / &g;
                combine_rows(&mut m, piv, r, &x, &y, &a1, &b1);
            }
            if m.at(piv, col).is_negative() {
                m.negate_row(piv);
            }
            let p = m.at(piv, col).clone();
            for r in 0..piv {
                let q = m.at(r, col).div_floor(&p);
                if !q.is_zero() {
                    for c in 0..m.ncols {
                        let sub = &q * m.at(piv, c);
                        let v = m.at(r, c) - sub;
                        *m.at_mut(r, c) = v;
                    }
                }
            }
            piv += 1;
        }
        m.truncate_rows(piv);
        m
    }

    pub fn rank(&self) -> usize {
        self.hnf().nrows
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "det of non-square matrix");
        let n = self.nrows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = 1i8;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m.at(k, k).is_zero() {
                let Some(r) = (k + 1..n).find(|&r| !m.at(r, k).is_zero()) else {
                    return BigInt::zero();
                };
                m.swap_rows(k, r);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j);
                    *m.at_mut(i, j) = num / &prev;
                }
            }
            prev = m.at(k, k).clone();
        }
        let d = m.at(n - 1, n - 1).clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Adjugate (transpose of the cofactor matrix), so `A * adj(A) = det(A) * I`.
    pub fn adjugate(&self) -> ZMat {
        assert!(self.is_square());
        let n = self.nrows;
        if n == 0 {
            return ZMat::zero(0, 0);
        }
        ZMat::from_fn(n, n, |i, j| {
            // Entry (i, j) of adj is the (j, i) cofactor.
            let minor = ZMat::from_fn(n - 1, n - 1, |r, c| {
                let rr = if r < j { r } else { r + 1 };
                let cc = if c < i { c } else { c + 1 };
                self.at(rr, cc).clone()
            });
            let d = minor.det();
            if (i + j) % 2 == 0 {
                d
            } else {
                -d
            }
        })
    }

    /// Smith normal form `u * self * v = diag(d)` with unimodular `u`, `v`
    /// and non-negative `d[0] | d[1] | ...`.
    pub fn snf(&self) -> Snf {
        let mut d = self.clone();
        let (k, m) = (d.nrows, d.ncols);
        let mut u = ZMat::identity(k);
        let mut v = ZMat::identity(m);
        let t = k.min(m);
        for i in 0..t {
            let mut pivot = None;
            'search: for r in i..k {
                for c in i..m {
                    if !d.at(r, c).is_zero() {
                        pivot = Some((r, c));
                        break 'search;
                    }
                }
            }
            let Some((r0, c0)) = pivot else { break };
            d.swap_rows(i, r0);
            u.swap_rows(i, r0);
            d.swap_cols(i, c0);
            v.swap_cols(i, c0);
            clean_position(&mut d, &mut u, &mut v, i);
        }
        for j in 0..t {
            if d.at(j, j).is_negative() {
                d.negate_row(j);
                u.negate_row(j);
            }
        }
        // Enforce the divisibility chain (and zeros last).
        loop {
            let mut changed = false;
            for j in 0..t {
                for l in j + 1..t {
                    let a = d.at(j, j).clone();
                    let b = d.at(l, l).clone();
                    if b.is_zero() {
                        continue;
                    }
                    if a.is_zero() || !(&b % &a).is_zero() {
                        // Couple the two positions, then re-diagonalise them.
                        for r in 0..k {
                            let add = d.at(r, l).clone();
                            *d.at_mut(r, j) += add;
                        }
                        for r in 0..m {
                            let add = v.at(r, l).clone();
                            *v.at_mut(r, j) += add;
                        }
                        clean_position(&mut d, &mut u, &mut v, j);
                        clean_position(&mut d, &mut u, &mut v, l);
                        for jj in [j, l] {
                            if d.at(jj, jj).is_negative() {
                                d.negate_row(jj);
                                u.negate_row(jj);
                            }
                        }
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let diag = (0..t).map(|j| d.at(j, j).clone()).collect();
        Snf { u, d: diag, v }
    }
}

/// Unimodular two-row update: `(row_i, row_r) <- (x*row_i + y*row_r, a1*row_r - b1*row_i)`.
fn combine_rows(m: &mut ZMat, i: usize, r: usize, x: &BigInt, y: &BigInt, a1: &BigInt, b1: &BigInt) {
    for c in 0..m.ncols {
        let pc = m.at(i, c).clone();
        let rc = m.at(r, c).clone();
        *m.at_mut(i, c) = x * &pc + y * &rc;
        *m.at_mut(r, c) = a1 * &rc - b1 * &pc;
    }
}

fn combine_cols(m: &mut ZMat, i: usize, c: usize, x: &BigInt, y: &BigInt, a1: &BigInt, b1: &BigInt) {
    for r in 0..m.nrows {
        let pi = m.at(r, i).clone();
        let pc = m.at(r, c).clone();
        *m.at_mut(r, i) = x * &pi + y * &pc;
        *m.at_mut(r, c) = a1 * &pc - b1 * &pi;
    }
}

fn rows_step(d: &mut ZMat, u: &mut ZMat, i: usize, r: usize, col: usize) {
    let a = d.at(i, col).clone();
    let b = d.at(r, col).clone();
    if b.is_zero() {
        return;
    }
    if a.is_zero() {
        d.swap_rows(i, r);
        u.swap_rows(i, r);
        return;
    }
    if (&b % &a).is_zero() {
        // Pure elimination keeps the pivot row untouched; this is what makes
        // the cleanup loop terminate once the pivot divides everything.
        let q = &b / &a;
        for c in 0..d.ncols {
            let sub = &q * d.at(i, c);
            *d.at_mut(r, c) -= sub;
        }
        for c in 0..u.ncols {
            let sub = &q * u.at(i, c);
            *u.at_mut(r, c) -= sub;
        }
        return;
    }
    let (g, x, y) = xgcd(&a, &b);
    let a1 = &a / &g;
    let b1 = &b / &g;
    combine_rows(d, i, r, &x, &y, &a1, &b1);
    combine_rows(u, i, r, &x, &y, &a1, &b1);
}

fn cols_step(d: &mut ZMat, v: &mut ZMat, i: usize, c: usize, row: usize) {
    let a = d.at(row, i).clone();
    let b = d.at(row, c).clone();
    if b.is_zero() {
        return;
    }
    if a.is_zero() {
        d.swap_cols(i, c);
        v.swap_cols(i, c);
        return;
    }
    if (&b % &a).is_zero() {
        let q = &b / &a;
        for r in 0..d.nrows {
            let sub = &q * d.at(r, i);
            *d.at_mut(r, c) -= sub;
        }
        for r in 0..v.nrows {
            let sub = &q * v.at(r, i);
            *v.at_mut(r, c) -= sub;
        }
        return;
    }
    let (g, x, y) = xgcd(&a, &b);
    let a1 = &a / &g;
    let b1 = &b / &g;
    combine_cols(d, i, c, &x, &y, &a1, &b1);
    combine_cols(v, i, c, &x, &y, &a1, &b1);
}

fn clean_position(d: &mut ZMat, u: &mut ZMat, v: &mut ZMat, i: usize) {
    loop {
        let mut any = false;
        for r in i + 1..d.nrows {
            if !d.at(r, i).is_zero() {
                rows_step(d, u, i, r, i);
                any = true;
            }
        }
        for c in i + 1..d.ncols {
            if !d.at(i, c).is_zero() {
                cols_step(d, v, i, c, i);
                any = true;
            }
        }
        if !any {
            break;
        }
    }
}

/// Result of [`ZMat::snf`].
pub struct Snf {
    pub u: ZMat,
    pub d: Vec<BigInt>,
    pub v: ZMat,
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.d.iter().filter(|x| !x.is_zero()).count()
    }
}

/// Dense rational matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMat {
    pub nrows: usize,
    pub ncols: usize,
    pub a: Vec<BigRational>,
}

impl QMat {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        QMat { nrows, ncols, a: vec![BigRational::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigRational::one();
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut m = QMat::zero(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                *m.at_mut(i, j) = f(i, j);
            }
        }
        m
    }

    pub fn from_zmat(z: &ZMat) -> Self {
        QMat::from_fn(z.nrows, z.ncols, |i, j| BigRational::from_integer(z.at(i, j).clone()))
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &BigRational {
        &self.a[i * self.ncols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigRational {
        &mut self.a[i * self.ncols + j]
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.a[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in QMat::mul");
        QMat::from_fn(self.nrows, other.ncols, |i, j| {
            let mut s = BigRational::zero();
            for k in 0..self.ncols {
                s += self.at(i, k) * other.at(k, j);
            }
            s
        })
    }

    pub fn scale(&self, c: &BigRational) -> QMat {
        QMat::from_fn(self.nrows, self.ncols, |i, j| self.at(i, j) * c)
    }

    pub fn transpose(&self) -> QMat {
        QMat::from_fn(self.ncols, self.nrows, |i, j| self.at(j, i).clone())
    }

    pub fn concat_cols(left: &QMat, right: &QMat) -> QMat {
        assert_eq!(left.nrows, right.nrows);
        QMat::from_fn(left.nrows, left.ncols + right.ncols, |i, j| {
            if j < left.ncols {
                left.at(i, j).clone()
            } else {
                right.at(i, j - left.ncols).clone()
            }
        })
    }

    /// Gauss-Jordan inverse; `None` if singular.
    pub fn inverse(&self) -> Option<QMat> {
        assert!(self.nrows == self.ncols, "inverse of non-square matrix");
        let n = self.nrows;
        let mut m = QMat::concat_cols(self, &QMat::identity(n));
        for col in 0..n {
            let r0 = (col..n).find(|&r| !m.at(r, col).is_zero())?;
            if r0 != col {
                for c in 0..2 * n {
                    m.a.swap(col * 2 * n + c, r0 * 2 * n + c);
                }
            }
            let p = m.at(col, col).clone();
            for c in 0..2 * n {
                let v = m.at(col, c) / &p;
                *m.at_mut(col, c) = v;
            }
            for r in 0..n {
                if r == col || m.at(r, col).is_zero() {
                    continue;
                }
                let f = m.at(r, col).clone();
                for c in 0..2 * n {
                    let sub = &f * m.at(col, c);
                    let v = m.at(r, c) - sub;
                    *m.at_mut(r, c) = v;
                }
            }
        }
        Some(QMat::from_fn(n, n, |i, j| m.at(i, j + n).clone()))
    }

    pub fn det(&self) -> BigRational {
        assert!(self.nrows == self.ncols);
        let n = self.nrows;
        let mut m = self.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(r0) = (col..n).find(|&r| !m.at(r, col).is_zero()) else {
                return BigRational::zero();
            };
            if r0 != col {
                for c in 0..n {
                    m.a.swap(col * n + c, r0 * n + c);
                }
                det = -det;
            }
            let p = m.at(col, col).clone();
            det *= &p;
            for r in col + 1..n {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let f = m.at(r, col) / &p;
                for c in col..n {
                    let sub = &f * m.at(col, c);
                    let v = m.at(r, c) - sub;
                    *m.at_mut(r, c) = v;
                }
            }
        }
        det
    }

    /// Least common multiple of all entry denominators and the integer matrix
    /// of numerators after clearing, i.e. `self = (1/c) * W`.
    pub fn clear_denoms(&self) -> (BigInt, ZMat) {
        let mut c = BigInt::one();
        for e in &self.a {
            c = c.lcm(e.denom());
        }
        let w = ZMat::from_fn(self.nrows, self.ncols, |i, j| {
            let e = self.at(i, j);
            e.numer() * (&c / e.denom())
        });
        (c, w)
    }
}

/// Multiply a row vector by a matrix.
pub fn row_mul(x: &[BigRational], m: &QMat) -> Vec<BigRational> {
    assert_eq!(x.len(), m.nrows);
    (0..m.ncols)
        .map(|j| {
            let mut s = BigRational::zero();
            for (k, xk) in x.iter().enumerate() {
                s += xk * m.at(k, j);
            }
            s
        })
        .collect()
}

/// A lattice of rank `<= dim` in `Q^dim`, stored as `(1/den) * rowspan(basis)`
/// with `basis` in Hermite normal form and `gcd(den, content(basis)) = 1`.
/// The representation is canonical, so derived equality and ordering are
/// equality and a total lexicographic order on lattices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QLattice {
    pub den: BigInt,
    pub basis: ZMat,
}

impl QLattice {
    pub fn new(den: BigInt, mat: ZMat) -> Self {
        assert!(den.is_positive(), "lattice denominator must be positive");
        let h = mat.hnf();
        if h.nrows == 0 {
            return QLattice { den: BigInt::one(), basis: h };
        }
        let g = den.gcd(&h.content());
        if g.is_one() {
            QLattice { den, basis: h }
        } else {
            QLattice { den: &den / &g, basis: h.div_scalar_exact(&g) }
        }
    }

    pub fn standard(n: usize) -> Self {
        QLattice { den: BigInt::one(), basis: ZMat::identity(n) }
    }

    pub fn from_qmat(m: &QMat) -> Self {
        let (c, w) = m.clear_denoms();
        QLattice::new(c, w)
    }

    pub fn rank(&self) -> usize {
        self.basis.nrows
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim()
    }

    /// Basis as a rational matrix `(1/den) * basis`.
    pub fn to_qmat(&self) -> QMat {
        let d = BigRational::from_integer(self.den.clone());
        QMat::from_fn(self.rank(), self.dim(), |i, j| {
            BigRational::from_integer(self.basis.at(i, j).clone()) / &d
        })
    }

    /// Rational coordinates of `x` in the basis, or `None` if `x` is outside
    /// the Q-span. Forward elimination against the echelon basis.
    pub fn coords(&self, x: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(x.len(), self.dim());
        let den = BigRational::from_integer(self.den.clone());
        let mut rem: Vec<BigRational> = x.iter().map(|e| e * &den).collect();
        let mut ys = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            let j = (0..self.dim()).find(|&j| !self.basis.at(i, j).is_zero()).unwrap();
            let c = &rem[j] / BigRational::from_integer(self.basis.at(i, j).clone());
            if !c.is_zero() {
                for (k, r) in rem.iter_mut().enumerate() {
                    let sub = &c * BigRational::from_integer(self.basis.at(i, k).clone());
                    *r -= sub;
                }
            }
            ys.push(c);
        }
        if rem.iter().all(|r| r.is_zero()) {
            Some(ys)
        } else {
            None
        }
    }

    pub fn contains(&self, x: &[BigRational]) -> bool {
        match self.coords(x) {
            Some(ys) => ys.iter().all(|y| y.is_integer()),
            None => false,
        }
    }

    pub fn contains_lattice(&self, other: &QLattice) -> bool {
        let q = other.to_qmat();
        (0..q.nrows).all(|i| self.contains(q.row(i)))
    }

    pub fn sum(&self, other: &QLattice) -> QLattice {
        assert_eq!(self.dim(), other.dim());
        let stacked = QMat::from_fn(self.rank() + other.rank(), self.dim(), |i, j| {
            if i < self.rank() {
                self.to_qmat().at(i, j).clone()
            } else {
                other.to_qmat().at(i - self.rank(), j).clone()
            }
        });
        QLattice::from_qmat(&stacked)
    }

    /// Intersection of two full-rank lattices in `Q^n`.
    pub fn intersect(&self, other: &QLattice) -> QLattice {
        assert!(self.is_full_rank() && other.is_full_rank());
        assert_eq!(self.dim(), other.dim());
        let b1 = self.to_qmat().inverse().expect("full-rank basis");
        let b2 = other.to_qmat().inverse().expect("full-rank basis");
        let w = QMat::concat_cols(&b1, &b2);
        let (c, wint) = w.clear_denoms();
        // x in both lattices iff x*(1/c)*wint is integral iff x/c is in the
        // preimage lattice of wint.
        preimage_lattice(&wint).scale(&BigRational::from_integer(c))
    }

    /// Index `[sup : self]` when `self` is a finite-index sublattice of `sup`.
    pub fn index_in(&self, sup: &QLattice) -> Option<BigInt> {
        if self.rank() != sup.rank() || self.dim() != sup.dim() {
            return None;
        }
        let q = self.to_qmat();
        let mut coeff = ZMat::zero(self.rank(), self.rank());
        for i in 0..q.nrows {
            let ys = sup.coords(q.row(i))?;
            for (j, y) in ys.iter().enumerate() {
                if !y.is_integer() {
                    return None;
                }
                *coeff.at_mut(i, j) = y.to_integer();
            }
        }
        let d = coeff.det();
        if d.is_zero() {
            None
        } else {
            Some(d.abs())
        }
    }

    /// Scale the lattice by a nonzero rational (sign is irrelevant).
    pub fn scale(&self, c: &BigRational) -> QLattice {
        assert!(!c.is_zero());
        let num = c.numer().abs();
        QLattice::new(&self.den * c.denom(), self.basis.mul_scalar(&num))
    }

    /// Image under right multiplication by a rational matrix.
    pub fn mul_qmat(&self, m: &QMat) -> QLattice {
        QLattice::from_qmat(&self.to_qmat().mul(m))
    }

    /// Covolume determinant `|det basis| / den^n` for full-rank lattices.
    pub fn covolume_q(&self) -> BigRational {
        assert!(self.is_full_rank());
        let d = self.basis.det().abs();
        let mut den = BigInt::one();
        for _ in 0..self.dim() {
            den *= &self.den;
        }
        BigRational::new(d, den)
    }
}

/// The lattice `{ c in Q^k : c * w  is integral }` for `w` of full row rank.
pub fn preimage_lattice(w: &ZMat) -> QLattice {
    let snf = w.snf();
    assert_eq!(snf.rank(), w.nrows, "preimage_lattice needs full row rank");
    let mut den = BigInt::one();
    for d in &snf.d {
        den = den.lcm(d);
    }
    let mat = ZMat::from_fn(w.nrows, w.nrows, |i, j| {
        let f = &den / &snf.d[i];
        snf.u.at(i, j) * f
    });
    QLattice::new(den, mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_mat(rng: &mut impl Rng, nrows: usize, ncols: usize, bound: i64) -> ZMat {
        ZMat::from_fn(nrows, ncols, |_, _| BigInt::from(rng.gen_range(-bound..=bound)))
    }

    fn random_unimodular(rng: &mut impl Rng, n: usize, steps: usize) -> ZMat {
        let mut u = ZMat::identity(n);
        for _ in 0..steps {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            while j == i {
                j = rng.gen_range(0..n);
            }
            let c = BigInt::from(rng.gen_range(-3i64..=3));
            for col in 0..n {
                let add = &c * u.at(j, col);
                *u.at_mut(i, col) += add;
            }
            if rng.gen_bool(0.3) {
                u.swap_rows(i, j);
            }
        }
        u
    }

    #[test]
    fn hnf_known_cases() {
        let m = ZMat::from_i64_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(m.hnf(), ZMat::identity(2));
        let m = ZMat::from_i64_rows(&[vec![2, 1], vec![0, 1]]);
        assert_eq!(m.hnf(), ZMat::from_i64_rows(&[vec![2, 0], vec![0, 1]]));
        let m = ZMat::from_i64_rows(&[vec![4, 6], vec![6, 9]]);
        // Row span of (4,6),(6,9): gcd combinations give (2,3).
        assert_eq!(m.hnf(), ZMat::from_i64_rows(&[vec![2, 3]]));
    }

    #[test]
    fn hnf_invariant_under_unimodular_row_changes() {
        let mut rng = crate::rng::sample_rng(7, crate::rng::domains::PROPERTY, 0);
        for _ in 0..40 {
            let m = random_mat(&mut rng, 3, 3, 9);
            let u = random_unimodular(&mut rng, 3, 12);
            assert_eq!(m.hnf(), u.mul(&m).hnf());
        }
    }

    #[test]
    fn det_known_and_adjugate() {
        let m = ZMat::from_i64_rows(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]]);
        assert_eq!(m.det(), BigInt::from(-3));
        let adj = m.adjugate();
        let prod = m.mul(&adj);
        assert_eq!(prod, ZMat::identity(3).mul_scalar(&BigInt::from(-3)));
    }

    #[test]
    fn det_matches_qmat_det() {
        let mut rng = crate::rng::sample_rng(8, crate::rng::domains::PROPERTY, 0);
        for _ in 0..30 {
            let m = random_mat(&mut rng, 4, 4, 8);
            let dq = QMat::from_zmat(&m).det();
            assert!(dq.is_integer());
            assert_eq!(dq.to_integer(), m.det());
        }
    }

    #[test]
    fn snf_known() {
        let m = ZMat::from_i64_rows(&[vec![2, 4], vec![6, 8]]);
        let s = m.snf();
        assert_eq!(s.d, vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn snf_transform_identity_holds() {
        let mut rng = crate::rng::sample_rng(9, crate::rng::domains::PROPERTY, 0);
        for _ in 0..30 {
            let m = random_mat(&mut rng, 3, 4, 9);
            let s = m.snf();
            assert_eq!(s.u.det().abs(), BigInt::one());
            assert_eq!(s.v.det().abs(), BigInt::one());
            let prod = s.u.mul(&m).mul(&s.v);
            let expect = ZMat::from_fn(3, 4, |i, j| {
                if i == j && i < s.d.len() {
                    s.d[i].clone()
                } else {
                    BigInt::zero()
                }
            });
            assert_eq!(prod, expect);
            for w in s.d.windows(2) {
                if !w[0].is_zero() {
                    assert!((&w[1] % &w[0]).is_zero());
                } else {
                    assert!(w[1].is_zero());
                }
            }
        }
    }

    #[test]
    fn preimage_of_diagonal() {
        let w = ZMat::from_i64_rows(&[vec![2, 0], vec![0, 3]]);
        let l = preimage_lattice(&w);
        assert_eq!(l.den, BigInt::from(6));
        assert_eq!(l.basis, ZMat::from_i64_rows(&[vec![3, 0], vec![0, 2]]));
    }

    #[test]
    fn preimage_covolume_and_rows_integral() {
        let mut rng = crate::rng::sample_rng(10, crate::rng::domains::PROPERTY, 0);
        for _ in 0..20 {
            let w = random_mat(&mut rng, 3, 3, 6);
            if w.det().is_zero() {
                continue;
            }
            let l = preimage_lattice(&w);
            let q = l.to_qmat().mul(&QMat::from_zmat(&w));
            for e in &q.a {
                assert!(e.is_integer());
            }
            // covol = 1 / |det w| and the standard lattice is contained.
            let expect = BigRational::new(BigInt::one(), w.det().abs());
            assert_eq!(l.covolume_q(), expect);
            assert!(l.contains_lattice(&QLattice::standard(3)));
        }
    }

    #[test]
    fn qmat_inverse_roundtrip() {
        let mut rng = crate::rng::sample_rng(11, crate::rng::domains::PROPERTY, 0);
        for _ in 0..20 {
            let m = random_mat(&mut rng, 3, 3, 9);
            if m.det().is_zero() {
                continue;
            }
            let q = QMat::from_zmat(&m);
            let inv = q.inverse().unwrap();
            assert_eq!(q.mul(&inv), QMat::identity(3));
        }
    }

    #[test]
    fn qlattice_sum_intersect_index() {
        let half = QLattice::new(BigInt::from(2), ZMat::identity(2));
        let third = QLattice::new(BigInt::from(3), ZMat::identity(2));
        let s = half.sum(&third);
        assert_eq!(s, QLattice::new(BigInt::from(6), ZMat::identity(2)));
        let i = half.intersect(&third);
        assert_eq!(i, QLattice::standard(2));
        assert_eq!(
            QLattice::standard(2).index_in(&s),
            Some(BigInt::from(36))
        );
        let m = QLattice::new(BigInt::one(), ZMat::from_i64_rows(&[vec![2, 1], vec![1, 2]]));
        assert_eq!(m.index_in(&QLattice::standard(2)), Some(BigInt::from(3)));
        assert_eq!(QLattice::standard(2).index_in(&m), None);
    }

    #[test]
    fn qlattice_membership() {
        let l = QLattice::new(BigInt::from(2), ZMat::from_i64_rows(&[vec![1, 1], vec![0, 4]]));
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert!(l.contains(&[q(1, 2), q(1, 2)]));
        assert!(l.contains(&[q(1, 2), q(5, 2)]));
        assert!(!l.contains(&[q(1, 2), q(1, 1)]));
        assert!(!l.contains(&[q(1, 3), q(1, 3)]));
    }
}
