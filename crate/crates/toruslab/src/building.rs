//! The norm model of the building for PGL_n over Q_p and over R.
//!
//! Apartment and vertex distances, the order Lambda = A ∩ M_n(Z_p) attached
//! to local torus data with its discriminant, unit densities, the distance
//! Delta from the standard vertex to the torus-fixed norm, the local
//! integrals I(N) in both the p-adic and real cases, and a local
//! functional-equation check in the split unramified case.
//!
//! All lattice algebra over Z_p is done exactly in Q localized at p: pivots
//! are chosen by minimal p-valuation and division happens only by ratios of
//! non-negative valuation, so no working-precision digits are ever needed.
//! Precision enters only through Hensel root lifting (eigenvector data for
//! the split distance computations), where the working modulus starts at
//! p^(v_p(disc P) + 10) and doubles, at most three times, whenever a derived
//! valuation comes too close to the modulus.

use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::padic::{hensel_lift_root, inv_mod, qp_splitting, v_p_int, v_p_rat, PlaceEF};
use crate::poly::MonicIntPoly;
use crate::rng::{domains, sample_rng};
use crate::zmat::{QMat, ZMat};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A place of Q: a finite prime or the real place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Finite(u64),
    Real,
}

impl Place {
    /// log of the base of the value group: log p, or 1 at the real place.
    fn log_base(self) -> f64 {
        match self {
            Place::Finite(p) => (p as f64).ln(),
            Place::Real => 1.0,
        }
    }
}

/// A point of a fixed apartment, in exponent coordinates: the norm
/// max_i q^{t_i} |x_i| on the standard basis.  Only the class modulo the
/// all-ones shift is geometrically meaningful.
#[derive(Debug, Clone)]
pub struct ApartmentPoint {
    pub place: Place,
    pub t: Vec<BigRational>,
}

impl ApartmentPoint {
    pub fn new(place: Place, t: Vec<BigRational>) -> Self {
        ApartmentPoint { place, t }
    }

    pub fn from_i64(place: Place, t: &[i64]) -> Self {
        ApartmentPoint { place, t: t.iter().map(|&x| BigRational::from_integer(x.into())).collect() }
    }

    /// Vertices are the points with integral exponents.
    pub fn is_vertex(&self) -> bool {
        self.t.iter().all(|x| x.is_integer())
    }
}

/// Distance between homothety classes of two points of a common apartment:
/// log q * (max_i d_i - min_i d_i) / 2 for the exponent difference d.
pub fn apartment_class_distance(u: &ApartmentPoint, v: &ApartmentPoint) -> Result<f64> {
    if u.place != v.place {
        return Err(Error::invalid("apartment points at different places"));
    }
    if u.t.len() != v.t.len() || u.t.is_empty() {
        return Err(Error::invalid("apartment points of mismatched dimension"));
    }
    let d: Vec<BigRational> = u.t.iter().zip(&v.t).map(|(a, b)| a - b).collect();
    let max = d.iter().max().unwrap();
    let min = d.iter().min().unwrap();
    Ok(u.place.log_base() * (max - min).to_f64().unwrap() / 2.0)
}

fn bigp(p: u64) -> BigInt {
    BigInt::from(p)
}

fn vq(x: &BigRational, p: &BigInt) -> i64 {
    v_p_rat(x, p)
}

/// Exact Smith elimination of a rational matrix over Z localized at p.
///
/// Returns the elementary-divisor exponents (non-decreasing) together with
/// the accumulated column transform E, so that the preimage lattice
/// { c : A c integral at p } equals E * diag(p^{-sigma}) * Z_p^rank.
fn padic_smith(a: &QMat, p: u64) -> Result<(Vec<i64>, QMat)> {
    let pb = bigp(p);
    let (m, n) = (a.nrows, a.ncols);
    let mut w: Vec<Vec<BigRational>> = (0..m).map(|i| a.row(i).to_vec()).collect();
    let mut e: Vec<Vec<BigRational>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()).collect();
    let mut sig = Vec::new();
    for t in 0..m.min(n) {
        // Global minimal-valuation pivot in the remaining minor.
        let mut best: Option<(usize, usize, i64)> = None;
        for i in t..m {
            for j in t..n {
                if !w[i][j].is_zero() {
                    let v = vq(&w[i][j], &pb);
                    if best.map_or(true, |(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((i0, j0, v0)) = best else { break };
        w.swap(t, i0);
        if j0 != t {
            for row in w.iter_mut() {
                row.swap(t, j0);
            }
            for row in e.iter_mut() {
                row.swap(t, j0);
            }
        }
        let piv = w[t][t].clone();
        for j in t + 1..n {
            if w[t][j].is_zero() {
                continue;
            }
            let r = &w[t][j] / &piv;
            for i in 0..m {
                let upd = &w[i][j] - &r * &w[i][t];
                w[i][j] = upd;
            }
            for i in 0..n {
                let upd = &e[i][j] - &r * &e[i][t];
                e[i][j] = upd;
            }
        }
        for i in t + 1..m {
            if w[i][t].is_zero() {
                continue;
            }
            let r = &w[i][t] / &piv;
            for j in 0..n {
                let upd = &w[i][j] - &r * &w[t][j];
                w[i][j] = upd;
            }
        }
        sig.push(v0);
    }
    let emat = QMat::from_fn(n, n, |i, j| e[i][j].clone());
    Ok((sig, emat))
}

/// Elementary-divisor exponents of an invertible rational matrix over Z_p,
/// sorted non-decreasing.
pub fn elementary_exponents(g: &QMat, p: u64) -> Result<Vec<i64>> {
    if g.nrows != g.ncols {
        return Err(Error::invalid("elementary divisors need a square matrix"));
    }
    if g.det().is_zero() {
        return Err(Error::invalid("elementary divisors need an invertible matrix"));
    }
    let (mut sig, _) = padic_smith(g, p)?;
    sig.sort_unstable();
    Ok(sig)
}

/// Distance in the building between the standard vertex and its translate
/// by g: half the p-valuation spread of the elementary divisors, times log p.
pub fn vertex_distance(g: &QMat, p: u64) -> Result<f64> {
    let sig = elementary_exponents(g, p)?;
    let spread = sig[sig.len() - 1] - sig[0];
    Ok((p as f64).ln() * spread as f64 / 2.0)
}

/// Local torus data: an etale algebra A = Q_p[M] inside M_n(Q_p), presented
/// by a rational matrix with separable integral characteristic polynomial.
#[derive(Debug, Clone)]
pub struct LocalTorusData {
    pub p: u64,
    pub mat: QMat,
    pub poly: MonicIntPoly,
    /// Hensel working exponent: v_p(disc P) + 10.
    pub prec: u32,
}

fn qmat_trace(m: &QMat) -> BigRational {
    let mut s = BigRational::zero();
    for i in 0..m.nrows {
        s += m.at(i, i).clone();
    }
    s
}

/// Characteristic polynomial of a 2x2 or 3x3 rational matrix, which must
/// have integer coefficients for the p-adic machinery downstream.
fn charpoly(m: &QMat) -> Result<MonicIntPoly> {
    let n = m.nrows;
    let tr = qmat_trace(m);
    let det = m.det();
    let coeffs: Vec<BigRational> = match n {
        2 => vec![det, -tr],
        3 => {
            let mm = m.mul(m);
            let s2 = (&tr * &tr - qmat_trace(&mm)) / BigRational::from_integer(2.into());
            vec![-det, s2, -tr]
        }
        _ => return Err(Error::invalid("local torus data limited to n = 2, 3")),
    };
    let mut out = Vec::with_capacity(n + 1);
    for c in &coeffs {
        if !c.is_integer() {
            return Err(Error::invalid("characteristic polynomial is not integral"));
        }
        out.push(c.to_integer());
    }
    out.push(BigInt::one());
    MonicIntPoly::new(out)
}

/// Build local torus data from a matrix, checking separability and fixing
/// the Hensel working precision.
pub fn local_torus_data(p: u64, mat: QMat) -> Result<LocalTorusData> {
    if mat.nrows != mat.ncols {
        return Err(Error::invalid("local torus data needs a square matrix"));
    }
    let poly = charpoly(&mat)?;
    let disc = poly.disc();
    if disc.is_zero() {
        return Err(Error::invalid("characteristic polynomial is not separable"));
    }
    let prec = v_p_int(&disc, &bigp(p)) + 10;
    Ok(LocalTorusData { p, mat, poly, prec })
}

/// Factorization shape of A over Q_p: the canonical norm is the max of the
/// normalized absolute values over the factor fields, with value group
/// (1/e_i) Z at each place.
#[derive(Debug, Clone)]
pub struct CanonicalNorm {
    pub places: Vec<PlaceEF>,
    pub split: bool,
    pub unramified: bool,
}

pub fn canonical_norm(data: &LocalTorusData) -> Result<CanonicalNorm> {
    let places = qp_splitting(&data.poly, data.p)?;
    let n: u32 = places.iter().map(|pl| pl.e * pl.f).sum();
    debug_assert_eq!(n as usize, data.poly.degree());
    let split = places.len() == data.poly.degree();
    let unramified = places.iter().all(|pl| pl.e == 1);
    Ok(CanonicalNorm { places, split, unramified })
}

/// The order Lambda = A ∩ M_n(Z_p), with a Z_p-basis expressed both as
/// matrices and in power-basis coordinates, and its discriminant exponent.
#[derive(Debug, Clone)]
pub struct LambdaOrder {
    pub p: u64,
    /// Columns are power-basis coordinates of the basis elements.
    pub coords: QMat,
    pub basis: Vec<QMat>,
    /// disc(D) = p^disc_exp per the normalized rule
    /// |(2n)^(1-n) det(tr f_i f_j)^(-1)|.
    pub disc_exp: i64,
}

impl LambdaOrder {
    pub fn disc_d(&self) -> f64 {
        (self.p as f64).powi(self.disc_exp as i32)
    }
}

fn matrix_powers(m: &QMat) -> Vec<QMat> {
    let n = m.nrows;
    let mut out = vec![QMat::identity(n)];
    for _ in 1..n {
        out.push(out.last().unwrap().mul(m));
    }
    out
}

/// Compute Lambda by intersecting the span of the matrix powers with the
/// integral matrices: the preimage lattice of the coefficient map.
pub fn lambda_order(data: &LocalTorusData) -> Result<LambdaOrder> {
    let n = data.mat.nrows;
    let pb = bigp(data.p);
    let powers = matrix_powers(&data.mat);
    let flat = QMat::from_fn(n * n, n, |rc, j| powers[j].at(rc / n, rc % n).clone());
    let (sig, e) = padic_smith(&flat, data.p)?;
    if sig.len() != n {
        return Err(Error::invalid("matrix powers are linearly dependent"));
    }
    let coords = QMat::from_fn(n, n, |i, j| {
        let scale = BigRational::from_integer(pb.pow(sig[j].unsigned_abs() as u32));
        let col = e.at(i, j).clone();
        if sig[j] >= 0 {
            col / scale
        } else {
            col * scale
        }
    });
    let mut basis = Vec::with_capacity(n);
    for j in 0..n {
        let mut b = QMat::zero(n, n);
        for k in 0..n {
            let c = coords.at(k, j).clone();
            for r in 0..n {
                for s in 0..n {
                    let upd = b.at(r, s).clone() + &c * powers[k].at(r, s);
                    *b.at_mut(r, s) = upd;
                }
            }
        }
        for r in 0..n {
            for s in 0..n {
                if !b.at(r, s).is_zero() && vq(b.at(r, s), &pb) < 0 {
                    return Err(Error::invalid("computed basis is not p-integral"));
                }
            }
        }
        basis.push(b);
    }
    let gram = QMat::from_fn(n, n, |i, j| qmat_trace(&basis[i].mul(&basis[j])));
    let gdet = gram.det();
    if gdet.is_zero() {
        return Err(Error::invalid("degenerate trace form on the order"));
    }
    let two_n = BigInt::from(2 * n as u64);
    let disc_exp = vq(&gdet, &pb) + (n as i64 - 1) * v_p_int(&two_n, &pb) as i64;
    Ok(LambdaOrder { p: data.p, coords, basis, disc_exp })
}

/// p-exponent of the absolute discriminant of the etale algebra A, by the
/// tame conductor-discriminant rule sum (e_i - 1) f_i per place.
pub fn algebra_disc_exp(data: &LocalTorusData) -> Result<i64> {
    let places = qp_splitting(&data.poly, data.p)?;
    let mut exp = 0i64;
    for pl in &places {
        if pl.e as u64 % data.p == 0 {
            return Err(Error::invalid("wild ramification is out of scope here"));
        }
        exp += (pl.e as i64 - 1) * pl.f as i64;
    }
    Ok(exp)
}

/// Exponent of [Lambda* : Lambda] computed through the power-basis trace
/// pairing, independently of the Gram determinant used for disc_exp.
pub fn dual_index_exp(data: &LocalTorusData, lam: &LambdaOrder) -> Result<i64> {
    let n = data.mat.nrows;
    let pb = bigp(data.p);
    let powers = matrix_powers(&data.mat);
    // T[i][j] = tr(M^j lam_i); Lambda* = T^{-1} Z_p^n in power coordinates.
    let t = QMat::from_fn(n, n, |i, j| qmat_trace(&powers[j].mul(&lam.basis[i])));
    let x = t.mul(&lam.coords);
    for i in 0..n {
        for j in 0..n {
            if !x.at(i, j).is_zero() && vq(x.at(i, j), &pb) < 0 {
                return Err(Error::invalid("order does not sit inside its trace dual"));
            }
        }
    }
    let d = x.det();
    if d.is_zero() {
        return Err(Error::invalid("degenerate trace pairing"));
    }
    Ok(vq(&d, &pb))
}

fn polymul_mod(a: &[BigRational], b: &[BigRational], poly: &MonicIntPoly) -> Vec<BigRational> {
    let n = poly.degree();
    let mut full = vec![BigRational::zero(); 2 * n - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            full[i + j] += ai * bj;
        }
    }
    for d in (n..2 * n - 1).rev() {
        let lead = std::mem::replace(&mut full[d], BigRational::zero());
        if lead.is_zero() {
            continue;
        }
        for k in 0..n {
            let c = BigRational::from_integer(poly.coeff(k));
            full[d - n + k] -= &lead * c;
        }
    }
    full.truncate(n);
    full
}

fn rat_mod_p(x: &BigRational, p: u64) -> u64 {
    let pb = bigp(p);
    let num = x.numer().mod_floor(&pb);
    let den = x.denom().mod_floor(&pb);
    let inv = inv_mod(&den, &pb).expect("denominator prime to p");
    (num * inv).mod_floor(&pb).to_u64().unwrap()
}

fn det_mod_p(m: &[Vec<u64>], p: u64) -> u64 {
    match m.len() {
        2 => (m[0][0] * m[1][1] % p + p * p - m[0][1] * m[1][0] % p) % p,
        3 => {
            let pos = m[0][0] * (m[1][1] * m[2][2] % p) % p
                + m[0][1] * (m[1][2] * m[2][0] % p) % p
                + m[0][2] * (m[1][0] * m[2][1] % p) % p;
            let neg = m[0][0] * (m[1][2] * m[2][1] % p) % p
                + m[0][1] * (m[1][0] * m[2][2] % p) % p
                + m[0][2] * (m[1][1] * m[2][0] % p) % p;
            (pos % p + p - neg % p) % p
        }
        _ => unreachable!(),
    }
}

/// Unit density of Lambda inside the maximal order, with the lower bound
/// max(1 - n/p, p^{-n}) (disc_D / disc_A)^{-1/2} that it must satisfy when
/// the residue characteristic exceeds n.
#[derive(Debug, Clone, Copy)]
pub struct UnitDensity {
    pub density: f64,
    pub lower_bound: f64,
    /// Whether the lower bound is unconditional (p > n).
    pub bound_applies: bool,
}

/// vol(Lambda^x) / vol(O_A^x): invertibility in a p-adically complete order
/// is decided modulo p, so the density is an exact residue count divided by
/// the index and the residue count of the maximal order.
pub fn unit_density(data: &LocalTorusData) -> Result<UnitDensity> {
    let n = data.mat.nrows;
    let p = data.p;
    let lam = lambda_order(data)?;
    let places = qp_splitting(&data.poly, data.p)?;
    let cinv = lam
        .coords
        .inverse()
        .ok_or_else(|| Error::invalid("degenerate order coordinates"))?;
    // Structure constants of Lambda mod p via power-basis multiplication.
    let cols: Vec<Vec<BigRational>> =
        (0..n).map(|j| (0..n).map(|i| lam.coords.at(i, j).clone()).collect()).collect();
    let mut gamma = vec![vec![vec![0u64; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            let prod = polymul_mod(&cols[i], &cols[j], &data.poly);
            let d = row_solve(&cinv, &prod);
            for (k, dk) in d.iter().enumerate() {
                if !dk.is_zero() && vq(dk, &bigp(p)) < 0 {
                    return Err(Error::invalid("order is not multiplicatively closed"));
                }
                gamma[i][j][k] = rat_mod_p(dk, p);
            }
        }
    }
    // Count residues of Lambda/p Lambda acting invertibly.
    let total = (p as u64).pow(n as u32);
    let mut units = 0u64;
    let mut c = vec![0u64; n];
    for idx in 0..total {
        let mut rem = idx;
        for ck in c.iter_mut() {
            *ck = rem % p;
            rem /= p;
        }
        let mut action = vec![vec![0u64; n]; n];
        for (i, &ci) in c.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    action[k][j] = (action[k][j] + ci * gamma[i][j][k]) % p;
                }
            }
        }
        if det_mod_p(&action, p) != 0 {
            units += 1;
        }
    }
    let lam_frac = units as f64 / total as f64;
    let oa_frac: f64 = places.iter().map(|pl| 1.0 - (p as f64).powi(-(pl.f as i32))).product();
    let a_exp = algebra_disc_exp(data)?;
    let gram_exp = lam.disc_exp - (n as i64 - 1) * v_p_int(&BigInt::from(2 * n as u64), &bigp(p)) as i64;
    let diff = gram_exp - a_exp;
    if diff < 0 || diff % 2 != 0 {
        return Err(Error::invalid("inconsistent discriminant exponents"));
    }
    let index = (p as f64).powi((diff / 2) as i32);
    let density = lam_frac / (index * oa_frac);
    let pn = p as f64;
    let nn = n as f64;
    let lower_bound = (1.0 - nn / pn).max(pn.powi(-(n as i32)))
        * (pn.powi(lam.disc_exp as i32) / pn.powi(a_exp as i32)).powf(-0.5);
    Ok(UnitDensity { density, lower_bound, bound_applies: p > n as u64 })
}

fn row_solve(cinv: &QMat, w: &[BigRational]) -> Vec<BigRational> {
    (0..cinv.nrows)
        .map(|i| (0..cinv.ncols).map(|j| cinv.at(i, j) * &w[j]).sum())
        .collect()
}

/// Eigenvector matrix of split data modulo p^k, columns normalized to have
/// a p-unit entry.  Also returns the number of digits that remain reliable.
fn split_eigenvectors(data: &LocalTorusData, k: u32) -> Result<(QMat, u32)> {
    let n = data.mat.nrows;
    let p = data.p;
    let pb = bigp(p);
    let mut roots = Vec::new();
    for r in 0..p {
        if data.poly.eval_z(&BigInt::from(r)).mod_floor(&pb).is_zero() {
            roots.push(BigInt::from(r));
        }
    }
    if roots.len() != n {
        return Err(Error::invalid(
            "split eigenvalue computation needs n distinct roots mod p",
        ));
    }
    let modulus = pb.pow(k);
    let (den, zm) = data.mat.clear_denoms();
    let mut lost = 0u32;
    let mut cols: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for r0 in &roots {
        let root = hensel_lift_root(&data.poly, &pb, r0, k)?;
        let shifted = ZMat::from_fn(n, n, |i, j| {
            let mut x = zm.at(i, j).clone();
            if i == j {
                x -= &den * &root;
            }
            x.mod_floor(&modulus)
        });
        let adj = shifted.adjugate();
        let mut best: Option<(usize, u32)> = None;
        for j in 0..n {
            let mv = (0..n)
                .map(|i| {
                    let e = adj.at(i, j).mod_floor(&modulus);
                    if e.is_zero() {
                        k
                    } else {
                        v_p_int(&e, &pb).min(k)
                    }
                })
                .min()
                .unwrap();
            if best.map_or(true, |(_, bm)| mv < bm) {
                best = Some((j, mv));
            }
        }
        let (jbest, shift) = best.unwrap();
        if shift + 8 >= k {
            return Err(Error::nonconv("eigenvector lost too many digits"));
        }
        lost = lost.max(shift);
        let scale = pb.pow(shift);
        let col: Vec<BigInt> = (0..n)
            .map(|i| (adj.at(i, jbest).mod_floor(&modulus) / &scale).mod_floor(&pb.pow(k - shift)))
            .collect();
        cols.push(col);
    }
    let v = QMat::from_fn(n, n, |i, j| BigRational::from_integer(cols[j][i].clone()));
    Ok((v, k.saturating_sub(lost + 5)))
}

/// Delta = inf over t in A^x of the distance from the standard vertex to
/// the translate of the torus-fixed point, for split data: minimized over
/// integer scalings of the eigenbasis within a box of radius
/// 2 v_p(disc_D) + n.
pub fn delta_distance(data: &LocalTorusData) -> Result<f64> {
    let norm = canonical_norm(data)?;
    if !norm.split {
        return Err(Error::invalid("delta distance implemented for split data"));
    }
    let n = data.mat.nrows;
    let p = data.p;
    let lam = lambda_order(data)?;
    let radius = (2 * lam.disc_exp.unsigned_abs() + n as u64) as i64;
    let mut k = data.prec;
    for _ in 0..=3 {
        match delta_attempt(data, k, radius) {
            Ok(d) => return Ok(d),
            Err(Error::NonConvergence(_)) => {
                k *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::nonconv(format!(
        "delta distance did not stabilize at p = {p} after precision doubling"
    )))
}

fn delta_attempt(data: &LocalTorusData, k: u32, radius: i64) -> Result<f64> {
    let n = data.mat.nrows;
    let p = data.p;
    let pb = bigp(p);
    let (v, reliable) = split_eigenvectors(data, k)?;
    let vdet = v.det();
    if vdet.is_zero() {
        return Err(Error::nonconv("eigenvector matrix collapsed at this precision"));
    }
    let vdet0 = vq(&vdet, &pb);
    let mut best: Option<i64> = None;
    let count = (radius as u64 + 1).pow(n as u32);
    for idx in 0..count {
        let mut rem = idx;
        let mut s = vec![0i64; n];
        for sj in s.iter_mut() {
            *sj = (rem % (radius as u64 + 1)) as i64;
            rem /= radius as u64 + 1;
        }
        if s.iter().min() != Some(&0) {
            continue;
        }
        // Columns are normalized to minimal valuation 0, so the smallest
        // elementary divisor is p^0 and the spread is at least the average
        // exponent v_p(det) / n: skip scalings that cannot improve.
        let sum_s: i64 = s.iter().sum();
        let floor_spread = (vdet0 + sum_s + n as i64 - 1).div_euclid(n as i64);
        if best.is_some_and(|b| floor_spread >= b) {
            continue;
        }
        let w = QMat::from_fn(n, n, |i, j| {
            v.at(i, j) * BigRational::from_integer(pb.pow(s[j] as u32))
        });
        if w.det().is_zero() {
            continue;
        }
        let sig = elementary_exponents(&w, p)?;
        if *sig.last().unwrap() >= reliable as i64 {
            return Err(Error::nonconv("elementary divisors exceed reliable digits"));
        }
        let spread = sig[n - 1] - sig[0];
        if best.map_or(true, |b| spread < b) {
            best = Some(spread);
        }
    }
    let spread = best.ok_or_else(|| Error::invalid("empty scaling box"))?;
    Ok((p as f64).ln() * spread as f64 / 2.0)
}

/// Closed form of the local integral I(N_t) at a split vertex norm with
/// exponents t: the valuation-orthant geometric series evaluates to
/// [(1 - p^{-1}) / (1 - p^{-3/2})]^n * p^{-sum t_i}.
pub fn padic_local_integral(p: u64, n: usize, t: &[i64]) -> f64 {
    let pf = p as f64;
    let factor = (1.0 - 1.0 / pf) / (1.0 - pf.powf(-1.5));
    let sum: i64 = t.iter().sum();
    factor.powi(n as i32) * pf.powi(-(sum as i32))
}

/// The same integral by direct summation over valuation orthants,
/// truncated at valuation kmax; the oracle for the closed form.
pub fn padic_local_integral_direct(p: u64, n: usize, t: &[i64], kmax: i64) -> f64 {
    let pf = p as f64;
    let mut per_axis = Vec::with_capacity(n);
    for &ti in t.iter().take(n) {
        let mut s = 0.0;
        for kv in ti..=kmax {
            // vol(v = k) * |x|^{1/2} = p^{-k}(1 - 1/p) * p^{-k/2}.
            s += pf.powf(-1.5 * kv as f64) * (1.0 - 1.0 / pf);
        }
        per_axis.push(s);
    }
    let num: f64 = per_axis.iter().product();
    let vol: f64 = t.iter().map(|&ti| pf.powi(-(ti as i32))).product();
    num / vol.sqrt()
}

/// Fitted slope of log I(N_r) along the ray t = (r, 0, ..., 0).
pub fn padic_ray_slope(p: u64, n: usize, rmax: i64) -> f64 {
    let pts: Vec<(f64, f64)> = (0..=rmax)
        .map(|r| {
            let mut t = vec![0i64; n];
            t[0] = r;
            (r as f64, padic_local_integral(p, n, &t).ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

/// Monte Carlo value of the real local integral.
#[derive(Debug, Clone, Copy)]
pub struct RealIntegral {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
}

fn minors_positive(g: &[Vec<f64>]) -> bool {
    match g.len() {
        2 => g[0][0] > 0.0 && g[0][0] * g[1][1] - g[0][1] * g[1][0] > 0.0,
        3 => {
            let d2 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            g[0][0] > 0.0 && d2 > 0.0 && det3(g) > 0.0
        }
        _ => false,
    }
}

fn det3(g: &[Vec<f64>]) -> f64 {
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}

fn inverse_diag(g: &[Vec<f64>]) -> Vec<f64> {
    let n = g.len();
    if n == 2 {
        let d = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        vec![g[1][1] / d, g[0][0] / d]
    } else {
        let d = det3(g);
        (0..3)
            .map(|i| {
                let (a, b) = ((i + 1) % 3, (i + 2) % 3);
                (g[a][a] * g[b][b] - g[a][b] * g[b][a]) / d
            })
            .collect()
    }
}

/// I(Q) = integral of |x_1 ... x_n|^{-1/2} over Q <= 1, divided by
/// vol(Q <= 1)^{1/2}, for a positive definite Gram matrix.  The substitution
/// x_i = sign_i u_i^2 removes the singularity; sampling is stratified over
/// the 2^n sign orthants with a 1% relative-error target.
pub fn real_local_integral(gram: &[Vec<f64>], seed: u64) -> Result<RealIntegral> {
    let n = gram.len();
    if !(n == 2 || n == 3) || gram.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("real local integral needs a 2x2 or 3x3 Gram matrix"));
    }
    if !minors_positive(gram) {
        return Err(Error::invalid("Gram matrix is not positive definite"));
    }
    let det = if n == 2 { gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0] } else { det3(gram) };
    let vol = if n == 2 { std::f64::consts::PI } else { 4.0 * std::f64::consts::PI / 3.0 } / det.sqrt();
    let ubox: Vec<f64> = inverse_diag(gram).iter().map(|d| d.powf(0.25)).collect();
    let boxvol: f64 = ubox.iter().product();
    let orthants = 1usize << n;
    let weight = (1u64 << n) as f64 * boxvol;
    let mut rngs: Vec<ChaCha8Rng> =
        (0..orthants).map(|o| sample_rng(seed, domains::REAL_INTEGRAL, o as u64)).collect();
    let mut hits = vec![0u64; orthants];
    let mut draws = vec![0u64; orthants];
    let mut chunk = 4096u64;
    loop {
        for o in 0..orthants {
            let rng = &mut rngs[o];
            let mut x = vec![0.0f64; n];
            for _ in 0..chunk {
                for (i, xi) in x.iter_mut().enumerate() {
                    let u = rng.gen::<f64>() * ubox[i];
                    let sq = u * u;
                    *xi = if o >> i & 1 == 1 { -sq } else { sq };
                }
                let mut q = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        q += gram[i][j] * x[i] * x[j];
                    }
                }
                if q <= 1.0 {
                    hits[o] += 1;
                }
            }
            draws[o] += chunk;
        }
        let mut value = 0.0;
        let mut var = 0.0;
        for o in 0..orthants {
            let m = draws[o] as f64;
            let ph = hits[o] as f64 / m;
            value += weight * ph;
            let pt = (hits[o] as f64 + 1.0) / (m + 2.0);
            var += weight * weight * pt * (1.0 - pt) / m;
        }
        let stderr = var.sqrt();
        let total: u64 = draws.iter().sum();
        if value > 0.0 && stderr <= 0.005 * value {
            return Ok(RealIntegral {
                value: value / vol.sqrt(),
                stderr: stderr / vol.sqrt(),
                samples: total,
            });
        }
        if draws[0] >= 1 << 21 {
            if value > 0.0 && stderr <= 0.01 * value {
                return Ok(RealIntegral {
                    value: value / vol.sqrt(),
                    stderr: stderr / vol.sqrt(),
                    samples: total,
                });
            }
            return Err(Error::nonconv("real local integral failed to reach 1% error"));
        }
        chunk *= 2;
    }
}

/// Count of spread classes: vectors in Z^n modulo the diagonal with
/// min = 0 and max = s.
pub fn spread_class_count(n: usize, s: i64) -> i64 {
    if s == 0 {
        return 1;
    }
    let pow = |b: i64, e: u32| b.pow(e);
    (pow(s + 1, n as u32) - 2 * pow(s, n as u32) + pow(s - 1, n as u32)).max(0)
}

/// Census of (1 + R, class count) over unit bins of log||t|| up to
/// R <= 20 log p, split case: the input to the polynomial-growth fit.
pub fn spread_census(n: usize, p: u64) -> Vec<(f64, f64)> {
    let logp = (p as f64).ln();
    let rmax = (20.0 * logp).ceil() as i64;
    (0..rmax)
        .map(|rb| {
            let mut count = 0i64;
            let mut s = 0i64;
            loop {
                let l = s as f64 * logp;
                if l >= (rb + 1) as f64 {
                    break;
                }
                if l >= rb as f64 {
                    count += spread_class_count(n, s);
                }
                s += 1;
            }
            (1.0 + rb as f64, count as f64)
        })
        .collect()
}

/// Fitted growth exponent of the spread census against 1 + R.
pub fn spread_census_exponent(n: usize, p: u64, seed: u64) -> Result<f64> {
    let pts = spread_census(n, p);
    Ok(loglog_fit(&pts, seed)?.slope)
}

/// Result of the local functional-equation check.
#[derive(Debug, Clone, Copy)]
pub struct TateCheck {
    /// Largest deviation between the two normalized zeta quotients, over
    /// the grid and over both test functions.
    pub quotient_dev: f64,
    /// Largest | |epsilon| - 1 | on the critical line.
    pub eps_dev: f64,
    /// Largest closed-form vs truncated-series deviation (Re s > 1).
    pub series_dev: f64,
    /// Largest deviation of the finite character sums computing the
    /// Fourier transform of the unit-ball indicator.
    pub fourier_dev: f64,
}

/// The standard ten-point grid: five points of absolute convergence and
/// five on the critical line.
pub fn tate_grid() -> Vec<Complex64> {
    vec![
        Complex64::new(2.0, 0.0),
        Complex64::new(3.0, 0.0),
        Complex64::new(1.5, 0.5),
        Complex64::new(2.0, 3.0),
        Complex64::new(1.25, -1.5),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.5, 1.0),
        Complex64::new(0.5, -2.0),
        Complex64::new(0.5, 4.0),
        Complex64::new(0.5, 0.25),
    ]
}

fn geom(t: Complex64) -> Complex64 {
    Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - t)
}

fn geom_series(t: Complex64, from: i64) -> Complex64 {
    let mut term = t.powi(from as i32);
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..5000 {
        sum += term;
        term *= t;
        if term.norm() < 1e-18 * sum.norm().max(1.0) {
            break;
        }
    }
    sum
}

/// Local functional equation for split unramified data with unramified
/// twists: the normalized quotients Z(Phi, s)/L(s) and
/// Z(Phi-hat, 1-s)/L(1-s) are compared as closed rational functions of
/// p^{-s} for two test functions, the defining series are re-summed where
/// they converge, the Fourier transform of the unit ball is verified by
/// finite character sums, and |epsilon| is checked on the critical line.
pub fn tate_local_check(p: u64, n: usize, grid: &[Complex64]) -> Result<TateCheck> {
    if !(n == 2 || n == 3) {
        return Err(Error::invalid("functional equation check limited to n = 2, 3"));
    }
    let lp = (p as f64).ln();
    let pf = p as f64;
    let mut quotient_dev: f64 = 0.0;
    let mut eps_dev: f64 = 0.0;
    let mut series_dev: f64 = 0.0;
    for &s in grid {
        let t = (-s * lp).exp();
        let u = (-(Complex64::new(1.0, 0.0) - s) * lp).exp();
        if (Complex64::new(1.0, 0.0) - t).norm() < 1e-6 || (Complex64::new(1.0, 0.0) - u).norm() < 1e-6 {
            return Err(Error::invalid("grid point too close to a pole"));
        }
        // Phi0 = indicator of O_A; Phi0-hat = Phi0.
        let l_s = geom(t).powi(n as i32);
        let l_1s = geom(u).powi(n as i32);
        let q0 = l_s / l_s;
        let r0 = l_1s / l_1s;
        // Phi1 = indicator of pZ_p x Z_p^{n-1}; Phi1-hat scales by 1/p and
        // dilates the first coordinate to p^{-1} Z_p.
        let z1 = t * geom(t).powi(n as i32);
        let z1hat = geom(u).powi(n as i32) / (pf * u);
        let q1 = z1 / l_s;
        let r1 = z1hat / l_1s;
        quotient_dev = quotient_dev.max((q0 - r0).norm()).max((q1 - r1).norm());
        // The epsilon factor must not depend on the test function.
        quotient_dev = quotient_dev.max((r1 / q1 - r0 / q0).norm());
        if s.re > 1.0 {
            let direct0 = geom_series(t, 0).powi(n as i32);
            let dev0 = (direct0 - l_s).norm() / l_s.norm();
            let direct1 = geom_series(t, 1) * geom_series(t, 0).powi(n as i32 - 1);
            let dev1 = (direct1 - z1).norm() / z1.norm();
            series_dev = series_dev.max(dev0).max(dev1);
        }
        if (s.re - 0.5).abs() < 1e-9 {
            let eps = r0 / q0;
            eps_dev = eps_dev.max((eps.norm() - 1.0).abs());
        }
    }
    // Fourier transform of 1_{Z_p} at x of valuation v: 1 for v >= 0 and 0
    // for v < 0, the latter by exact cancellation of p^{-v}-th roots of
    // unity.
    let mut fourier_dev: f64 = 0.0;
    for v in -3i64..=2 {
        let expect = if v >= 0 { 1.0 } else { 0.0 };
        let m = if v >= 0 { 1 } else { (p as i64).pow((-v) as u32) };
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..m {
            let phase = 2.0 * std::f64::consts::PI * (j as f64) * pf.powi(v as i32);
            sum += Complex64::new(phase.cos(), phase.sin());
        }
        fourier_dev = fourier_dev.max((sum / m as f64 - expect).norm());
    }
    Ok(TateCheck { quotient_dev, eps_dev, series_dev, fourier_dev })
}

/// A randomly generated split datum: M = g D g^{-1} with distinct integer
/// eigenvalues mod p and a conjugator g = U1 diag(p^{a_i}) U2 built from
/// unimodular elementary operations.
#[derive(Debug, Clone)]
pub struct SplitDatum {
    pub data: LocalTorusData,
    pub conj: QMat,
    pub eigs: Vec<i64>,
}

fn random_unimodular(n: usize, rng: &mut ChaCha8Rng) -> QMat {
    let mut m = QMat::identity(n);
    for _ in 0..5 {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        if i == j {
            j = (j + 1) % n;
        }
        let c = BigRational::from_integer(rng.gen_range(-2i64..=2).into());
        for k in 0..n {
            let upd = m.at(j, k).clone() + &c * m.at(i, k);
            *m.at_mut(j, k) = upd;
        }
    }
    m
}

pub fn random_split_datum(p: u64, n: usize, rng: &mut ChaCha8Rng) -> Result<SplitDatum> {
    let mut eigs: Vec<i64> = Vec::new();
    while eigs.len() < n {
        let c = rng.gen_range(0..p as i64);
        if eigs.iter().all(|&e| (e - c).rem_euclid(p as i64) != 0) {
            eigs.push(c);
        }
    }
    let u1 = random_unimodular(n, rng);
    let u2 = random_unimodular(n, rng);
    let scale = QMat::from_fn(n, n, |i, j| {
        if i == j {
            BigRational::from_integer(bigp(p).pow(rng.gen_range(0..=2u32)))
        } else {
            BigRational::zero()
        }
    });
    let g = u1.mul(&scale).mul(&u2);
    let ginv = g.inverse().ok_or_else(|| Error::invalid("degenerate conjugator"))?;
    let d = QMat::from_fn(n, n, |i, j| {
        if i == j {
            BigRational::from_integer(eigs[i].into())
        } else {
            BigRational::zero()
        }
    });
    let m = g.mul(&d).mul(&ginv);
    Ok(SplitDatum { data: local_torus_data(p, m)?, conj: g, eigs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domains, sample_rng};

    fn qm(rows: &[&[i64]]) -> QMat {
        QMat::from_fn(rows.len(), rows[0].len(), |i, j| {
            BigRational::from_integer(rows[i][j].into())
        })
    }

    /// The conjugated companion matrix of x^2 - x - 1: diag(1,p)-conjugation
    /// pushes the order away from the maximal one.
    fn conjugated_golden(p: u64) -> LocalTorusData {
        let m = QMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => BigRational::new(1.into(), (p as i64).into()),
            (1, 0) => BigRational::from_integer((p as i64).into()),
            (1, 1) => BigRational::one(),
            _ => BigRational::zero(),
        });
        local_torus_data(p, m).unwrap()
    }

    #[test]
    fn apartment_distance_basics() {
        let p = Place::Finite(7);
        let u = ApartmentPoint::from_i64(p, &[0, 0, 0]);
        let v = ApartmentPoint::from_i64(p, &[1, 0, 0]);
        let d = apartment_class_distance(&u, &v).unwrap();
        assert!((d - 0.5 * 7f64.ln()).abs() < 1e-15);
        // Shift invariance: translating by the diagonal fixes the class.
        let w = ApartmentPoint::from_i64(p, &[4, 3, 3]);
        assert_eq!(apartment_class_distance(&w, &u).unwrap(), d);
        assert_eq!(apartment_class_distance(&w, &v).unwrap(), 0.0);
        // Real place uses base e.
        let a = ApartmentPoint::from_i64(Place::Real, &[2, 0]);
        let b = ApartmentPoint::from_i64(Place::Real, &[0, 0]);
        assert!((apartment_class_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!(apartment_class_distance(&u, &a).is_err());
    }

    #[test]
    fn apartment_triangle_inequality_holds() {
        let mut rng = sample_rng(11, domains::PROPERTY, 0);
        let place = Place::Finite(5);
        for _ in 0..1000 {
            let pts: Vec<ApartmentPoint> = (0..3)
                .map(|_| {
                    let t: Vec<i64> = (0..3).map(|_| rng.gen_range(-9..=9)).collect();
                    ApartmentPoint::from_i64(place, &t)
                })
                .collect();
            let duv = apartment_class_distance(&pts[0], &pts[1]).unwrap();
            let dvw = apartment_class_distance(&pts[1], &pts[2]).unwrap();
            let duw = apartment_class_distance(&pts[0], &pts[2]).unwrap();
            assert!(duw <= duv + dvw + 1e-12);
        }
    }

    #[test]
    fn vertex_distance_matches_apartment_route() {
        assert_eq!(vertex_distance(&QMat::identity(3), 5).unwrap(), 0.0);
        let d = vertex_distance(&qm(&[&[1, 0], &[0, 7]]), 7).unwrap();
        assert!((d - 0.5 * 7f64.ln()).abs() < 1e-15);
        // U1 diag(p^a) U2 must land at the apartment distance of a from 0.
        let mut rng = sample_rng(3, domains::PROPERTY, 1);
        for _ in 0..25 {
            let a: Vec<i64> = (0..3).map(|_| rng.gen_range(0..=3)).collect();
            let u1 = random_unimodular(3, &mut rng);
            let u2 = random_unimodular(3, &mut rng);
            let s = QMat::from_fn(3, 3, |i, j| {
                if i == j {
                    BigRational::from_integer(BigInt::from(5u64).pow(a[i] as u32))
                } else {
                    BigRational::zero()
                }
            });
            let g = u1.mul(&s).mul(&u2);
            let want = apartment_class_distance(
                &ApartmentPoint::from_i64(Place::Finite(5), &a),
                &ApartmentPoint::from_i64(Place::Finite(5), &[0, 0, 0]),
            )
            .unwrap();
            assert!((vertex_distance(&g, 5).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_norm_shapes() {
        let split = local_torus_data(7, qm(&[&[0, 0], &[1, 1]])).unwrap();
        let cn = canonical_norm(&split).unwrap();
        assert!(cn.split && cn.unramified);
        assert_eq!(cn.places.len(), 2);
        // x^2 - x - 1 is inert at 2 (disc 5 = 5 mod 8): unramified field.
        let inert = local_torus_data(2, qm(&[&[0, 1], &[1, 1]])).unwrap();
        let cn = canonical_norm(&inert).unwrap();
        assert!(!cn.split && cn.unramified);
        assert_eq!(cn.places, vec![PlaceEF { e: 1, f: 2 }]);
        // x^2 - p is ramified with value group (1/2) Z.
        let ram = local_torus_data(7, qm(&[&[0, 7], &[1, 0]])).unwrap();
        let cn = canonical_norm(&ram).unwrap();
        assert!(!cn.split && !cn.unramified);
        assert_eq!(cn.places, vec![PlaceEF { e: 2, f: 1 }]);
    }

    #[test]
    fn lambda_order_golden_discriminants() {
        // Split idempotent case: self-dual order, disc 1.
        let d = lambda_order(&local_torus_data(7, qm(&[&[0, 0], &[1, 1]])).unwrap()).unwrap();
        assert_eq!(d.disc_exp, 0);
        // Ramified quadratic x^2 - p: disc exponent 1.
        let d = lambda_order(&local_torus_data(7, qm(&[&[0, 7], &[1, 0]])).unwrap()).unwrap();
        assert_eq!(d.disc_exp, 1);
        // Conjugation by diag(1, p) inflates the discriminant to p^2.
        for p in [7u64, 11, 13] {
            let d = lambda_order(&conjugated_golden(p)).unwrap();
            assert_eq!(d.disc_exp, 2, "p = {p}");
        }
    }

    #[test]
    fn lambda_order_is_a_ring_with_integral_structure() {
        let data = conjugated_golden(11);
        let lam = lambda_order(&data).unwrap();
        let cinv = lam.coords.inverse().unwrap();
        let pb = BigInt::from(11);
        for i in 0..2 {
            for j in 0..2 {
                let a: Vec<BigRational> = (0..2).map(|k| lam.coords.at(k, i).clone()).collect();
                let b: Vec<BigRational> = (0..2).map(|k| lam.coords.at(k, j).clone()).collect();
                let prod = polymul_mod(&a, &b, &data.poly);
                for c in row_solve(&cinv, &prod) {
                    assert!(c.is_zero() || v_p_rat(&c, &pb) >= 0);
                }
            }
        }
    }

    #[test]
    fn local_discriminant_matches_a_global_order() {
        // The order Z[2w], w = sqrt(5), has discriminant 80; the class
        // matrix of its trivial class must reproduce v_5 = 1 locally.
        let m = qm(&[&[0, 1], &[20, 0]]);
        let lam = lambda_order(&local_torus_data(5, m).unwrap()).unwrap();
        assert_eq!(lam.disc_exp, 1);
    }

    #[test]
    fn dual_volume_ratio_equals_local_discriminant() {
        let mut rng = sample_rng(17, domains::PROPERTY, 2);
        for &p in &[5u64, 7, 11, 13] {
            for n in [2usize, 3] {
                for _ in 0..6 {
                    let datum = random_split_datum(p, n, &mut rng).unwrap();
                    let lam = lambda_order(&datum.data).unwrap();
                    let dual = dual_index_exp(&datum.data, &lam).unwrap();
                    assert_eq!(dual, lam.disc_exp, "p = {p}, n = {n}");
                }
            }
        }
    }

    #[test]
    fn unit_density_frozen_values() {
        // Maximal split order: density exactly 1.
        let d = unit_density(&local_torus_data(7, qm(&[&[0, 0], &[1, 1]])).unwrap()).unwrap();
        assert!((d.density - 1.0).abs() < 1e-12);
        // Maximal ramified order: density exactly 1.
        let d = unit_density(&local_torus_data(7, qm(&[&[0, 7], &[1, 0]])).unwrap()).unwrap();
        assert!((d.density - 1.0).abs() < 1e-12);
        // Conjugated golden datum: Lambda/p is the dual numbers over F_p of
        // index p in the maximal order, so the density is 1/(p -+ 1)
        // according to whether 5 is a square mod p.
        for (p, shift) in [(11u64, -1.0), (19, -1.0), (7, 1.0), (13, 1.0)] {
            let d = unit_density(&conjugated_golden(p)).unwrap();
            assert!((d.density - 1.0 / (p as f64 + shift)).abs() < 1e-12, "p = {p}");
            assert!(d.bound_applies && d.density >= d.lower_bound - 1e-12);
        }
    }

    #[test]
    fn unit_density_is_multiplicative_over_blocks() {
        // Direct sum of the conjugated 2-block with a trivial 1-block: the
        // densities multiply (the extra factor is maximal).
        let p = 11u64;
        let m2 = conjugated_golden(p).mat;
        let m3 = QMat::from_fn(3, 3, |i, j| {
            if i < 2 && j < 2 {
                m2.at(i, j).clone()
            } else {
                BigRational::zero()
            }
        });
        let d3 = unit_density(&local_torus_data(p, m3).unwrap()).unwrap();
        let d2 = unit_density(&conjugated_golden(p)).unwrap();
        assert!((d3.density - d2.density).abs() < 1e-12);
    }

    #[test]
    fn unit_density_lower_bound_on_random_split_data() {
        let mut rng = sample_rng(23, domains::PROPERTY, 3);
        for &p in &[5u64, 7, 13] {
            for n in [2usize, 3] {
                for _ in 0..5 {
                    let datum = random_split_datum(p, n, &mut rng).unwrap();
                    let d = unit_density(&datum.data).unwrap();
                    assert!(d.bound_applies);
                    assert!(
                        d.density >= d.lower_bound - 1e-12,
                        "p = {p}, n = {n}: {} < {}",
                        d.density,
                        d.lower_bound
                    );
                }
            }
        }
    }

    #[test]
    fn delta_distance_frozen_values() {
        // Unramified maximal data sits on the vertex: delta 0.
        let d = delta_distance(&local_torus_data(11, qm(&[&[0, 0], &[1, 1]])).unwrap()).unwrap();
        assert_eq!(d, 0.0);
        // 5 is a square mod 11, so the conjugated datum is split there and
        // its fixed point sits at distance (log 11)/2.
        let d = delta_distance(&conjugated_golden(11)).unwrap();
        assert!((d - 0.5 * 11f64.ln()).abs() < 1e-12);
        // Non-split data is rejected.
        assert!(delta_distance(&local_torus_data(7, qm(&[&[0, 7], &[1, 0]])).unwrap()).is_err());
    }

    #[test]
    fn delta_is_conjugation_invariant_and_bounded_below() {
        let mut rng = sample_rng(41, domains::PROPERTY, 4);
        for &p in &[5u64, 7, 11] {
            for n in [2usize, 3] {
                for _ in 0..3 {
                    let datum = random_split_datum(p, n, &mut rng).unwrap();
                    let lam = lambda_order(&datum.data).unwrap();
                    let delta = delta_distance(&datum.data).unwrap();
                    let bound = lam.disc_exp as f64 * (p as f64).ln() / (4.0 * n as f64);
                    assert!(delta >= bound - 1e-9, "p = {p} n = {n}: {delta} < {bound}");
                    // GL_n(Z_p)-conjugation fixes the standard vertex.
                    let u = random_unimodular(n, &mut rng);
                    let m2 = u.mul(&datum.data.mat).mul(&u.inverse().unwrap());
                    let delta2 = delta_distance(&local_torus_data(p, m2).unwrap()).unwrap();
                    assert!((delta - delta2).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn operator_norm_spread_lower_bounds_distance() {
        // For diagonal t the distance between t N_A and N_A, measured by
        // elementary divisors, equals half the log of the norm ratio.
        let mut rng = sample_rng(7, domains::PROPERTY, 5);
        let p = 7u64;
        for _ in 0..500 {
            let mu: Vec<i64> = (0..3).map(|_| rng.gen_range(-6..=6)).collect();
            let shift = *mu.iter().min().unwrap();
            let g = QMat::from_fn(3, 3, |i, j| {
                if i == j {
                    BigRational::from_integer(bigp(p).pow((mu[i] - shift) as u32))
                } else {
                    BigRational::zero()
                }
            });
            let spread = *mu.iter().max().unwrap() - shift;
            let dist = vertex_distance(&g, p).unwrap();
            let half_log_norm = 0.5 * spread as f64 * (p as f64).ln();
            assert!(dist >= half_log_norm - 1e-12);
            assert!((dist - half_log_norm).abs() < 1e-12);
        }
    }

    #[test]
    fn spread_census_grows_polynomially() {
        // Closed-form class counts against brute enumeration.
        for n in [2usize, 3] {
            for s in 0..=5i64 {
                let mut brute = 0i64;
                let width = (s + 1) as u64;
                for idx in 0..width.pow(n as u32) {
                    let mut rem = idx;
                    let mut v = vec![0i64; n];
                    for vi in v.iter_mut() {
                        *vi = (rem % width) as i64;
                        rem /= width;
                    }
                    if v.iter().min() == Some(&0) && v.iter().max() == Some(&s) {
                        brute += 1;
                    }
                }
                assert_eq!(spread_class_count(n, s), brute, "n = {n}, s = {s}");
            }
            let expo = spread_census_exponent(n, 5, 99).unwrap();
            assert!(expo <= n as f64 - 1.0 + 0.2, "n = {n}: exponent {expo}");
        }
    }

    #[test]
    fn padic_integral_closed_form_matches_direct_sum() {
        for (n, t) in [(2usize, vec![0i64, 0]), (2, vec![2, 0]), (3, vec![1, 2, 3])] {
            let a = padic_local_integral(7, n, &t);
            let b = padic_local_integral_direct(7, n, &t, 90);
            assert!((a - b).abs() <= 1e-12 * a.abs(), "t = {t:?}");
        }
        let p = 7f64;
        let frozen = ((1.0 - 1.0 / p) / (1.0 - p.powf(-1.5))).powi(2);
        assert!((padic_local_integral(7, 2, &[0, 0]) - frozen).abs() < 1e-15);
    }

    #[test]
    fn padic_ray_decays_linearly() {
        for n in [2usize, 3] {
            let slope = padic_ray_slope(7, n, 20);
            assert!((slope + 7f64.ln()).abs() < 1e-9, "n = {n}: slope {slope}");
            assert!(slope <= -0.05 * 7f64.ln());
        }
    }

    #[test]
    fn real_integral_golden_values() {
        let g14 = 3.625_609_908_221_908_3_f64;
        let g74 = 0.919_062_526_848_883_2_f64;
        let g32 = 0.886_226_925_452_758_0_f64;
        // Eight times the Dirichlet integral over the positive orthant.
        let oracle3 = g14.powi(3) / g74 / (4.0 * std::f64::consts::PI / 3.0).sqrt();
        let id3 = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let got = real_local_integral(&id3, 5).unwrap();
        assert!((got.value - oracle3).abs() / oracle3 < 0.04, "{} vs {oracle3}", got.value);
        assert!(got.stderr <= 0.011 * got.value);
        let oracle2 = g14.powi(2) / g32 / std::f64::consts::PI.sqrt();
        let id2 = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let got = real_local_integral(&id2, 5).unwrap();
        assert!((got.value - oracle2).abs() / oracle2 < 0.04, "{} vs {oracle2}", got.value);
    }

    #[test]
    fn real_integral_is_dilation_invariant_and_deterministic() {
        let id3 = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let dil = vec![vec![4.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0 / 9.0]];
        let a = real_local_integral(&id3, 9).unwrap();
        let b = real_local_integral(&dil, 9).unwrap();
        assert!((a.value - b.value).abs() <= 4.0 * (a.stderr + b.stderr));
        let c = real_local_integral(&dil, 9).unwrap();
        assert_eq!(b.value.to_bits(), c.value.to_bits());
        assert!(real_local_integral(&vec![vec![1.0, 2.0], vec![2.0, 1.0]], 1).is_err());
    }

    #[test]
    fn functional_equation_checks_out() {
        for n in [2usize, 3] {
            let chk = tate_local_check(7, n, &tate_grid()).unwrap();
            assert!(chk.quotient_dev <= 1e-12, "quotient {}", chk.quotient_dev);
            assert!(chk.eps_dev <= 1e-12, "eps {}", chk.eps_dev);
            assert!(chk.series_dev <= 1e-12, "series {}", chk.series_dev);
            assert!(chk.fourier_dev <= 1e-9, "fourier {}", chk.fourier_dev);
        }
    }
}
