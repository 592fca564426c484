//! Prime and p-adic utilities: factorisation, valuations, finite-field
//! linear algebra, splitting types of quadratics and cubics over Q_p, and
//! Hensel lifting of simple roots.

use crate::error::{Error, Result};
use crate::poly::MonicIntPoly;
use crate::zmat::{xgcd, ZMat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Primes `<= n` by a plain sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut is_comp = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !is_comp[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                is_comp[j] = true;
                j += i;
            }
        }
    }
    primes
}

pub fn modpow_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc: u64 = 1;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = modpow_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho_u64(n: u64, seed: u64) -> Option<u64> {
    let c = 1 + seed % (n - 1);
    let f = |x: u64| (((x as u128 * x as u128) % n as u128 + c as u128) % n as u128) as u64;
    let mut x = 2u64;
    let mut y = 2u64;
    let mut d = 1u64;
    let mut iter = 0u64;
    while d == 1 {
        if iter > 1 << 24 {
            return None;
        }
        iter += 1;
        x = f(x);
        y = f(f(y));
        let diff = x.abs_diff(y);
        if diff == 0 {
            return None;
        }
        d = diff.gcd(&n);
    }
    if d == n {
        None
    } else {
        Some(d)
    }
}

/// Prime factorisation of `n >= 1`, sorted by prime.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1);
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            match out.iter_mut().find(|(p, _)| *p == m) {
                Some((_, e)) => *e += 1,
                None => out.push((m, 1)),
            }
            continue;
        }
        let mut d = None;
        for seed in 1..40 {
            d = pollard_rho_u64(m, seed);
            if d.is_some() {
                break;
            }
        }
        let d = d.expect("pollard rho failed on composite u64");
        stack.push(d);
        stack.push(m / d);
    }
    out.sort();
    out
}

/// Prime factorisation of `|n|` for nonzero `n`.
pub fn factor_bigint(n: &BigInt) -> Result<Vec<(BigInt, u32)>> {
    if n.is_zero() {
        return Err(Error::invalid("cannot factor zero"));
    }
    let mut m = n.abs();
    if let Some(small) = m.to_u64() {
        return Ok(factor_u64(small)
            .into_iter()
            .map(|(p, e)| (BigInt::from(p), e))
            .collect());
    }
    let mut out: Vec<(BigInt, u32)> = Vec::new();
    for p in primes_up_to(100_000) {
        let pb = BigInt::from(p);
        let mut e = 0;
        while (&m % &pb).is_zero() {
            m /= &pb;
            e += 1;
        }
        if e > 0 {
            out.push((pb, e));
        }
        if m.is_one() {
            break;
        }
    }
    if !m.is_one() {
        if let Some(small) = m.to_u64() {
            for (p, e) in factor_u64(small) {
                out.push((BigInt::from(p), e));
            }
        } else if is_probable_prime(&m) {
            out.push((m, 1));
        } else {
            return Err(Error::cap(format!("factorisation stalled on {m}")));
        }
    }
    out.sort();
    Ok(out)
}

/// Miller-Rabin with fixed bases (deterministic far beyond our input sizes).
pub fn is_probable_prime(n: &BigInt) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_negative() || n.is_even() {
        return false;
    }
    let one = BigInt::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let ab = BigInt::from(a);
        let mut x = ab.modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// p-adic valuation of a nonzero integer.
pub fn v_p_int(n: &BigInt, p: &BigInt) -> u32 {
    assert!(!n.is_zero());
    let mut m = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn v_p_rat(x: &BigRational, p: &BigInt) -> i64 {
    assert!(!x.is_zero());
    v_p_int(x.numer(), p) as i64 - v_p_int(x.denom(), p) as i64
}

pub fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let (g, x, _) = xgcd(&a.mod_floor(m), m);
    if g.is_one() {
        Some(x.mod_floor(m))
    } else {
        None
    }
}

/// Reduce all entries into `[0, p)`.
pub fn fp_reduce(m: &ZMat, p: &BigInt) -> ZMat {
    ZMat::from_fn(m.nrows, m.ncols, |i, j| m.at(i, j).mod_floor(p))
}

/// Basis of the left kernel `{x : x * m = 0 over F_p}`, as rows with entries
/// in `[0, p)`. Row-reduces `[m | I]`; rows whose `m`-part vanishes give the
/// kernel.
pub fn fp_kernel(m: &ZMat, p: &BigInt) -> Vec<Vec<BigInt>> {
    let k = m.nrows;
    let n = m.ncols;
    let mut aug = ZMat::from_fn(k, n + k, |i, j| {
        if j < n {
            m.at(i, j).mod_floor(p)
        } else if j - n == i {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    });
    let mut row = 0usize;
    for col in 0..n {
        let Some(r0) = (row..k).find(|&r| !aug.at(r, col).is_zero()) else {
            continue;
        };
        aug.swap_rows(row, r0);
        let inv = inv_mod(aug.at(row, col), p).expect("pivot invertible mod prime");
        for c in 0..n + k {
            let v = (aug.at(row, c) * &inv).mod_floor(p);
            *aug.at_mut(row, c) = v;
        }
        for r in 0..k {
            if r == row || aug.at(r, col).is_zero() {
                continue;
            }
            let f = aug.at(r, col).clone();
            for c in 0..n + k {
                let v = (aug.at(r, c) - &f * aug.at(row, c)).mod_floor(p);
                *aug.at_mut(r, c) = v;
            }
        }
        row += 1;
        if row == k {
            break;
        }
    }
    let mut kernel = Vec::new();
    for r in 0..k {
        if (0..n).all(|c| aug.at(r, c).is_zero()) {
            let v: Vec<BigInt> = (0..k).map(|c| aug.at(r, n + c).clone()).collect();
            if v.iter().any(|x| !x.is_zero()) {
                kernel.push(v);
            }
        }
    }
    kernel
}

// ---- small polynomials over F_p (u64 coefficients, low degree) ----

fn inv_mod_u64(a: u64, p: u64) -> u64 {
    let (g, x, _) = xgcd(&BigInt::from(a), &BigInt::from(p));
    assert!(g.is_one());
    x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

fn pm_trim(a: &mut Vec<u64>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

fn pm_deg(a: &[u64]) -> usize {
    let mut d = a.len() - 1;
    while d > 0 && a[d] == 0 {
        d -= 1;
    }
    d
}

fn pm_is_zero(a: &[u64]) -> bool {
    a.iter().all(|&c| c == 0)
}

fn pm_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = ((out[i + j] as u128 + ai as u128 * bj as u128) % p as u128) as u64;
        }
    }
    pm_trim(&mut out);
    out
}

fn pm_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let db = pm_deg(b);
    assert!(!pm_is_zero(b));
    let mut r: Vec<u64> = a.to_vec();
    pm_trim(&mut r);
    let lead_inv = inv_mod_u64(b[db], p);
    while !pm_is_zero(&r) && pm_deg(&r) >= db {
        let dr = pm_deg(&r);
        let f = ((r[dr] as u128 * lead_inv as u128) % p as u128) as u64;
        for i in 0..=db {
            let sub = (f as u128 * b[i] as u128) % p as u128;
            r[dr - db + i] = ((r[dr - db + i] as u128 + p as u128 * p as u128 - sub) % p as u128) as u64;
        }
        pm_trim(&mut r);
    }
    r
}

fn pm_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    pm_trim(&mut x);
    pm_trim(&mut y);
    while !pm_is_zero(&y) {
        let r = pm_rem(&x, &y, p);
        x = y;
        y = r;
    }
    // make monic
    if !pm_is_zero(&x) {
        let d = pm_deg(&x);
        let inv = inv_mod_u64(x[d], p);
        for c in x.iter_mut() {
            *c = ((*c as u128 * inv as u128) % p as u128) as u64;
        }
    }
    x
}

fn pm_derivative(a: &[u64], p: u64) -> Vec<u64> {
    if a.len() <= 1 {
        return vec![0];
    }
    let mut out: Vec<u64> = (1..a.len())
        .map(|i| ((a[i] as u128 * (i as u128 % p as u128)) % p as u128) as u64)
        .collect();
    pm_trim(&mut out);
    out
}

/// `x^e mod (f, p)` by square-and-multiply.
fn pm_powmod_x(e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut base = pm_rem(&[0, 1], f, p);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = pm_rem(&pm_mul(&acc, &base, p), f, p);
        }
        e >>= 1;
        if e > 0 {
            base = pm_rem(&pm_mul(&base, &base, p), f, p);
        }
    }
    acc
}

fn poly_mod_p(poly: &MonicIntPoly, p: u64) -> Vec<u64> {
    let pb = BigInt::from(p);
    let mut v: Vec<u64> = poly
        .coeffs
        .iter()
        .map(|c| c.mod_floor(&pb).to_u64().unwrap())
        .collect();
    pm_trim(&mut v);
    v
}

fn is_qr_odd(a: &BigInt, p: u64) -> bool {
    let r = a.mod_floor(&BigInt::from(p)).to_u64().unwrap();
    if r == 0 {
        return true;
    }
    modpow_u64(r, (p - 1) / 2, p) == 1
}

/// Splitting data of one place of an etale algebra factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PlaceEF {
    pub e: u32,
    pub f: u32,
}

fn ef(e: u32, f: u32) -> PlaceEF {
    PlaceEF { e, f }
}

/// (e, f) pairs of the places of Q_p[x]/(q) for a separable quadratic,
/// given v = v_p(disc q) and the unit part of the discriminant.
fn quadratic_places(v: u32, unit: &BigInt, p: u64) -> Vec<PlaceEF> {
    if v % 2 == 1 {
        return vec![ef(2, 1)];
    }
    if p == 2 {
        let u = unit.mod_floor(&BigInt::from(8u32)).to_u64().unwrap();
        match u {
            1 => vec![ef(1, 1), ef(1, 1)],
            5 => vec![ef(1, 2)],
            _ => vec![ef(2, 1)],
        }
    } else if is_qr_odd(unit, p) {
        vec![ef(1, 1), ef(1, 1)]
    } else {
        vec![ef(1, 2)]
    }
}

fn disc_parts(poly: &MonicIntPoly, p: u64) -> Result<(u32, BigInt)> {
    let d = poly.disc();
    if d.is_zero() {
        return Err(Error::invalid(format!("{poly} is not separable")));
    }
    let pb = BigInt::from(p);
    let v = v_p_int(&d, &pb);
    let unit = d / pb.pow(v);
    Ok((v, unit))
}

/// Ramification and inertia data `(e, f)` for each place of the etale
/// algebra `Q_p[x]/(poly)`, for separable `poly` of degree 2 or 3.
pub fn qp_splitting(poly: &MonicIntPoly, p: u64) -> Result<Vec<PlaceEF>> {
    let mut places = match poly.degree() {
        2 => {
            let (v, unit) = disc_parts(poly, p)?;
            quadratic_places(v, &unit, p)
        }
        3 => cubic_places(poly, p)?,
        d => return Err(Error::invalid(format!("splitting limited to degree 2 or 3, got {d}"))),
    };
    places.sort();
    Ok(places)
}

fn divide_by_root(poly: &MonicIntPoly, r: &BigInt) -> MonicIntPoly {
    // Synthetic division of a monic polynomial by (x - r).
    let n = poly.degree();
    let mut out = vec![BigInt::zero(); n];
    let mut carry = BigInt::one();
    for i in (0..n).rev() {
        out[i] = carry.clone();
        carry = &poly.coeffs[i] + r * &carry;
    }
    assert!(carry.is_zero(), "not a root in divide_by_root");
    MonicIntPoly::new(out).unwrap()
}

fn cubic_places(poly: &MonicIntPoly, p: u64) -> Result<Vec<PlaceEF>> {
    let (v, unit) = disc_parts(poly, p)?;
    // Split off rational roots first; each contributes an unramified linear
    // place, and the remaining quadratic is handled by the disc rule.
    let roots = poly.integer_roots();
    if let Some(r) = roots.first() {
        let quad = divide_by_root(poly, r);
        let mut out = vec![ef(1, 1)];
        let (vq, uq) = disc_parts(&quad, p)?;
        out.extend(quadratic_places(vq, &uq, p));
        return Ok(out);
    }
    let pb = BigInt::from(p);
    let fbar = poly_mod_p(poly, p);
    let fbar_d = pm_derivative(&fbar, p);
    let squarefree = !pm_is_zero(&fbar_d) && pm_deg(&pm_gcd(&fbar, &fbar_d, p)) == 0;
    // Distinct roots in F_p, counted via gcd(x^p - x, fbar).
    let distinct_roots = {
        let mut xpx = pm_powmod_x(p, &fbar, p);
        if xpx.len() < 2 {
            xpx.resize(2, 0);
        }
        xpx[1] = (xpx[1] + p - 1) % p;
        pm_trim(&mut xpx);
        if pm_is_zero(&xpx) {
            3
        } else {
            pm_deg(&pm_gcd(&xpx, &fbar, p))
        }
    };
    if squarefree {
        // Hensel: unramified places with f = degrees of the mod-p factors.
        return Ok(match distinct_roots {
            3 => vec![ef(1, 1), ef(1, 1), ef(1, 1)],
            1 => vec![ef(1, 1), ef(1, 2)],
            0 => vec![ef(1, 3)],
            _ => return Err(Error::invalid("impossible root count for squarefree cubic")),
        });
    }
    // Non-squarefree cubic: the repeated factor is linear, so fbar is either
    // l^2 * m with a second root from m (two distinct roots), or l^3 (one).
    if distinct_roots == 2 {
        // Unramified linear place plus the quadratic factor; the quadratic's
        // disc has the same valuation and unit square class as disc(poly)
        // because the resultant of the coprime mod-p factors is a unit.
        let mut out = vec![ef(1, 1)];
        out.extend(quadratic_places(v, &unit, p));
        return Ok(out);
    }
    if distinct_roots != 1 {
        return Err(Error::invalid("impossible root count for non-squarefree cubic"));
    }
    // Triple root mod p: shift it to zero and read the Newton polygon.
    let rho = if p % 3 != 0 {
        // Triple root = -a2/3 mod p.
        let a2 = poly.coeffs[2].mod_floor(&pb).to_u64().unwrap();
        let inv3 = inv_mod_u64(3 % p, p);
        let r = ((a2 as u128 * inv3 as u128) % p as u128) as u64;
        (p - r % p) % p
    } else {
        (0..p)
            .find(|&r| {
                let val = poly.eval_z(&BigInt::from(r)).mod_floor(&pb);
                val.is_zero()
            })
            .ok_or_else(|| Error::invalid("repeated factor without root mod p"))?
    };
    let shifted = shift_poly(poly, &BigInt::from(rho));
    newton_polygon_cubic(&shifted, p, v, &unit)
}

fn shift_poly(poly: &MonicIntPoly, r: &BigInt) -> MonicIntPoly {
    // poly(x + r)
    let n = poly.degree();
    let mut out = vec![BigInt::zero(); n + 1];
    // Horner in the shifted variable: repeatedly multiply by (x + r).
    for c in poly.coeffs.iter().rev() {
        // out = out * (x + r) + c
        let mut next = vec![BigInt::zero(); n + 1];
        for i in (0..n).rev() {
            let v = out[i].clone();
            next[i + 1] += &v;
            next[i] += &v * r;
        }
        next[0] += c;
        out = next;
    }
    MonicIntPoly::new(out).unwrap()
}

fn newton_polygon_cubic(q: &MonicIntPoly, p: u64, disc_v: u32, disc_unit: &BigInt) -> Result<Vec<PlaceEF>> {
    let pb = BigInt::from(p);
    if q.coeffs[0].is_zero() {
        return Err(Error::invalid("unexpected rational root in Newton polygon step"));
    }
    let vals: Vec<i64> = (0..=3)
        .map(|i| {
            if q.coeffs[i].is_zero() {
                i64::MAX / 4
            } else {
                v_p_int(&q.coeffs[i], &pb) as i64
            }
        })
        .collect();
    // Lower convex hull from (0, v0) to (3, 0); segment slopes are the
    // negatives of the root valuations.
    let mut segments: Vec<(i64, i64, usize)> = Vec::new(); // (rise num, run, length)
    let mut i = 0usize;
    while i < 3 {
        let mut best_j = i + 1;
        let mut best_num = vals[i + 1] - vals[i];
        let mut best_den = 1i64;
        for j in i + 2..=3 {
            let num = vals[j] - vals[i];
            let den = (j - i) as i64;
            // Pick the smallest slope; on ties take the longest reach.
            if num * best_den < best_num * den || (num * best_den == best_num * den && j > best_j) {
                best_j = j;
                best_num = num;
                best_den = den;
            }
        }
        segments.push((best_num, best_den, best_j - i));
        i = best_j;
    }
    let mut out = Vec::new();
    for (num, den, len) in segments {
        // Root valuation on this segment.
        let lam_num = -num;
        let lam_den = den * (len as i64) / den; // run = len here by construction
        let _ = lam_den;
        let g = (lam_num.abs()).gcd(&(len as i64));
        let reduced_den = len as i64 / g.max(1);
        match (len, reduced_den) {
            (1, _) => out.push(ef(1, 1)),
            (2, 2) => out.push(ef(2, 1)),
            (3, 3) => out.push(ef(3, 1)),
            (2, 1) => {
                // Two roots of equal integer valuation lam; the quadratic
                // factor's disc has valuation disc_v - 4*min(lam, mu) and the
                // same unit square class as disc(poly).
                let lam = lam_num / 2;
                let other: i64 = {
                    // The remaining segment has length 1.
                    let total: i64 = vals[0];
                    total - lam_num // valuation of the third root via v(q0) = sum of root valuations
                };
                let vq = disc_v as i64 - 4 * lam.min(other);
                if vq < 0 {
                    return Err(Error::nonconv("negative local disc valuation in Newton polygon"));
                }
                out.extend(quadratic_places(vq as u32, disc_unit, p));
            }
            (3, 1) => {
                // All roots of equal integer valuation lam >= 1: rescale and
                // recurse on a cubic with unit roots.
                let lam = lam_num / 3;
                if lam <= 0 {
                    return Err(Error::nonconv("non-positive slope in Newton polygon rescale"));
                }
                let scaled = MonicIntPoly::new(vec![
                    &q.coeffs[0] / pb.pow((3 * lam) as u32),
                    &q.coeffs[1] / pb.pow((2 * lam) as u32),
                    &q.coeffs[2] / pb.pow(lam as u32),
                    BigInt::one(),
                ])
                .unwrap();
                out.extend(cubic_places(&scaled, p)?);
            }
            _ => return Err(Error::invalid("unexpected Newton polygon segment")),
        }
    }
    Ok(out)
}

/// Lift a simple root `r0` of `poly` mod `p` to a root mod `p^k` by Newton
/// iteration; requires `poly'(r0)` to be a unit mod p.
pub fn hensel_lift_root(poly: &MonicIntPoly, p: &BigInt, r0: &BigInt, k: u32) -> Result<BigInt> {
    let mut r = r0.mod_floor(p);
    if !poly.eval_z(&r).mod_floor(p).is_zero() {
        return Err(Error::invalid("hensel_lift_root: not a root mod p"));
    }
    let dp = deriv_eval(poly, &r).mod_floor(p);
    if inv_mod(&dp, p).is_none() {
        return Err(Error::invalid("hensel_lift_root: root is not simple mod p"));
    }
    let mut j = 1u32;
    while j < k {
        let j2 = (2 * j).min(k);
        let m2 = p.pow(j2);
        let fr = poly.eval_z(&r).mod_floor(&m2);
        let dfr = deriv_eval(poly, &r).mod_floor(&m2);
        let inv = inv_mod(&dfr, &m2).expect("derivative stays a unit");
        r = (&r - fr * inv).mod_floor(&m2);
        j = j2;
    }
    Ok(r)
}

fn deriv_eval(poly: &MonicIntPoly, x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for (i, c) in poly.coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * x + BigInt::from(i as u64) * c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> MonicIntPoly {
        s.parse().unwrap()
    }

    #[test]
    fn sieve_and_primality() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(1_000_000_001));
    }

    #[test]
    fn factorisations() {
        assert_eq!(factor_u64(8 * 9 * 97), vec![(2, 3), (3, 2), (97, 1)]);
        let f = factor_bigint(&BigInt::from(-108)).unwrap();
        assert_eq!(f, vec![(BigInt::from(2), 2), (BigInt::from(3), 3)]);
        // A semiprime beyond the small trial range.
        let n = BigInt::from(1_000_003u64) * BigInt::from(999_983u64);
        let f = factor_bigint(&n).unwrap();
        assert_eq!(f, vec![(BigInt::from(999_983u64), 1), (BigInt::from(1_000_003u64), 1)]);
    }

    #[test]
    fn valuations() {
        assert_eq!(v_p_int(&BigInt::from(-108), &BigInt::from(3)), 3);
        let x = BigRational::new(BigInt::from(9), BigInt::from(2));
        assert_eq!(v_p_rat(&x, &BigInt::from(3)), 2);
        assert_eq!(v_p_rat(&x, &BigInt::from(2)), -1);
    }

    #[test]
    fn kernel_mod_two() {
        let m = ZMat::from_i64_rows(&[vec![1, 0], vec![1, 0]]);
        let ker = fp_kernel(&m, &BigInt::from(2));
        assert_eq!(ker, vec![vec![BigInt::from(1), BigInt::from(1)]]);
    }

    #[test]
    fn quadratic_splitting() {
        let gauss = p("x^2 + 1");
        assert_eq!(qp_splitting(&gauss, 2).unwrap(), vec![ef(2, 1)]);
        assert_eq!(qp_splitting(&gauss, 5).unwrap(), vec![ef(1, 1), ef(1, 1)]);
        assert_eq!(qp_splitting(&gauss, 3).unwrap(), vec![ef(1, 2)]);
        let golden = p("x^2 - x - 1");
        assert_eq!(qp_splitting(&golden, 5).unwrap(), vec![ef(2, 1)]);
        assert_eq!(qp_splitting(&golden, 11).unwrap(), vec![ef(1, 1), ef(1, 1)]);
        assert_eq!(qp_splitting(&golden, 2).unwrap(), vec![ef(1, 2)]);
        assert_eq!(qp_splitting(&golden, 7).unwrap(), vec![ef(1, 2)]);
    }

    #[test]
    fn cubic_splitting() {
        let plastic = p("x^3 - x - 1");
        assert_eq!(qp_splitting(&plastic, 23).unwrap(), vec![ef(1, 1), ef(2, 1)]);
        assert_eq!(qp_splitting(&plastic, 2).unwrap(), vec![ef(1, 3)]);
        assert_eq!(qp_splitting(&plastic, 3).unwrap(), vec![ef(1, 3)]);
        assert_eq!(qp_splitting(&plastic, 5).unwrap(), vec![ef(1, 1), ef(1, 2)]);
        let two = p("x^3 - 2");
        assert_eq!(qp_splitting(&two, 2).unwrap(), vec![ef(3, 1)]);
        assert_eq!(qp_splitting(&two, 3).unwrap(), vec![ef(3, 1)]);
        assert_eq!(qp_splitting(&two, 5).unwrap(), vec![ef(1, 1), ef(1, 2)]);
        assert_eq!(
            qp_splitting(&two, 31).unwrap(),
            vec![ef(1, 1), ef(1, 1), ef(1, 1)]
        );
    }

    #[test]
    fn hensel_lift() {
        let plastic = p("x^3 - x - 1");
        let five = BigInt::from(5);
        let r = hensel_lift_root(&plastic, &five, &BigInt::from(2), 6).unwrap();
        let m = five.pow(6);
        assert!(plastic.eval_z(&r).mod_floor(&m).is_zero());
        assert_eq!(r.mod_floor(&five), BigInt::from(2));
    }

    #[test]
    fn splitting_degree_sums_match() {
        // Sum of e*f over places equals the polynomial degree.
        for s in ["x^2 - x - 1", "x^2 + 1", "x^2 + 5", "x^3 - x - 1", "x^3 - 2", "x^3 + x^2 - 2x + 8"] {
            let poly = p(s);
            for q in [2u64, 3, 5, 7, 11, 13, 23, 31] {
                let places = qp_splitting(&poly, q).unwrap();
                let total: u32 = places.iter().map(|pl| pl.e * pl.f).sum();
                assert_eq!(total as usize, poly.degree(), "{s} at {q}");
            }
        }
    }
}
