//! Partial Dedekind zeta sums, residues against the analytic class-number
//! formula, and volume-discriminant trends.
//!
//! Two independent routes to the same coefficients keep each other honest:
//! explicit ideal enumeration (exact HNF lattices, usable with characters)
//! and a multiplicative sieve assembled from the local splitting type at
//! every prime. The residue at s = 1 is estimated from ideal counts by
//! Richardson extrapolation and compared against
//! 2^r1 (2 pi)^r2 h R / (w sqrt|disc|).

use crate::classes::{ideals_of_bounded_norm, is_invertible_ideal, picard_group, PicardGroup};
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, SlopeFit};
use crate::ideal::ideal_norm;
use crate::numfield::NumField;
use crate::order::{maximal_order, Order};
use crate::padic::qp_splitting;
use crate::reduce::{canonical_class_rep_cached, unit_group, UnitCache};
use crate::zmat::QLattice;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use std::collections::BTreeMap;

/// Number of integral ideals of the maximal order per norm m = 1..=bound
/// (index 0 unused), by a smallest-prime-factor sieve with local factors
/// from the splitting type at each prime.
pub fn ideal_count_coeffs(field: &NumField, bound: u64) -> Result<Vec<u32>> {
    let b = bound as usize;
    let mut spf: Vec<u32> = vec![0; b + 1];
    for i in 2..=b {
        if spf[i] == 0 {
            let mut j = i;
            while j <= b {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    // counts[p][k] = number of ideals of norm p^k.
    let mut local: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for i in 2..=b {
        if spf[i] == i as u32 && !local.contains_key(&spf[i]) {
            let p = i as u64;
            let fs: Vec<usize> =
                qp_splitting(&field.poly, p)?.iter().map(|pl| pl.f as usize).collect();
            let kmax = (bound as f64).log(p as f64).floor() as usize;
            let mut ways = vec![0u32; kmax + 1];
            ways[0] = 1;
            for f in fs {
                for j in f..=kmax {
                    ways[j] += ways[j - f];
                }
            }
            local.insert(i as u32, ways);
        }
    }
    let mut a = vec![0u32; b + 1];
    if b >= 1 {
        a[1] = 1;
    }
    for m in 2..=b {
        let p = spf[m];
        let mut r = m;
        let mut k = 0usize;
        while spf[r] == p {
            r /= p as usize;
            k += 1;
            if r == 1 {
                break;
            }
        }
        a[m] = a[r] * local[&p][k];
    }
    Ok(a)
}

/// Deterministically ordered list of (norm, ideal) for the integral
/// invertible ideals of norm at most `bound`.
fn enumerated_ideals(order: &Order, bound: u64) -> Result<Vec<(u64, QLattice)>> {
    let mut out: Vec<(u64, QLattice)> = ideals_of_bounded_norm(order, bound, 4_000_000)?
        .into_iter()
        .filter(|l| is_invertible_ideal(order, l))
        .map(|l| {
            let n = ideal_norm(order, &l).abs().to_integer().to_u64().expect("norm fits u64");
            (n, l)
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Partial zeta sum over integral invertible ideals: sum N(a)^{-s}, N <= B,
/// accumulated in (norm, HNF) order.
pub fn zeta_partial(order: &Order, s: f64, bound: u64) -> Result<f64> {
    if order.field.n < 2 {
        return Err(Error::invalid("zeta sums require degree at least 2"));
    }
    let mut sum = 0.0;
    for (n, _) in enumerated_ideals(order, bound)? {
        sum += (n as f64).powf(-s);
    }
    Ok(sum)
}

/// Character-twisted partial zeta sum: sum psi([a]) N(a)^{-s}, N <= B.
pub fn zeta_partial_twisted(
    order: &Order,
    pic: &PicardGroup,
    character: usize,
    s: f64,
    bound: u64,
) -> Result<Complex64> {
    if character >= pic.characters.len() {
        return Err(Error::invalid("character index out of range"));
    }
    let mut cache = UnitCache::new();
    let mut sum = Complex64::new(0.0, 0.0);
    for (n, l) in enumerated_ideals(order, bound)? {
        let rep = canonical_class_rep_cached(&order.field, &l, &mut cache)?;
        let idx = pic
            .classes
            .iter()
            .position(|c| *c == rep)
            .ok_or_else(|| Error::nonconv("ideal class missing from the Picard table"))?;
        sum += pic.characters[character][idx] * (n as f64).powf(-s);
    }
    Ok(sum)
}

/// Residue estimate against the analytic class-number formula.
#[derive(Debug, Clone)]
pub struct CnfCheck {
    /// Richardson-extrapolated residue of the ideal-count function.
    pub residue: f64,
    /// 2^r1 (2 pi)^r2 h R / (w sqrt |disc|) from exact invariants.
    pub rhs: f64,
    pub relerr: f64,
    /// Ideal counts at bound and 2 * bound.
    pub counts: (u64, u64),
    pub bound: u64,
}

/// Estimate the residue of the zeta function of the maximal order at s = 1
/// from ideal counts at B and 2B (two-point Richardson with the known error
/// exponent 1/n), and compare with the closed-form residue.
pub fn cnf_check(field: &NumField, bound: u64) -> Result<CnfCheck> {
    if bound < 16 {
        return Err(Error::invalid("count bound too small for extrapolation"));
    }
    let ord = maximal_order(field)?;
    let a = ideal_count_coeffs(field, 2 * bound)?;
    let n1: u64 = a[1..=bound as usize].iter().map(|&x| x as u64).sum();
    let n2: u64 = n1 + a[bound as usize + 1..].iter().map(|&x| x as u64).sum::<u64>();
    let f1 = n1 as f64 / bound as f64;
    let f2 = n2 as f64 / (2 * bound) as f64;
    let t = 2f64.powf(1.0 / field.n as f64);
    let residue = (t * f2 - f1) / (t - 1.0);
    let pic = picard_group(&ord)?;
    let ug = unit_group(&ord)?;
    let (r1, r2) = field.poly.signature()?;
    let disc = ord.disc().abs().to_f64().unwrap();
    let rhs = 2f64.powi(r1 as i32)
        * (2.0 * std::f64::consts::PI).powi(r2 as i32)
        * pic.order() as f64
        * ug.regulator
        / (ug.torsion as f64 * disc.sqrt());
    let relerr = (residue - rhs).abs() / rhs;
    Ok(CnfCheck { residue, rhs, relerr, counts: (n1, n2), bound })
}

/// Slope of log(h R) against log disc over a packet family; demands enough
/// packets and enough discriminant spread to mean anything.
pub fn volume_disc_trend(points: &[(f64, f64)], seed: u64) -> Result<SlopeFit> {
    if points.len() < 10 {
        return Err(Error::invalid(format!(
            "volume-discriminant trend needs at least 10 packets, got {}",
            points.len()
        )));
    }
    let mut lo = f64::MAX;
    let mut hi: f64 = 0.0;
    for &(d, _) in points {
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if hi < 100.0 * lo {
        return Err(Error::invalid("discriminant range below two decades"));
    }
    loglog_fit(points, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: &str) -> NumField {
        NumField::new(p.parse().unwrap()).unwrap()
    }

    #[test]
    fn gaussian_partial_matches_two_squares_oracle() {
        let k = field("x^2 + 1");
        let ord = maximal_order(&k).unwrap();
        // Oracle: ideals of norm m in Z[i] correspond to representations
        // m = x^2 + y^2 up to the four units.
        let mut reps = vec![0u32; 51];
        for x in -8i64..=8 {
            for y in -8i64..=8 {
                let m = (x * x + y * y) as usize;
                if (1..=50).contains(&m) {
                    reps[m] += 1;
                }
            }
        }
        let coeffs = ideal_count_coeffs(&k, 50).unwrap();
        let mut oracle = 0.0;
        for m in 1..=50usize {
            assert_eq!(coeffs[m], reps[m] / 4, "norm {m}");
            oracle += (reps[m] / 4) as f64 / (m * m) as f64;
        }
        let got = zeta_partial(&ord, 2.0, 50).unwrap();
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn sieve_matches_enumeration_for_a_cubic() {
        let k = field("x^3 - x - 1");
        let ord = maximal_order(&k).unwrap();
        let coeffs = ideal_count_coeffs(&k, 60).unwrap();
        let mut counted = vec![0u32; 61];
        for (n, _) in enumerated_ideals(&ord, 60).unwrap() {
            counted[n as usize] += 1;
        }
        assert_eq!(&coeffs[1..], &counted[1..]);
    }

    #[test]
    fn residue_golden_real_quadratic() {
        let chk = cnf_check(&field("x^2 - x - 1"), 50_000).unwrap();
        // 4 ln phi / (2 sqrt 5).
        let expect = 4.0 * ((1.0 + 5.0f64.sqrt()) / 2.0).ln() / (2.0 * 5.0f64.sqrt());
        assert!((chk.rhs - expect).abs() < 1e-9);
        assert!((expect - 0.43041).abs() < 1e-5);
        assert!(chk.relerr <= 0.02, "relerr {}", chk.relerr);
    }

    #[test]
    fn residue_golden_gaussian() {
        let chk = cnf_check(&field("x^2 + 1"), 50_000).unwrap();
        assert!((chk.rhs - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!(chk.relerr <= 0.02, "relerr {}", chk.relerr);
    }

    #[test]
    fn characters_resolve_the_principal_class() {
        // Summing the twisted zetas over all characters isolates h times the
        // principal-class sum.
        let k = field("x^2 + 5");
        let ord = maximal_order(&k).unwrap();
        let pic = picard_group(&ord).unwrap();
        let h = pic.order() as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for chi in 0..pic.characters.len() {
            total += zeta_partial_twisted(&ord, &pic, chi, 2.0, 300).unwrap();
        }
        let mut cache = UnitCache::new();
        let mut principal = 0.0;
        for (n, l) in enumerated_ideals(&ord, 300).unwrap() {
            let rep = canonical_class_rep_cached(&k, &l, &mut cache).unwrap();
            if pic.classes.iter().position(|c| *c == rep).unwrap() == pic.identity {
                principal += (n as f64).powf(-2.0);
            }
        }
        assert!((total.re - h * principal).abs() < 1e-10);
        assert!(total.im.abs() < 1e-12);
    }

    #[test]
    fn partial_sums_grow_with_the_bound() {
        let ord = maximal_order(&field("x^2 - 2")).unwrap();
        let a = zeta_partial(&ord, 2.0, 50).unwrap();
        let b = zeta_partial(&ord, 2.0, 200).unwrap();
        assert!(b > a);
    }

    #[test]
    fn trend_input_guards() {
        let few: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, i as f64)).collect();
        assert!(volume_disc_trend(&few, 0).is_err());
        let narrow: Vec<(f64, f64)> = (10..=20).map(|i| (i as f64, i as f64)).collect();
        assert!(volume_disc_trend(&narrow, 0).is_err());
        let fine: Vec<(f64, f64)> =
            (0..=10).map(|i| (10f64.powf(i as f64 * 0.3), 3.0 * 10f64.powf(i as f64 * 0.15))).collect();
        let fit = volume_disc_trend(&fine, 0).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-9);
    }
}
