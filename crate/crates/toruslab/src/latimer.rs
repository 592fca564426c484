//! The matrix-class dictionary: integer matrices with characteristic
//! polynomial P correspond to coarse ideal classes of the equation order,
//! with packets split by local homothety. Includes the brute-force conjugacy
//! oracle, a conjugation-witness solver, and the window census of integral
//! points.

use crate::classes::{enumerate_coarse_classes, is_locally_homothetic};
use crate::error::{Error, Result};
use crate::numfield::{Elt, NumField};
use crate::order::{multiplier_ring, Order};
use crate::poly::MonicIntPoly;
use crate::reduce::{canonical_class_rep_cached, UnitCache};
use crate::zmat::{QLattice, QMat, ZMat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;

/// Characteristic polynomial by the Faddeev-LeVerrier recurrence (exact).
pub fn charpoly(m: &ZMat) -> MonicIntPoly {
    let n = m.nrows;
    assert_eq!(n, m.ncols);
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut mk = m.clone();
    let mut cs: Vec<BigInt> = Vec::with_capacity(n);
    for k in 1..=n {
        let mut tr = BigInt::zero();
        for i in 0..n {
            tr += mk.at(i, i);
        }
        let ck = tr / BigInt::from(k as i64);
        cs.push(ck.clone());
        if k < n {
            let mut shifted = mk.clone();
            for i in 0..n {
                *shifted.at_mut(i, i) -= &ck;
            }
            mk = m.mul(&shifted);
        }
    }
    // p(x) = x^n - c_1 x^{n-1} - c_2 x^{n-2} - ... - c_n.
    for (k, c) in cs.iter().enumerate() {
        coeffs[n - 1 - k] = -c.clone();
    }
    MonicIntPoly::new(coeffs).expect("monic by construction")
}

/// Polynomial-entry helpers for the symbolic adjugate of t*I - M.
type PolyEntry = Vec<BigInt>; // coefficient vector in t

fn pe_mul(a: &PolyEntry, b: &PolyEntry) -> PolyEntry {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn pe_sub(a: &PolyEntry, b: &PolyEntry) -> PolyEntry {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    out
}

/// First column of adj(t I - M), entries as coefficient vectors in t.
fn adjugate_first_column(m: &ZMat) -> Vec<PolyEntry> {
    let n = m.nrows;
    // Entries of t I - M as linear polynomials.
    let entry = |i: usize, j: usize| -> PolyEntry {
        if i == j {
            vec![-m.at(i, j).clone(), BigInt::one()]
        } else {
            vec![-m.at(i, j).clone()]
        }
    };
    // adj(A)_{i0} = (-1)^i * minor_{0i}(A) (cofactor transpose).
    (0..n)
        .map(|i| {
            // Minor deleting row 0 and column i.
            let rows: Vec<usize> = (1..n).collect();
            let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
            let det = match rows.len() {
                1 => entry(rows[0], cols[0]),
                2 => pe_sub(
                    &pe_mul(&entry(rows[0], cols[0]), &entry(rows[1], cols[1])),
                    &pe_mul(&entry(rows[0], cols[1]), &entry(rows[1], cols[0])),
                ),
                _ => unreachable!("degree limited to 2 or 3"),
            };
            if i % 2 == 1 {
                det.iter().map(|c| -c).collect()
            } else {
                det
            }
        })
        .collect()
}

/// The coarse ideal class of a matrix in Z_P(Z): the span of the first
/// adjugate column of t I - M, canonicalized. Multiplication by t on the
/// span acts exactly by M.
pub fn matrix_to_class(field: &NumField, m: &ZMat) -> Result<QLattice> {
    matrix_to_class_cached(field, m, &mut UnitCache::new())
}

pub fn matrix_to_class_cached(
    field: &NumField,
    m: &ZMat,
    cache: &mut UnitCache,
) -> Result<QLattice> {
    if charpoly(m) != field.poly {
        return Err(Error::invalid("matrix characteristic polynomial differs from P"));
    }
    let col = adjugate_first_column(m);
    let n = field.n;
    let rows = QMat::from_fn(n, n, |i, j| {
        BigRational::from_integer(col[i].get(j).cloned().unwrap_or_else(BigInt::zero))
    });
    let lat = QLattice::from_qmat(&rows);
    assert!(lat.is_full_rank(), "adjugate column must span");
    canonical_class_rep_cached(field, &lat, cache)
}

/// Multiplication-by-t matrix on the HNF basis of the class representative.
pub fn class_to_matrix(field: &NumField, lat: &QLattice) -> ZMat {
    let n = field.n;
    let q = lat.to_qmat();
    let gen = field.gen();
    let mut out = ZMat::zero(n, n);
    for i in 0..n {
        let ti: Elt = field.mul(&q.row(i).to_vec(), &gen);
        let coords = lat.coords(&ti).expect("lattice is stable under t");
        for (j, c) in coords.iter().enumerate() {
            assert!(c.is_integer(), "stability forces integer coordinates");
            *out.at_mut(i, j) = c.to_integer();
        }
    }
    debug_assert_eq!(charpoly(&out), field.poly);
    out
}

/// A packet: classes sharing a multiplier order, pairwise locally homothetic.
#[derive(Debug, Clone)]
pub struct Packet {
    pub order: Order,
    /// |disc| of the multiplier order.
    pub disc: BigInt,
    pub classes: Vec<QLattice>,
}

/// All coarse classes of the equation order of P, grouped by multiplier
/// order and split into packets by local homothety.
pub fn packets(field: &NumField) -> Result<Vec<Packet>> {
    let classes = enumerate_coarse_classes(field)?;
    // Group by multiplier ring.
    let mut by_order: Vec<(QLattice, Vec<QLattice>)> = Vec::new();
    for c in classes {
        let rm = multiplier_ring(field, &c);
        match by_order.iter_mut().find(|(k, _)| *k == rm) {
            Some((_, v)) => v.push(c),
            None => by_order.push((rm, vec![c])),
        }
    }
    let mut out = Vec::new();
    for (rm, group) in by_order {
        let order = Order::from_lattice(field, rm)?;
        let disc = order.disc().abs();
        // Union-find split by local homothety.
        let k = group.len();
        let mut comp: Vec<usize> = (0..k).collect();
        fn find(comp: &mut Vec<usize>, i: usize) -> usize {
            let mut r = i;
            while comp[r] != r {
                r = comp[r];
            }
            let mut c = i;
            while comp[c] != c {
                let next = comp[c];
                comp[c] = r;
                c = next;
            }
            r
        }
        for i in 0..k {
            for j in (i + 1)..k {
                let (ri, rj) = (find(&mut comp, i), find(&mut comp, j));
                if ri != rj && is_locally_homothetic(field, &group[i], &group[j])? {
                    comp[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut roots: Vec<usize> = (0..k).map(|i| find(&mut comp, i)).collect();
        let mut uniq: Vec<usize> = roots.clone();
        uniq.sort_unstable();
        uniq.dedup();
        for r in uniq {
            let members: Vec<QLattice> = (0..k)
                .filter(|&i| roots[i] == r)
                .map(|i| group[i].clone())
                .collect();
            out.push(Packet { order: order.clone(), disc: disc.clone(), classes: members });
        }
        roots.clear();
    }
    // Deterministic order: by (disc, first class rep).
    out.sort_by(|a, b| {
        (a.disc.clone(), a.classes[0].clone()).cmp(&(b.disc.clone(), b.classes[0].clone()))
    });
    Ok(out)
}

/// One representative per GL_n(Z)-conjugacy class among matrices with the
/// given characteristic polynomial and entries bounded by `height`.
pub fn brute_force_conjugacy(field: &NumField, height: i64) -> Result<Vec<ZMat>> {
    let mats = match field.n {
        2 => brute_force_n2(field, height),
        3 => brute_force_n3(field, height),
        _ => return Err(Error::invalid("census limited to degree 2 or 3")),
    };
    let mut cache = UnitCache::new();
    let mut reps: Vec<(QLattice, ZMat)> = Vec::new();
    for m in mats {
        let class = matrix_to_class_cached(field, &m, &mut cache)?;
        if !reps.iter().any(|(c, _)| *c == class) {
            reps.push((class, m));
        }
    }
    reps.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(reps.into_iter().map(|(_, m)| m).collect())
}

fn brute_force_n2(field: &NumField, h: i64) -> Vec<ZMat> {
    let c1 = field.poly.coeff(1).to_i64().expect("desk-scale coefficient");
    let c0 = field.poly.coeff(0).to_i64().expect("desk-scale coefficient");
    let tr = -c1;
    let det = c0;
    let mut out = Vec::new();
    for a in -h..=h {
        let d = tr - a;
        if d.abs() > h {
            continue;
        }
        let need = a * d - det; // b c = ad - det
        for b in -h..=h {
            if b == 0 {
                if need == 0 {
                    for c in -h..=h {
                        out.push(ZMat::from_i64_rows(&[vec![a, b], vec![c, d]]));
                    }
                }
                continue;
            }
            if need % b == 0 {
                let c = need / b;
                if c.abs() <= h {
                    out.push(ZMat::from_i64_rows(&[vec![a, b], vec![c, d]]));
                }
            }
        }
    }
    out
}

fn brute_force_n3(field: &NumField, h: i64) -> Vec<ZMat> {
    let c2 = field.poly.coeff(2).to_i64().expect("desk-scale coefficient");
    let c1 = field.poly.coeff(1).to_i64().expect("desk-scale coefficient");
    let c0 = field.poly.coeff(0).to_i64().expect("desk-scale coefficient");
    let tr = -c2;
    let det = -c0;
    let mut out = Vec::new();
    let rng = -h..=h;
    for m11 in rng.clone() {
        for m22 in rng.clone() {
            let m33 = tr - m11 - m22;
            if m33.abs() > h {
                continue;
            }
            for m12 in rng.clone() {
                for m21 in rng.clone() {
                    let min12 = m11 * m22 - m12 * m21;
                    for m13 in rng.clone() {
                        for m23 in rng.clone() {
                            // sigma_2 equation: m13 x + m23 y = r1, x = m31, y = m32.
                            let r1 = min12 + m11 * m33 + m22 * m33 - c1;
                            // det equation: c31 x + c32 y = r2.
                            let c31 = m12 * m23 - m13 * m22;
                            let c32 = -(m11 * m23 - m13 * m21);
                            let r2 = det - m33 * min12;
                            let delta = m13 * c32 - m23 * c31;
                            if delta != 0 {
                                let xn = r1 * c32 - r2 * m23;
                                let yn = m13 * r2 - c31 * r1;
                                if xn % delta != 0 || yn % delta != 0 {
                                    continue;
                                }
                                let (x, y) = (xn / delta, yn / delta);
                                if x.abs() > h || y.abs() > h {
                                    continue;
                                }
                                out.push(ZMat::from_i64_rows(&[
                                    vec![m11, m12, m13],
                                    vec![m21, m22, m23],
                                    vec![x, y, m33],
                                ]));
                            } else {
                                for x in rng.clone() {
                                    for y in rng.clone() {
                                        if m13 * x + m23 * y == r1 && c31 * x + c32 * y == r2 {
                                            out.push(ZMat::from_i64_rows(&[
                                                vec![m11, m12, m13],
                                                vec![m21, m22, m23],
                                                vec![x, y, m33],
                                            ]));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.retain(|m| charpoly(m) == field.poly);
    out
}

/// Integer solutions U of U M1 = M2 U with |det U| = 1, searched over small
/// coefficient combinations of the commutant kernel; None means no witness
/// was found within the box (complete for conjugate pairs at desk scale).
pub fn conjugating_matrix(m1: &ZMat, m2: &ZMat, coeff_box: i64) -> Option<ZMat> {
    let n = m1.nrows;
    let n2 = n * n;
    // Row-vectorized: (U m1 - m2 U)_{ij} = sum_{ab} U_ab T[(a,b)][(i,j)]
    // with T[(a,b)][(i,j)] = delta_{ia} m1[b][j] - m2[i][a] delta_{bj}.
    let t = ZMat::from_fn(n2, n2, |r, c| {
        let (a, b) = (r / n, r % n);
        let (i, j) = (c / n, c % n);
        let mut v = BigInt::zero();
        if i == a {
            v += m1.at(b, j);
        }
        if b == j {
            v -= m2.at(i, a);
        }
        v
    });
    let snf = t.snf();
    // Row kernel: x T = 0 iff (x u^-1) diag(d) = 0, so kernel rows are the
    // rows of u sitting over zero elementary divisors.
    let mut kernel: Vec<Vec<BigInt>> = Vec::new();
    for i in 0..n2 {
        if i >= snf.d.len() || snf.d[i].is_zero() {
            kernel.push((0..n2).map(|j| snf.u.at(i, j).clone()).collect());
        }
    }
    if kernel.is_empty() {
        return None;
    }
    let r = kernel.len();
    let mut coeffs = vec![-coeff_box; r];
    loop {
        if coeffs.iter().any(|&c| c != 0) {
            let mut u = ZMat::zero(n, n);
            for (k, &c) in coeffs.iter().enumerate() {
                if c != 0 {
                    for idx in 0..n2 {
                        *u.at_mut(idx / n, idx % n) += BigInt::from(c) * &kernel[k][idx];
                    }
                }
            }
            if u.det().abs().is_one() {
                return Some(u);
            }
        }
        let mut k = 0;
        loop {
            if k == r {
                return None;
            }
            coeffs[k] += 1;
            if coeffs[k] <= coeff_box {
                break;
            }
            coeffs[k] = -coeff_box;
            k += 1;
        }
    }
}

/// Window census result. `complete` distinguishes a genuinely empty or
/// stabilized window from a truncated one: hitting the cap stops the search
/// but keeps everything found so far.
#[derive(Debug, Clone)]
pub struct WindowCensus {
    pub points: Vec<ZMat>,
    pub complete: bool,
}

/// All M in Z_P(Z) whose radial projection M / |M|_F has every entry inside
/// the given window, found by growing conjugation balls from each class
/// representative until the window census stabilizes twice.
pub fn integral_points_in_window(
    field: &NumField,
    window: &[(f64, f64)],
    cap: usize,
) -> Result<WindowCensus> {
    let n = field.n;
    if window.len() != n * n {
        return Err(Error::invalid("window must give one interval per matrix entry"));
    }
    let in_window = |m: &ZMat| -> bool {
        let mut norm2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = m.at(i, j).to_f64().unwrap_or(f64::MAX);
                norm2 += v * v;
            }
        }
        let norm = norm2.sqrt();
        (0..n * n).all(|k| {
            let v = m.at(k / n, k % n).to_f64().unwrap_or(f64::MAX) / norm;
            window[k].0 <= v && v <= window[k].1
        })
    };
    // GL_n(Z) generators: elementary transvections, swaps, one sign flip.
    let mut gens: Vec<ZMat> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                for s in [1i64, -1] {
                    let mut e = ZMat::identity(n);
                    *e.at_mut(i, j) = BigInt::from(s);
                    gens.push(e);
                }
            }
        }
    }
    for i in 0..n - 1 {
        let mut p = ZMat::identity(n);
        *p.at_mut(i, i) = BigInt::zero();
        *p.at_mut(i + 1, i + 1) = BigInt::zero();
        *p.at_mut(i, i + 1) = BigInt::one();
        *p.at_mut(i + 1, i) = BigInt::from(-1); // keep det +1
        gens.push(p);
    }
    let seeds: Vec<ZMat> = packets(field)?
        .iter()
        .flat_map(|p| p.classes.iter().map(|c| class_to_matrix(field, c)))
        .collect();
    let mut census: BTreeSet<ZMat> = BTreeSet::new();
    let mut seen: BTreeSet<ZMat> = BTreeSet::new();
    let mut frontier: Vec<(ZMat, ZMat)> = Vec::new(); // (gamma, gamma M gamma^-1)
    for s in &seeds {
        if seen.insert(s.clone()) {
            if in_window(s) {
                census.insert(s.clone());
            }
            frontier.push((ZMat::identity(n), s.clone()));
        }
    }
    let mut stable_rounds = 0;
    let mut depth = 0usize;
    let mut complete = true;
    'grow: while stable_rounds < 2 && depth < 24 && !frontier.is_empty() {
        depth += 1;
        let before = census.len();
        let mut next = Vec::new();
        for (gamma, conj) in &frontier {
            for g in &gens {
                let ng = g.mul(gamma);
                // Inverse of g is cheap: adjugate over det +-1.
                let det = g.det();
                let mut ginv = g.adjugate();
                if det == BigInt::from(-1) {
                    ginv = ginv.mul_scalar(&BigInt::from(-1));
                }
                let nc = g.mul(conj).mul(&ginv);
                if seen.insert(nc.clone()) {
                    if in_window(&nc) {
                        census.insert(nc.clone());
                        if census.len() >= cap {
                            complete = false;
                            break 'grow;
                        }
                    }
                    // Prune states with huge entries; they cannot re-enter a
                    // bounded window without passing through smaller ones.
                    let bounded = (0..n * n)
                        .all(|k| nc.at(k / n, k % n).abs() < BigInt::from(1_000_000i64));
                    if bounded {
                        next.push((ng, nc));
                    }
                }
            }
        }
        frontier = next;
        if census.len() == before {
            stable_rounds += 1;
        } else {
            stable_rounds = 0;
        }
    }
    if stable_rounds < 2 && !frontier.is_empty() {
        complete = false; // truncated by the cap or the depth limit
    }
    Ok(WindowCensus { points: census.into_iter().collect(), complete })
}

/// Quadratic census corpus: monic irreducible x^2 + bx + c with b in {0, 1}
/// and |disc| <= maxdisc (every discriminant class appears: disc = b^2 - 4c).
pub fn census_polys_n2(maxdisc: i64) -> Vec<MonicIntPoly> {
    let mut out = Vec::new();
    for b in 0..=1i64 {
        let mut c = -(maxdisc / 4) - 1;
        while c <= maxdisc / 4 + 1 {
            let disc = b * b - 4 * c;
            if disc.abs() <= maxdisc && disc != 0 {
                let p = MonicIntPoly::from_i64(&[c, b, 1]);
                if p.is_irreducible().expect("quadratic irreducibility is decidable") {
                    out.push(p);
                }
            }
            c += 1;
        }
    }
    out
}

/// Cubic census corpus: x^3 + a2 x^2 + a1 x + a0, a2 in {-1, 0, 1},
/// |disc| <= maxdisc.
pub fn census_polys_n3(maxdisc: i64) -> Vec<MonicIntPoly> {
    let mut out = Vec::new();
    let bound = ((maxdisc as f64).powf(1.0 / 3.0) * 2.0).ceil() as i64 + 3;
    for a2 in -1..=1i64 {
        for a1 in -bound..=bound {
            for a0 in -bound..=bound {
                let p = MonicIntPoly::from_i64(&[a0, a1, a2, 1]);
                let d = p.disc();
                if !d.is_zero()
                    && d.abs() <= BigInt::from(maxdisc)
                    && p.is_irreducible().expect("cubic irreducibility is decidable")
                {
                    out.push(p);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(s: &str) -> NumField {
        NumField::new(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn charpoly_of_companion() {
        for s in ["x^2 + 5", "x^3 - x - 1", "x^3 + 2x^2 - 3x + 7"] {
            let p: MonicIntPoly = s.parse().unwrap();
            assert_eq!(charpoly(&p.companion()), p);
        }
    }

    #[test]
    fn companion_maps_to_principal() {
        let k = field("x^2 - x - 1");
        let class = matrix_to_class(&k, &k.poly.companion()).unwrap();
        let principal = canonical_class_rep_cached(
            &k,
            &Order::equation_order(&k).lat,
            &mut UnitCache::new(),
        )
        .unwrap();
        assert_eq!(class, principal);
    }

    #[test]
    fn frozen_nonprincipal_class() {
        let k = field("x^2 + 5");
        let m = ZMat::from_i64_rows(&[vec![1, 2], vec![-3, -1]]);
        let class = matrix_to_class(&k, &m).unwrap();
        let o = Order::equation_order(&k);
        let principal =
            canonical_class_rep_cached(&k, &o.lat, &mut UnitCache::new()).unwrap();
        assert_ne!(class, principal);
        // It is the norm-2 class (2, 1 + t).
        let p2 = QLattice::from_qmat(&QMat::from_fn(2, 2, |i, j| {
            BigRational::from_integer(BigInt::from([[2i64, 0], [1, 1]][i][j]))
        }));
        let p2rep = canonical_class_rep_cached(&k, &p2, &mut UnitCache::new()).unwrap();
        assert_eq!(class, p2rep);
    }

    #[test]
    fn wrong_charpoly_rejected() {
        let k = field("x^2 + 5");
        let m = ZMat::from_i64_rows(&[vec![0, 1], vec![-1, 0]]);
        assert!(matrix_to_class(&k, &m).is_err());
    }

    #[test]
    fn class_to_matrix_of_power_basis_is_companion() {
        let k = field("x^3 - x - 1");
        let m = class_to_matrix(&k, &Order::equation_order(&k).lat);
        assert_eq!(m, k.poly.companion());
    }

    #[test]
    fn roundtrip_over_packets() {
        for s in ["x^2 - x - 1", "x^2 + 5", "x^3 - x - 1", "x^2 + 9"] {
            let k = field(s);
            let mut cache = UnitCache::new();
            for packet in packets(&k).unwrap() {
                for class in &packet.classes {
                    let m = class_to_matrix(&k, class);
                    let back = matrix_to_class_cached(&k, &m, &mut cache).unwrap();
                    assert_eq!(&back, class, "{s}");
                }
            }
        }
    }

    #[test]
    fn conjugation_invariance() {
        let k = field("x^2 + 5");
        let m = ZMat::from_i64_rows(&[vec![1, 2], vec![-3, -1]]);
        let base = matrix_to_class(&k, &m).unwrap();
        let gammas = [
            ZMat::from_i64_rows(&[vec![1, 1], vec![0, 1]]),
            ZMat::from_i64_rows(&[vec![1, 0], vec![1, 1]]),
            ZMat::from_i64_rows(&[vec![2, 1], vec![1, 1]]),
            ZMat::from_i64_rows(&[vec![0, 1], vec![-1, 0]]),
            ZMat::from_i64_rows(&[vec![3, 2], vec![1, 1]]),
        ];
        for g in &gammas {
            let det = g.det();
            assert!(det.abs().is_one());
            let mut ginv = g.adjugate();
            if det == BigInt::from(-1) {
                ginv = ginv.mul_scalar(&BigInt::from(-1));
            }
            let conj = g.mul(&m).mul(&ginv);
            assert_eq!(matrix_to_class(&k, &conj).unwrap(), base);
        }
    }

    #[test]
    fn brute_force_frozen_counts() {
        assert_eq!(brute_force_conjugacy(&field("x^2 + 1"), 3).unwrap().len(), 1);
        assert_eq!(brute_force_conjugacy(&field("x^2 - 2"), 5).unwrap().len(), 1);
        assert_eq!(brute_force_conjugacy(&field("x^2 + 5"), 6).unwrap().len(), 2);
    }

    #[test]
    fn brute_force_cubic() {
        let k = field("x^3 - x - 1");
        assert_eq!(brute_force_conjugacy(&k, 6).unwrap().len(), 1);
        let ps = packets(&k).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].classes.len(), 1);
    }

    #[test]
    fn packets_golden_and_nonprincipal() {
        let k = field("x^2 - x - 1");
        let ps = packets(&k).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].classes.len(), 1);
        let k5 = field("x^2 + 5");
        let ps = packets(&k5).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].classes.len(), 2);
        assert_eq!(ps[0].disc, BigInt::from(20));
    }

    #[test]
    fn conjugating_witness_found_and_verified() {
        let k = field("x^2 + 5");
        let m = ZMat::from_i64_rows(&[vec![1, 2], vec![-3, -1]]);
        let g = ZMat::from_i64_rows(&[vec![2, 1], vec![1, 1]]);
        let ginv = ZMat::from_i64_rows(&[vec![1, -1], vec![-1, 2]]);
        let m2 = g.mul(&m).mul(&ginv);
        let u = conjugating_matrix(&m, &m2, 4).expect("witness exists");
        assert!(u.det().abs().is_one());
        assert_eq!(u.mul(&m), m2.mul(&u));
        // Distinct classes admit no witness.
        let comp = k.poly.companion();
        assert!(conjugating_matrix(&m, &comp, 3).is_none());
    }

    #[test]
    fn window_contains_companion() {
        let k = field("x^3 - 2");
        // The whole sphere: infinitely many conjugates project inside, so a
        // small cap truncates, but the companion matrix is always found.
        let window = vec![(-2.0, 2.0); 9];
        let census = integral_points_in_window(&k, &window, 500).unwrap();
        assert!(census.points.contains(&k.poly.companion()));
        assert!(!census.complete);
        // An empty window stabilizes immediately and is reported complete.
        let empty = vec![(2.0, 3.0); 9];
        let census = integral_points_in_window(&k, &empty, 1000).unwrap();
        assert!(census.points.is_empty());
        assert!(census.complete);
    }

    #[test]
    fn census_corpora_shapes() {
        let n2 = census_polys_n2(40);
        assert!(n2.iter().all(|p| p.degree() == 2));
        // b is normalized to {0, 1}: disc 5 appears as x^2 + x - 1.
        assert!(n2.contains(&MonicIntPoly::from_i64(&[-1, 1, 1])));
        assert!(!n2.contains(&MonicIntPoly::from_i64(&[-1, -1, 1])));
        let n3 = census_polys_n3(30);
        assert!(n3.contains(&MonicIntPoly::from_i64(&[-1, -1, 0, 1])));
        for p in n3.iter() {
            assert!(p.disc().abs() <= BigInt::from(30));
        }
    }

    #[test]
    fn census_agreement_spotcheck() {
        // A couple of census entries end-to-end: class counts agree between
        // the window enumeration and the brute-force oracle.
        for (s, h) in [("x^2 + 5", 6), ("x^2 - x - 1", 8), ("x^2 + 9", 10)] {
            let k = field(s);
            let total: usize = packets(&k).unwrap().iter().map(|p| p.classes.len()).sum();
            let brute = brute_force_conjugacy(&k, h).unwrap().len();
            assert_eq!(total, brute, "{s}");
        }
    }
}
