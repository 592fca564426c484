//! Ideal enumeration, local homothety over all primes, Picard groups with
//! character tables, and the full set of coarse lattice classes of an
//! equation order.

use crate::error::{Error, Result};
use crate::ideal::{ideal_mul, ideal_quotient_by_order, local_homothety};
use crate::numfield::NumField;
use crate::order::{maximal_order, Order};
use crate::padic::factor_bigint;
use crate::reduce::canonical_class_rep;
use crate::zmat::{QLattice, ZMat};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::collections::{BTreeMap, BTreeSet};

/// True iff (L1)_p = lambda_p (L2)_p for every prime p. Localisations away
/// from the primes of [L1 : L1 cap L2] [L2 : L1 cap L2] coincide, so only
/// those finitely many primes need the finite search.
pub fn is_locally_homothetic(field: &NumField, l1: &QLattice, l2: &QLattice) -> Result<bool> {
    let meet = l1.intersect(l2);
    let m1 = meet.index_in(l1).ok_or_else(|| Error::invalid("rank mismatch"))?;
    let m2 = meet.index_in(l2).ok_or_else(|| Error::invalid("rank mismatch"))?;
    let mut bad: BTreeSet<BigInt> = BTreeSet::new();
    for (p, _) in factor_bigint(&(m1 * m2))? {
        bad.insert(p);
    }
    for p in bad {
        if local_homothety(field, l1, l2, &p)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Divisor lists of a small positive integer.
fn divisors(m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            if d * d != m {
                out.push(m / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

/// All diagonal tuples (d_1, ..., d_n) of positive integers with product m.
fn diag_tuples(n: usize, m: u64) -> Vec<Vec<u64>> {
    if n == 1 {
        return vec![vec![m]];
    }
    let mut out = Vec::new();
    for d in divisors(m) {
        for mut rest in diag_tuples(n - 1, m / d) {
            let mut v = vec![d];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// Row-HNF integer matrices with the given diagonal: upper triangular,
/// entry (i, j) for i < j ranging over [0, d_j).
fn hnf_with_diagonal(diag: &[u64]) -> Vec<ZMat> {
    let n = diag.len();
    let free: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(_, j)| diag[j] > 1)
        .collect();
    let mut out = Vec::new();
    let mut vals = vec![0u64; free.len()];
    loop {
        let mut h = ZMat::zero(n, n);
        for i in 0..n {
            *h.at_mut(i, i) = BigInt::from(diag[i]);
        }
        for (k, &(i, j)) in free.iter().enumerate() {
            *h.at_mut(i, j) = BigInt::from(vals[k]);
        }
        out.push(h);
        let mut k = 0;
        loop {
            if k == free.len() {
                return out;
            }
            vals[k] += 1;
            if vals[k] < diag[free[k].1] {
                break;
            }
            vals[k] = 0;
            k += 1;
        }
    }
}

/// Sublattices of `ambient` of index exactly m that are stable under
/// multiplication by every basis element of `mult_basis`.
fn stable_sublattices(
    field: &NumField,
    ambient: &QLattice,
    mult_basis: &[Vec<BigRational>],
    m: u64,
) -> Vec<QLattice> {
    let n = field.n;
    let amb = ambient.to_qmat();
    let mut out = Vec::new();
    for diag in diag_tuples(n, m) {
        for h in hnf_with_diagonal(&diag) {
            // Rows of the candidate in field coordinates.
            let hq = crate::zmat::QMat::from_zmat(&h);
            let rows = hq.mul(&amb);
            let cand = QLattice::from_qmat(&rows);
            if mult_basis.iter().all(|b| {
                let moved = cand.mul_qmat(&field.mul_matrix(b));
                cand.contains_lattice(&moved)
            }) {
                out.push(cand);
            }
        }
    }
    out
}

/// All integral O-ideals of norm at most `bound`, each exactly once, sorted
/// by (norm, lattice representation).
pub fn ideals_of_bounded_norm(order: &Order, bound: u64, cap: usize) -> Result<Vec<QLattice>> {
    let basis = order.basis_elts();
    let mut out: Vec<(BigInt, QLattice)> = Vec::new();
    for m in 1..=bound {
        for lat in stable_sublattices(&order.field, &order.lat, &basis, m) {
            out.push((BigInt::from(m), lat));
            if out.len() > cap {
                return Err(Error::cap(format!("ideal enumeration exceeded cap {cap}")));
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out.into_iter().map(|(_, l)| l).collect())
}

/// Invertibility of an integral ideal: L (O : L) = O.
pub fn is_invertible_ideal(order: &Order, lat: &QLattice) -> bool {
    let inv = ideal_quotient_by_order(order, lat);
    ideal_mul(&order.field, lat, &inv) == order.lat
}

#[derive(Debug, Clone)]
pub struct PicardGroup {
    /// Canonical homothety-class representatives; `identity` indexes O's class.
    pub classes: Vec<QLattice>,
    pub identity: usize,
    /// table[i][j] = index of class_i * class_j.
    pub table: Vec<Vec<usize>>,
    /// characters[k][j] = psi_k(class_j), rows are the full character table.
    pub characters: Vec<Vec<Complex64>>,
    /// Cyclic decomposition orders (invariant factors of the group).
    pub cyclic_orders: Vec<u64>,
}

impl PicardGroup {
    pub fn order(&self) -> usize {
        self.classes.len()
    }
}

fn minkowski_bound(order: &Order) -> u64 {
    let d = order.disc().to_f64().unwrap().abs().sqrt();
    let n = order.field.n;
    let emb = crate::embed::Embedding::new(&order.field.poly).expect("roots");
    let nf = n as f64;
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let c = factorial / nf.powi(n as i32) * (4.0 / std::f64::consts::PI).powi(emb.r2 as i32);
    (c * d).ceil() as u64 + 1
}

/// The Picard group of invertible ideal classes: enumeration to the Minkowski
/// bound, exact closure verification, and the full character table.
pub fn picard_group(order: &Order) -> Result<PicardGroup> {
    let field = &order.field;
    let bound = minkowski_bound(order).max(2);
    let ideals = ideals_of_bounded_norm(order, bound, 2_000_000)?;
    let mut reps: Vec<QLattice> = Vec::new();
    let mut seen: BTreeSet<QLattice> = BTreeSet::new();
    for idl in ideals.iter().filter(|l| is_invertible_ideal(order, l)) {
        let rep = canonical_class_rep(field, idl)?;
        if seen.insert(rep.clone()) {
            reps.push(rep);
        }
    }
    let identity_rep = canonical_class_rep(field, &order.lat)?;
    let identity = reps
        .iter()
        .position(|r| *r == identity_rep)
        .ok_or_else(|| Error::nonconv("identity class missing from enumeration"))?;
    let k = reps.len();
    let mut table = vec![vec![0usize; k]; k];
    for i in 0..k {
        for j in i..k {
            let prod = ideal_mul(field, &reps[i], &reps[j]);
            let rep = canonical_class_rep(field, &prod)?;
            let idx = reps.iter().position(|r| *r == rep).ok_or_else(|| {
                Error::nonconv("class multiplication left the enumerated set; closure not reached")
            })?;
            table[i][j] = idx;
            table[j][i] = idx;
        }
    }
    let (orders, exps) = abelian_decomposition(&table, identity)?;
    let characters = character_table(&orders, &exps);
    Ok(PicardGroup { classes: reps, identity, table, characters, cyclic_orders: orders })
}

fn group_pow(table: &[Vec<usize>], id: usize, g: usize, e: u64) -> usize {
    let mut acc = id;
    for _ in 0..e {
        acc = table[acc][g];
    }
    acc
}

/// Kronecker decomposition of a finite abelian group given by its table:
/// returns cyclic orders (o_1 >= o_2 >= ...) and, for every element, its
/// exponent vector in the chosen generators.
fn abelian_decomposition(
    table: &[Vec<usize>],
    id: usize,
) -> Result<(Vec<u64>, Vec<Vec<u64>>)> {
    let n = table.len();
    let mut gens: Vec<usize> = Vec::new();
    let mut orders: Vec<u64> = Vec::new();
    // exps: element -> exponent vector over current generators.
    let mut span: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    span.insert(id, vec![]);
    while span.len() < n {
        // Element of maximal order modulo the current span (smallest index
        // breaks ties, keeping the construction deterministic).
        let mut best: Option<(u64, usize)> = None;
        for g in 0..n {
            if span.contains_key(&g) {
                continue;
            }
            let mut acc = g;
            let mut m = 1u64;
            while !span.contains_key(&acc) {
                acc = table[acc][g];
                m += 1;
            }
            if best.as_ref().map_or(true, |(bm, _)| m > *bm) {
                best = Some((m, g));
            }
        }
        let (m, g) = best.expect("span is proper");
        // g^m lies in the span; pull out an m-th root to correct g into a
        // direct summand (exponents are divisible by m for the maximal choice).
        let gm = group_pow(table, id, g, m);
        let c = span.get(&gm).expect("g^m in span").clone();
        let mut corrected = g;
        for (j, cj) in c.iter().enumerate() {
            if cj % m != 0 {
                return Err(Error::nonconv("abelian decomposition invariant violated"));
            }
            let oj = orders[j];
            let e = (oj - (cj / m) % oj) % oj; // exponent of the inverse root
            let gj_pow = group_pow(table, id, gens[j], e);
            corrected = table[corrected][gj_pow];
        }
        // Rebuild the span as the direct product with the corrected generator.
        let prev: Vec<(usize, Vec<u64>)> = span.iter().map(|(k, v)| (*k, v.clone())).collect();
        let mut next: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        let mut acc = id;
        for e in 0..m {
            for (s, ev) in &prev {
                let elt = table[*s][acc];
                let mut v = ev.clone();
                v.push(e);
                if next.insert(elt, v).is_some() {
                    return Err(Error::nonconv("generator does not extend a direct product"));
                }
            }
            acc = table[acc][corrected];
        }
        gens.push(corrected);
        orders.push(m);
        span = next;
    }
    let mut exps = vec![vec![]; n];
    for (elt, v) in span {
        exps[elt] = v;
    }
    Ok((orders, exps))
}

fn character_table(orders: &[u64], exps: &[Vec<u64>]) -> Vec<Vec<Complex64>> {
    let n = exps.len();
    let total: u64 = orders.iter().product::<u64>().max(1);
    assert_eq!(total as usize, n);
    // Characters indexed by their own exponent vectors.
    let mut chars = Vec::with_capacity(n);
    let mut kvec = vec![0u64; orders.len()];
    loop {
        let mut row = Vec::with_capacity(n);
        for e in exps {
            let mut phase = 0.0f64;
            for ((k, o), x) in kvec.iter().zip(orders).zip(e) {
                phase += 2.0 * std::f64::consts::PI * (*k as f64) * (*x as f64) / (*o as f64);
            }
            row.push(Complex64::new(phase.cos(), phase.sin()));
        }
        chars.push(row);
        let mut j = 0;
        loop {
            if j == kvec.len() {
                return chars;
            }
            kvec[j] += 1;
            if kvec[j] < orders[j] {
                break;
            }
            kvec[j] = 0;
            j += 1;
        }
    }
}

/// Every homothety class of full lattices stable under the equation order:
/// representatives lie between f a and a where a runs over maximal-order
/// ideal class representatives and f is the conductor index [O_K : Z[t]].
pub fn enumerate_coarse_classes(field: &NumField) -> Result<Vec<QLattice>> {
    let ok = maximal_order(field)?;
    // [O_K : Z[t]]^2 = disc(P) / disc(O_K).
    let idx2 =
        BigRational::from_integer(field.poly.disc()) / BigRational::from_integer(ok.disc());
    assert!(idx2.is_integer());
    let f = idx2.to_integer().sqrt();
    let pic = picard_group(&ok)?;
    let fu = f.to_u64().ok_or_else(|| Error::cap("conductor too large"))?;
    let gen = field.gen();
    let mut seen: BTreeSet<QLattice> = BTreeSet::new();
    let mut out = Vec::new();
    let window = divisors(fu.pow(field.n as u32));
    for class in &pic.classes {
        // Integral representative of the class.
        let a = class.scale(&BigRational::from_integer(class.den.clone()));
        let fa = a.scale(&BigRational::from_integer(f.clone()));
        for &m in &window {
            for cand in stable_sublattices(field, &a, &[gen.clone()], m) {
                // Keep only lattices containing f a.
                if !cand.contains_lattice(&fa) {
                    continue;
                }
                let rep = canonical_class_rep(field, &cand)?;
                if seen.insert(rep.clone()) {
                    out.push(rep);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}
