//! Fractional-ideal operations on full-rank lattices in K = Q[t]/(P):
//! products, colon lattices, norms, invertibility, local homothety testing,
//! and a JSON wire form with exact decimal-string entries.

use crate::error::{Error, Result};
use crate::numfield::{Elt, NumField};
use crate::order::Order;
use crate::padic::v_p_int;
use crate::poly::MonicIntPoly;
use crate::zmat::{preimage_lattice, QLattice, QMat, ZMat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Product lattice: the Z-span of all pairwise products of basis elements.
pub fn ideal_mul(field: &NumField, a: &QLattice, b: &QLattice) -> QLattice {
    let qa = a.to_qmat();
    let qb = b.to_qmat();
    let mut rows: Vec<Elt> = Vec::with_capacity(qa.nrows * qb.nrows);
    for i in 0..qa.nrows {
        for j in 0..qb.nrows {
            rows.push(field.mul(&qa.row(i).to_vec(), &qb.row(j).to_vec()));
        }
    }
    let m = QMat::from_fn(rows.len(), field.n, |i, j| rows[i][j].clone());
    QLattice::from_qmat(&m)
}

/// Principal fractional ideal x * O.
pub fn principal(order: &Order, x: &Elt) -> QLattice {
    assert!(!order.field.is_zero(x));
    order.lat.mul_qmat(&order.field.mul_matrix(x))
}

/// Colon lattice `(a : b) = { x in K : x b <= a }` for full-rank `a`, `b`.
pub fn colon(field: &NumField, a: &QLattice, b: &QLattice) -> QLattice {
    assert!(a.is_full_rank() && b.is_full_rank());
    let ainv = a.to_qmat().inverse().expect("full-rank lattice basis");
    let qb = b.to_qmat();
    let mut w: Option<QMat> = None;
    for i in 0..qb.nrows {
        let cond = field.mul_matrix(&qb.row(i).to_vec()).mul(&ainv);
        w = Some(match w {
            None => cond,
            Some(prev) => QMat::concat_cols(&prev, &cond),
        });
    }
    let (c, wint) = w.unwrap().clear_denoms();
    preimage_lattice(&wint).scale(&BigRational::from_integer(c))
}

/// Norm of a fractional ideal relative to an order: the generalized index
/// `[O : L]`, i.e. covol(L)/covol(O).
pub fn ideal_norm(order: &Order, lat: &QLattice) -> BigRational {
    lat.covolume_q() / order.lat.covolume_q()
}

pub fn is_integral(order: &Order, lat: &QLattice) -> bool {
    order.lat.contains_lattice(lat)
}

/// `(O : L)`, the candidate inverse.
pub fn ideal_quotient_by_order(order: &Order, lat: &QLattice) -> QLattice {
    colon(&order.field, &order.lat, lat)
}

/// A fractional O-ideal L is invertible iff L * (O : L) = O.
pub fn is_invertible(order: &Order, lat: &QLattice) -> bool {
    let inv = ideal_quotient_by_order(order, lat);
    ideal_mul(&order.field, lat, &inv) == order.lat
}

/// Search for a local homothety at p: an element `lambda` with
/// `lambda * (L2 tensor Z_p) = L1 tensor Z_p`. The search space is
/// `(L1 : L2) / p^k (L1 : L2)` with `k` bounded by the index valuations and
/// `v_p(disc P)`, which suffices for a witness to exist when one exists at
/// all. Returns a witness or `None`; errors when the search space is too
/// large to sweep.
pub fn local_homothety(field: &NumField, l1: &QLattice, l2: &QLattice, p: &BigInt) -> Result<Option<Elt>> {
    assert!(l1.is_full_rank() && l2.is_full_rank());
    let n = field.n;
    let meet = l1.intersect(l2);
    let i1 = meet.index_in(l1).expect("intersection is a sublattice");
    let i2 = meet.index_in(l2).expect("intersection is a sublattice");
    let disc = field.poly.disc();
    let k = v_p_int(&i1, p) + v_p_int(&i2, p) + v_p_int(&disc, p) + 1;
    let pk = p.pow(k);
    let span: BigInt = {
        let mut s = BigInt::one();
        for _ in 0..n {
            s *= &pk;
        }
        s
    };
    if span > BigInt::from(20_000_000u64) {
        return Err(Error::cap(format!(
            "local homothety search space p^(k*n) = {span} too large"
        )));
    }
    let cands = colon(field, l1, l2);
    let cq = cands.to_qmat();
    let mut digits = vec![BigInt::zero(); n];
    loop {
        // Advance the odometer.
        let mut idx = 0;
        loop {
            digits[idx] += 1;
            if digits[idx] < pk {
                break;
            }
            digits[idx] = BigInt::zero();
            idx += 1;
            if idx == n {
                return Ok(None);
            }
        }
        let mut lambda = field.zero();
        for (i, d) in digits.iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            let row = cq.row(i).to_vec();
            lambda = field.add(&lambda, &field.scale(&row, &BigRational::from_integer(d.clone())));
        }
        if field.is_zero(&lambda) || field.norm(&lambda).is_zero() {
            continue;
        }
        let moved = l2.mul_qmat(&field.mul_matrix(&lambda));
        let cap = l1.intersect(&moved);
        let j1 = cap.index_in(l1).expect("sublattice");
        let j2 = cap.index_in(&moved).expect("sublattice");
        if v_p_int(&j1, p) == 0 && v_p_int(&j2, p) == 0 {
            return Ok(Some(lambda));
        }
    }
}

/// JSON wire form of a lattice over a fixed polynomial; all numbers are
/// exact decimal strings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct IdealJson {
    pub poly: String,
    pub den: String,
    pub hnf: Vec<Vec<String>>,
}

impl IdealJson {
    pub fn from_lattice(poly: &MonicIntPoly, lat: &QLattice) -> Self {
        let hnf = (0..lat.basis.nrows)
            .map(|i| (0..lat.basis.ncols).map(|j| lat.basis.at(i, j).to_string()).collect())
            .collect();
        IdealJson { poly: poly.to_string(), den: lat.den.to_string(), hnf }
    }

    pub fn to_lattice(&self) -> Result<(MonicIntPoly, QLattice)> {
        let poly: MonicIntPoly = self.poly.parse()?;
        let den: BigInt = self
            .den
            .parse()
            .map_err(|_| Error::invalid(format!("bad denominator '{}'", self.den)))?;
        if !den.is_positive() {
            return Err(Error::invalid("denominator must be positive"));
        }
        let nrows = self.hnf.len();
        if nrows == 0 {
            return Err(Error::invalid("empty basis"));
        }
        let ncols = self.hnf[0].len();
        let mut m = ZMat::zero(nrows, ncols);
        for (i, row) in self.hnf.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::invalid("ragged basis rows"));
            }
            for (j, s) in row.iter().enumerate() {
                *m.at_mut(i, j) = s
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad basis entry '{s}'")))?;
            }
        }
        Ok((poly, QLattice::new(den, m)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(s: &str) -> (NumField, Order) {
        let k = NumField::new(s.parse().unwrap()).unwrap();
        let o = Order::equation_order(&k);
        (k, o)
    }

    fn span(field: &NumField, gens: &[&[i64]]) -> QLattice {
        let rows: Vec<Elt> = gens.iter().map(|g| field.from_i64(g)).collect();
        let m = QMat::from_fn(rows.len(), field.n, |i, j| rows[i][j].clone());
        QLattice::from_qmat(&m)
    }

    #[test]
    fn ramified_prime_squares_to_two() {
        // In Z[sqrt(-5)], (2, 1+t)^2 = (2).
        let (k, o) = setup("x^2 + 5");
        let p2 = span(&k, &[&[2, 0], &[1, 1]]);
        let sq = ideal_mul(&k, &p2, &p2);
        let two = principal(&o, &k.from_i64(&[2, 0]));
        assert_eq!(sq, two);
        assert_eq!(ideal_norm(&o, &p2), BigRational::from_integer(BigInt::from(2)));
        assert!(is_integral(&o, &p2));
    }

    #[test]
    fn invertibility_in_maximal_and_nonmaximal_orders() {
        let (k, o) = setup("x^2 + 5");
        let p2 = span(&k, &[&[2, 0], &[1, 1]]);
        // Maximal order Z[sqrt(-5)]: every nonzero ideal is invertible.
        assert!(is_invertible(&o, &p2));
        // Non-maximal order Z[2i] inside Q(i): the lattice Z + Z*2i is the
        // order itself; the ideal (2, 2i) is not invertible over it.
        let ki = NumField::new("x^2 + 4".parse().unwrap()).unwrap();
        let oi = Order::equation_order(&ki);
        let bad = span(&ki, &[&[2, 0], &[0, 1]]);
        assert!(is_integral(&oi, &bad));
        assert!(!is_invertible(&oi, &bad));
    }

    #[test]
    fn colon_and_inverse_roundtrip() {
        let (k, o) = setup("x^2 - x - 1");
        // Principal ideal generated by 2 + t.
        let x = k.from_i64(&[2, 1]);
        let ideal = principal(&o, &x);
        let inv = ideal_quotient_by_order(&o, &ideal);
        assert_eq!(ideal_mul(&k, &ideal, &inv), o.lat);
        // (O : xO) = (1/x) O.
        let xinv = k.inverse(&x).unwrap();
        assert_eq!(inv, principal(&o, &xinv));
    }

    #[test]
    fn norm_is_multiplicative_on_coprime_ideals() {
        let (k, o) = setup("x^2 + 5");
        let p2 = span(&k, &[&[2, 0], &[1, 1]]);
        let p3 = span(&k, &[&[3, 0], &[1, 1]]);
        let prod = ideal_mul(&k, &p2, &p3);
        assert_eq!(
            ideal_norm(&o, &prod),
            ideal_norm(&o, &p2) * ideal_norm(&o, &p3)
        );
    }

    #[test]
    fn local_homothety_finds_witness_for_principal_shift() {
        let (k, o) = setup("x^2 + 5");
        let p = BigInt::from(2);
        // L2 = O, L1 = t*O: globally homothetic, hence locally too.
        let l1 = principal(&o, &k.gen());
        let w = local_homothety(&k, &l1, &o.lat, &p).unwrap();
        assert!(w.is_some());
        // (2, 1+t) is ramified over 2: not locally homothetic to O at 2.
        let p2 = span(&k, &[&[2, 0], &[1, 1]]);
        // ... but it *is* locally homothetic to O at 3.
        let w3 = local_homothety(&k, &p2, &o.lat, &BigInt::from(3)).unwrap();
        assert!(w3.is_some());
    }

    #[test]
    fn local_homothety_detects_obstruction() {
        // Over Z[2i], the ideal (2, 2i) is not locally homothetic to the
        // order at 2 (it is not locally principal there).
        let ki = NumField::new("x^2 + 4".parse().unwrap()).unwrap();
        let oi = Order::equation_order(&ki);
        let bad = span(&ki, &[&[2, 0], &[0, 1]]);
        let w = local_homothety(&ki, &bad, &oi.lat, &BigInt::from(2)).unwrap();
        assert!(w.is_none());
        // At 3 it is locally trivial.
        let w3 = local_homothety(&ki, &bad, &oi.lat, &BigInt::from(3)).unwrap();
        assert!(w3.is_some());
    }

    #[test]
    fn json_roundtrip() {
        let (k, o) = setup("x^3 - x - 1");
        let half = o.lat.scale(&BigRational::new(BigInt::from(3), BigInt::from(2)));
        let json = IdealJson::from_lattice(&k.poly, &half);
        let text = serde_json::to_string(&json).unwrap();
        let back: IdealJson = serde_json::from_str(&text).unwrap();
        let (poly, lat) = back.to_lattice().unwrap();
        assert_eq!(poly, k.poly);
        assert_eq!(lat, half);
        assert_eq!(json.den, "2");
        assert_eq!(json.hnf[0][0], "3");
    }
}
