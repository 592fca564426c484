//! Orders in K = Q[t]/(P): the equation order Z[t], multiplier rings of
//! lattices, and the maximal order via the radical-idealizer iteration.

use crate::error::{Error, Result};
use crate::numfield::{Elt, NumField};
use crate::padic::{factor_bigint, fp_kernel};
use crate::zmat::{QLattice, QMat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// An order: a full-rank subring of K containing 1, stored as a [`QLattice`]
/// over the power basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Order {
    pub field: NumField,
    pub lat: QLattice,
}

impl Order {
    /// The equation order Z[t].
    pub fn equation_order(field: &NumField) -> Order {
        Order { field: field.clone(), lat: QLattice::standard(field.n) }
    }

    /// Wrap a lattice after verifying the ring axioms.
    pub fn from_lattice(field: &NumField, lat: QLattice) -> Result<Order> {
        if !lat.is_full_rank() || lat.dim() != field.n {
            return Err(Error::invalid("order lattice must have full rank n"));
        }
        if !lat.contains(&field.one()) {
            return Err(Error::invalid("order must contain 1"));
        }
        let basis = basis_elts_of(field, &lat);
        for a in &basis {
            for b in &basis {
                if !lat.contains(&field.mul(a, b)) {
                    return Err(Error::invalid("lattice is not closed under multiplication"));
                }
            }
        }
        Ok(Order { field: field.clone(), lat })
    }

    pub fn basis_elts(&self) -> Vec<Elt> {
        basis_elts_of(&self.field, &self.lat)
    }

    pub fn contains(&self, x: &Elt) -> bool {
        self.lat.contains(x)
    }

    /// Discriminant: determinant of the trace form on an integral basis.
    pub fn disc(&self) -> BigInt {
        let basis = self.basis_elts();
        let n = self.field.n;
        let t = QMat::from_fn(n, n, |i, j| self.field.trace_of_product(&basis[i], &basis[j]));
        let d = t.det();
        assert!(d.is_integer(), "order discriminant must be an integer");
        d.to_integer()
    }

    /// Index `[O : Z[t]]` as a rational (an integer when Z[t] is contained).
    pub fn index_over_equation_order(&self) -> BigRational {
        let covol = self.lat.covolume_q();
        assert!(!covol.is_zero());
        covol.recip()
    }
}

fn basis_elts_of(field: &NumField, lat: &QLattice) -> Vec<Elt> {
    let q = lat.to_qmat();
    assert_eq!(q.ncols, field.n);
    (0..q.nrows).map(|i| q.row(i).to_vec()).collect()
}

/// The multiplier ring `(L : L) = { x in K : x L <= L }` of a full-rank
/// lattice; always an order.
pub fn multiplier_ring(field: &NumField, lat: &QLattice) -> QLattice {
    assert!(lat.is_full_rank() && lat.dim() == field.n);
    crate::ideal::colon(field, lat, lat)
}

/// The radical of pO in O: elements whose p^j-th power (p^j >= n) lies in pO,
/// computed as the kernel of the Frobenius-power map on O/pO.
pub fn p_radical(order: &Order, p: &BigInt) -> QLattice {
    let field = &order.field;
    let n = field.n;
    let mut pj = p.clone();
    while pj < BigInt::from(n as u64) {
        pj *= p;
    }
    let basis = order.basis_elts();
    let frob = crate::zmat::ZMat::from_fn(n, n, |i, j| {
        use num_traits::ToPrimitive;
        let pow = field.pow(&basis[i], pj.to_u64().expect("tiny exponent"));
        let coords = order.lat.coords(&pow).expect("power stays in the order");
        assert!(coords[j].is_integer());
        coords[j].to_integer()
    });
    let kernel = fp_kernel(&frob, p);
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for k in &kernel {
        let mut elt = field.zero();
        for (i, ki) in k.iter().enumerate() {
            let scaled = field.scale(&basis[i], &BigRational::from_integer(ki.clone()));
            elt = field.add(&elt, &scaled);
        }
        rows.push(elt);
    }
    let pq = BigRational::from_integer(p.clone());
    for b in &basis {
        rows.push(field.scale(b, &pq));
    }
    let m = QMat::from_fn(rows.len(), n, |i, j| rows[i][j].clone());
    QLattice::from_qmat(&m)
}

/// Maximal order by the radical-idealizer (round two) iteration, enlarging
/// at every prime whose square divides the equation-order discriminant.
pub fn maximal_order(field: &NumField) -> Result<Order> {
    let mut ord = Order::equation_order(field);
    let disc = ord.disc();
    if disc.is_zero() {
        return Err(Error::invalid("inseparable polynomial"));
    }
    for (p, e) in factor_bigint(&disc)? {
        if e < 2 {
            continue;
        }
        loop {
            let rad = p_radical(&ord, &p);
            let bigger = multiplier_ring(field, &rad);
            if bigger == ord.lat {
                break;
            }
            assert!(
                bigger.contains_lattice(&ord.lat),
                "idealizer must grow the order"
            );
            ord = Order { field: field.clone(), lat: bigger };
        }
    }
    Ok(ord)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmat::ZMat;
    use num_traits::One;

    fn field(s: &str) -> NumField {
        NumField::new(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn equation_order_disc_matches_poly_disc() {
        for s in ["x^2 - x - 1", "x^2 + 5", "x^3 - x - 1", "x^3 - 2"] {
            let k = field(s);
            let o = Order::equation_order(&k);
            assert_eq!(o.disc(), k.poly.disc());
        }
    }

    #[test]
    fn maximal_order_eisenstein_case() {
        // Z[t]/(t^2+3) enlarges to Z[(1+t)/2] with discriminant -3.
        let k = field("x^2 + 3");
        let o = maximal_order(&k).unwrap();
        assert_eq!(o.disc(), BigInt::from(-3));
        assert_eq!(o.lat, QLattice::new(BigInt::from(2), ZMat::from_i64_rows(&[vec![1, 1], vec![0, 2]])));
        let half = vec![
            BigRational::new(BigInt::one(), BigInt::from(2)),
            BigRational::new(BigInt::one(), BigInt::from(2)),
        ];
        assert!(o.contains(&half));
    }

    #[test]
    fn maximal_order_already_maximal() {
        for (s, d) in [("x^2 - x - 1", 5i64), ("x^2 + 1", -4), ("x^3 - x - 1", -23), ("x^3 - 2", -108)] {
            let k = field(s);
            let o = maximal_order(&k).unwrap();
            assert_eq!(o.disc(), BigInt::from(d), "{s}");
            assert_eq!(o.lat, QLattice::standard(k.n), "{s}");
        }
    }

    #[test]
    fn maximal_order_dedekind_cubic() {
        // x^3 + x^2 - 2x + 8: equation order has index 2, field disc -503.
        let k = field("x^3 + x^2 - 2x + 8");
        let o = maximal_order(&k).unwrap();
        assert_eq!(o.disc(), BigInt::from(-503));
        assert_eq!(o.index_over_equation_order(), BigRational::from_integer(BigInt::from(2)));
        let check = Order::from_lattice(&k, o.lat.clone()).unwrap();
        assert_eq!(check, o);
    }

    #[test]
    fn multiplier_ring_of_order_is_itself() {
        for s in ["x^2 + 3", "x^3 - x - 1", "x^3 + x^2 - 2x + 8"] {
            let k = field(s);
            let o = maximal_order(&k).unwrap();
            assert_eq!(multiplier_ring(&k, &o.lat), o.lat);
            let eq = Order::equation_order(&k);
            assert_eq!(multiplier_ring(&k, &eq.lat), eq.lat);
        }
    }

    #[test]
    fn multiplier_ring_is_homothety_invariant() {
        let k = field("x^3 - x - 1");
        let lat = QLattice::new(
            BigInt::from(3),
            ZMat::from_i64_rows(&[vec![6, 0, 0], vec![2, 2, 0], vec![1, 0, 1]]),
        );
        let rm = multiplier_ring(&k, &lat);
        // Scale by a rational.
        let c = BigRational::new(BigInt::from(7), BigInt::from(4));
        assert_eq!(multiplier_ring(&k, &lat.scale(&c)), rm);
        // Multiply by the field element t (a nontrivial homothety).
        let tm = k.mul_matrix(&k.gen());
        let tlat = lat.mul_qmat(&tm);
        assert_eq!(multiplier_ring(&k, &tlat), rm);
        // And the multiplier ring really is a ring multiplying lat into itself.
        let ord = Order::from_lattice(&k, rm.clone()).unwrap();
        for b in ord.basis_elts() {
            assert!(lat.contains_lattice(&lat.mul_qmat(&k.mul_matrix(&b))));
        }
    }

    #[test]
    fn radical_contains_p_times_order() {
        let k = field("x^2 + 3");
        let o = Order::equation_order(&k);
        let rad = p_radical(&o, &BigInt::from(2));
        let two_o = o.lat.scale(&BigRational::from_integer(BigInt::from(2)));
        assert!(rad.contains_lattice(&two_o));
        assert!(o.lat.contains_lattice(&rad));
        // 1 + t is in the radical: (1+t)^2 = -2 + 2t is in 2*Z[t].
        let v = k.from_i64(&[1, 1]);
        assert!(rad.contains(&v));
    }
}
