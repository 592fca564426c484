//! Character sums over ideal classes in norm-bounded families.
//!
//! For a Picard character psi and a cutoff delta, the ratio
//! sum psi([a]) / count over integral invertible ideals of norm at most
//! delta * sqrt(disc) measures how evenly the classes fill the group at the
//! scale where equidistribution first has teeth: the trivial character gives
//! exactly 1, and cancellation for every nontrivial character is the
//! class-group shadow of the orbit statistics.

use crate::classes::{ideals_of_bounded_norm, is_invertible_ideal, PicardGroup};
use crate::error::{Error, Result};
use crate::order::Order;
use crate::reduce::{canonical_class_rep_cached, UnitCache};
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};

/// Index of the trivial character in the table (the all-ones row).
pub fn trivial_character(pic: &PicardGroup) -> usize {
    pic.characters
        .iter()
        .position(|row| row.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-9))
        .expect("character table always contains the trivial row")
}

/// Average of psi over the classes of integral invertible ideals of norm at
/// most delta * sqrt(|disc O|); exactly 1 for the trivial character.
pub fn class_character_sum(
    order: &Order,
    pic: &PicardGroup,
    character: usize,
    delta: f64,
) -> Result<Complex64> {
    if character >= pic.characters.len() {
        return Err(Error::invalid("character index out of range"));
    }
    let bound = (delta * order.disc().abs().to_f64().unwrap().sqrt()).floor();
    if bound < 1.0 {
        return Err(Error::invalid("cutoff admits no ideals"));
    }
    let ideals = ideals_of_bounded_norm(order, bound as u64, 2_000_000)?;
    let mut cache = UnitCache::new();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut count = 0u64;
    for idl in ideals.iter().filter(|l| is_invertible_ideal(order, l)) {
        let rep = canonical_class_rep_cached(&order.field, idl, &mut cache)?;
        let idx = pic
            .classes
            .iter()
            .position(|c| *c == rep)
            .ok_or_else(|| Error::nonconv("ideal class missing from the Picard table"))?;
        sum += pic.characters[character][idx];
        count += 1;
    }
    if count == 0 {
        return Err(Error::invalid("cutoff admits no invertible ideals"));
    }
    Ok(sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::picard_group;
    use crate::numfield::NumField;
    use crate::order::maximal_order;

    fn order_of(p: &str) -> Order {
        let field = NumField::new(p.parse().unwrap()).unwrap();
        maximal_order(&field).unwrap()
    }

    #[test]
    fn trivial_character_averages_to_one() {
        let ord = order_of("x^2 + 5");
        let pic = picard_group(&ord).unwrap();
        assert_eq!(pic.order(), 2);
        let r = class_character_sum(&ord, &pic, trivial_character(&pic), 2.0).unwrap();
        assert_eq!(r, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn conjugate_characters_give_conjugate_ratios() {
        // Class number 3: the two nontrivial characters are conjugates.
        let ord = order_of("x^2 + 23");
        let pic = picard_group(&ord).unwrap();
        assert_eq!(pic.order(), 3);
        let mut pair = None;
        'outer: for i in 0..3 {
            for j in 0..3 {
                if i != j
                    && pic.characters[i]
                        .iter()
                        .zip(&pic.characters[j])
                        .all(|(a, b)| (a - b.conj()).norm() < 1e-12)
                    && i != trivial_character(&pic)
                {
                    pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        let (i, j) = pair.expect("conjugate pair exists in a cyclic group of order 3");
        let ri = class_character_sum(&ord, &pic, i, 3.0).unwrap();
        let rj = class_character_sum(&ord, &pic, j, 3.0).unwrap();
        assert!((ri - rj.conj()).norm() < 1e-12);
        assert!(ri.norm() <= 1.0 + 1e-12);
        // Nontrivial characters must show some cancellation at this cutoff.
        assert!(ri.norm() < 1.0);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let ord = order_of("x^2 + 5");
        let pic = picard_group(&ord).unwrap();
        assert!(class_character_sum(&ord, &pic, 99, 1.0).is_err());
        assert!(class_character_sum(&ord, &pic, 0, 1e-9).is_err());
    }
}
