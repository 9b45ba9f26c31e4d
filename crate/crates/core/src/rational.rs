//! Exact rational scalars.
//!
//! Every probability, share, supply, and time in this crate is a
//! [`Rat`]: an arbitrary-precision fraction kept in lowest terms with a
//! positive denominator. There is no floating point anywhere.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Arbitrary-precision rational. `num_rational` normalizes on construction,
/// which gives us the lowest-terms / positive-denominator invariants for free.
pub type Rat = num_rational::BigRational;

/// Shorthand for small constants: `rat(1, 12)` is 1/12.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// Parse `"num/den"`; a bare integer is read as `k/1`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || Error::InvalidRational(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let numer: BigInt = n.parse().map_err(|_| bad())?;
    let denom: BigInt = d.parse().map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rat::new(numer, denom))
}

/// Render as lowest-terms `"num/den"`; integers come out as `"k/1"`.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// True iff `r` lies in the closed unit interval.
pub fn in_unit_interval(r: &Rat) -> bool {
    !r.is_negative() && *r <= Rat::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["1/6", "3/20", "-2/7", "0/1", "41/1"] {
            assert_eq!(format_rat(&parse_rat(s).unwrap()), s);
        }
    }

    #[test]
    fn parse_normalizes_to_lowest_terms() {
        assert_eq!(format_rat(&parse_rat("2/4").unwrap()), "1/2");
        assert_eq!(format_rat(&parse_rat("3/-6").unwrap()), "-1/2");
        assert_eq!(format_rat(&parse_rat("5").unwrap()), "5/1");
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "a/b", "1/0", "1.5", "1/2/3"] {
            assert!(parse_rat(s).is_err(), "{s:?} should not parse");
        }
    }
}
