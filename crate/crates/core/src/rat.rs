//! Exact rational scalars with a canonical `"p/q"` wire form.
//!
//! Every quantity in this crate (function values, oscillation thresholds,
//! norm bounds) is an exact rational; no floating point appears anywhere.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An exact rational in canonical reduced form (gcd 1, positive denominator).
///
/// Serializes as the string `"p/q"`; parsing rejects non-canonical input
/// such as `"2/4"` or `"1/-2"`. A bare integer string `"p"` is accepted as
/// shorthand for `"p/1"`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `n/d`, reducing to canonical form. `d` must be nonzero.
    pub fn new(n: i64, d: i64) -> Self {
        assert!(d != 0, "rational with zero denominator");
        Rat(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn max(self, other: Rat) -> Rat {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Rat) -> Rat {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Smallest integer `m >= 1` with `self / m <= bound`; `bound` must be
    /// positive. Used to pick staircase granularities.
    pub fn div_ceil_at_least_one(&self, bound: &Rat) -> u64 {
        assert!(bound.is_positive(), "granularity bound must be positive");
        if self <= bound {
            return 1;
        }
        // ceil(self / bound) as an integer
        let q = &self.0 / &bound.0;
        let t = q.trunc();
        let m = if q == t { t.to_integer() } else { t.to_integer() + 1 };
        u64::try_from(m).expect("granularity overflow")
    }

    /// `floor(self / w)` for positive `w`. Used to assign staircase bands.
    pub fn floor_div(&self, w: &Rat) -> i64 {
        assert!(w.is_positive(), "band width must be positive");
        let q = (&self.0 / &w.0).floor().to_integer();
        i64::try_from(q).expect("band index overflow")
    }

    /// Strict canonical parser for the wire form.
    pub fn parse(s: &str) -> Result<Rat, Error> {
        let reject = |msg: &str| Error::Schema {
            path: String::new(),
            msg: format!("invalid rational {s:?}: {msg}"),
        };
        let (np, dp) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let num = BigInt::from_str(np).map_err(|_| reject("bad numerator"))?;
        if np != num.to_string() {
            // rejects "+1", "-0", "007", ...
            return Err(reject("non-canonical numerator"));
        }
        let den = match dp {
            None => BigInt::one(),
            Some(d) => {
                let den = BigInt::from_str(d).map_err(|_| reject("bad denominator"))?;
                if d != den.to_string() {
                    return Err(reject("non-canonical denominator"));
                }
                den
            }
        };
        if den.is_zero() {
            return Err(reject("zero denominator"));
        }
        if den.is_negative() {
            return Err(reject("denominator must be positive"));
        }
        let r = BigRational::new(num.clone(), den.clone());
        if r.numer() != &num || r.denom() != &den {
            return Err(reject("not in reduced form"));
        }
        Ok(Rat(r))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Rat::parse(&s).map_err(|e| D::Error::custom(e.to_string()))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Div for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rat(&self.0 / &rhs.0)
    }
}

impl Div for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        &self / &rhs
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

/// Maximum of a nonempty iterator of rationals.
pub fn rat_max<'a, I: IntoIterator<Item = &'a Rat>>(iter: I) -> Option<Rat> {
    iter.into_iter().max().cloned()
}

/// Minimum of a nonempty iterator of rationals.
pub fn rat_min<'a, I: IntoIterator<Item = &'a Rat>>(iter: I) -> Option<Rat> {
    iter.into_iter().min().cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_accepts_canonical_forms() {
        assert_eq!(Rat::parse("1/2").unwrap(), Rat::new(1, 2));
        assert_eq!(Rat::parse("-3/4").unwrap(), Rat::new(-3, 4));
        assert_eq!(Rat::parse("0/1").unwrap(), Rat::zero());
        assert_eq!(Rat::parse("5").unwrap(), Rat::from_int(5));
        assert_eq!(Rat::parse("-2").unwrap(), Rat::from_int(-2));
    }

    #[test]
    fn parse_rejects_non_canonical_forms() {
        for s in ["2/4", "1/-2", "-0/1", "0/3", "+1/2", "1/0", "", "1/", "/2", "01/2", "a/b"] {
            assert!(Rat::parse(s).is_err(), "should reject {s:?}");
        }
    }

    #[test]
    fn display_always_uses_slash_form() {
        assert_eq!(Rat::from_int(3).to_string(), "3/1");
        assert_eq!(Rat::new(-1, 2).to_string(), "-1/2");
        assert_eq!(Rat::zero().to_string(), "0/1");
    }

    #[test]
    fn arithmetic_reduces() {
        let r = &Rat::new(1, 6) + &Rat::new(1, 3);
        assert_eq!(r, Rat::new(1, 2));
        assert_eq!((&Rat::new(2, 3) * &Rat::new(3, 4)), Rat::new(1, 2));
        assert_eq!((&Rat::new(1, 2) - &Rat::new(1, 2)), Rat::zero());
    }

    #[test]
    fn granularity_rounding() {
        assert_eq!(Rat::new(3, 4).div_ceil_at_least_one(&Rat::new(1, 100)), 75);
        assert_eq!(Rat::new(3, 4).div_ceil_at_least_one(&Rat::new(1, 99)), 75);
        assert_eq!(Rat::new(1, 2).div_ceil_at_least_one(&Rat::one()), 1);
        assert_eq!(Rat::zero().div_ceil_at_least_one(&Rat::new(1, 10)), 1);
    }
}
