//! Arbitrary-precision rationals.
//!
//! `BigRat` is `num_rational::BigRational`, which keeps every value in lowest
//! terms with a positive denominator. This module adds the string format used
//! in every JSON document ("p/q", or "p" for integers) and a few helpers.

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type BigRat = BigRational;

pub fn rat(n: i64) -> BigRat {
    BigRat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> BigRat {
    BigRat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: BigInt) -> BigRat {
    BigRat::from_integer(n)
}

pub fn parse_rat(s: &str) -> Result<BigRat> {
    let t = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        Ok(BigRat::new(n, d))
    } else {
        Ok(int(BigInt::from_str(t).map_err(|_| bad())?))
    }
}

/// "p/q" with q > 1, or "p" when the value is an integer.
pub fn fmt_rat(x: &BigRat) -> String {
    x.to_string()
}

pub fn is_integral(x: &BigRat) -> bool {
    x.denom().is_one()
}

/// True when every prime factor of the denominator lies in `primes`.
pub fn is_s_integral(x: &BigRat, primes: &[u64]) -> bool {
    let mut d = x.denom().clone();
    for &p in primes {
        let p = BigInt::from(p);
        while (&d % &p).is_zero() {
            d /= &p;
        }
    }
    d.is_one()
}

/// True when `x` is ± a product of powers of `primes` (a unit of Z[1/S]).
pub fn is_s_unit_rational(x: &BigRat, primes: &[u64]) -> bool {
    if x.is_zero() {
        return false;
    }
    let strip = |mut v: BigInt| {
        v = v.abs();
        for &p in primes {
            let p = BigInt::from(p);
            while (&v % &p).is_zero() {
                v /= &p;
            }
        }
        v
    };
    strip(x.numer().clone()).is_one() && strip(x.denom().clone()).is_one()
}

pub fn to_f64(x: &BigRat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: scale through the bit lengths.
        let nb = x.numer().bits() as i64;
        let db = x.denom().bits() as i64;
        let shift = nb - db;
        let scaled = if shift > 0 {
            BigRat::new(x.numer().clone(), x.denom() << (shift as usize))
        } else {
            BigRat::new(x.numer() << ((-shift) as usize), x.denom().clone())
        };
        scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
    })
}

/// Nearest dyadic rational k / 2^bits below (or equal to) `x`.
pub fn round_down(x: &BigRat, bits: u32) -> BigRat {
    let scale = BigInt::one() << bits as usize;
    let scaled = x * int(scale.clone());
    BigRat::new(scaled.numer().div_floor(scaled.denom()), scale)
}

/// Nearest dyadic rational k / 2^bits above (or equal to) `x`.
pub fn round_up(x: &BigRat, bits: u32) -> BigRat {
    let scale = BigInt::one() << bits as usize;
    let scaled = x * int(scale.clone());
    BigRat::new(scaled.numer().div_ceil(scaled.denom()), scale)
}

pub fn from_f64(x: f64) -> BigRat {
    BigRat::from_float(x).unwrap_or_else(BigRat::zero)
}

pub fn rat_pow(x: &BigRat, e: u32) -> BigRat {
    num_traits::pow(x.clone(), e as usize)
}

/// Exponent of `p` in `n`; `u32::MAX` for zero.
pub fn valuation(mut n: BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut v = 0;
    if n.is_zero() {
        return u32::MAX;
    }
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

pub mod serde_rat {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigRat, s: S) -> std::result::Result<S::Ok, S::Error> {
        fmt_rat(x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// A rational read from its own JSON string, so parse errors carry the
/// element's path.
pub(crate) struct RatStr(pub BigRat);

impl<'de> Deserialize<'de> for RatStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map(RatStr).map_err(serde::de::Error::custom)
    }
}

pub(crate) struct IntStr(pub BigInt);

impl<'de> Deserialize<'de> for IntStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_int(&s).map(IntStr).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(x: &[BigRat], s: S) -> std::result::Result<S::Ok, S::Error> {
        x.iter().map(fmt_rat).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<BigRat>, D::Error> {
        Ok(Vec::<RatStr>::deserialize(d)?.into_iter().map(|r| r.0).collect())
    }
}

pub fn parse_int(s: &str) -> Result<BigInt> {
    let q = parse_rat(s)?;
    if !is_integral(&q) {
        return Err(Error::InvalidInput(format!("expected an integer, got {s:?}")));
    }
    Ok(q.numer().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("4/5").unwrap(), frac(4, 5));
        assert_eq!(parse_rat("-3/5").unwrap(), frac(-3, 5));
        assert_eq!(parse_rat("6/-4").unwrap(), frac(-3, 2));
        assert_eq!(fmt_rat(&frac(-3, 5)), "-3/5");
        assert_eq!(fmt_rat(&rat(-1)), "-1");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn s_integrality() {
        assert!(is_s_integral(&frac(4, 5), &[5]));
        assert!(!is_s_integral(&frac(4, 15), &[5]));
        assert!(is_s_unit_rational(&frac(-1, 25), &[5]));
        assert!(!is_s_unit_rational(&rat(2), &[5]));
    }

    #[test]
    fn dyadic_rounding_brackets() {
        let x = frac(1, 3);
        let lo = round_down(&x, 10);
        let hi = round_up(&x, 10);
        assert!(lo <= x && x <= hi);
        assert_eq!(&hi - &lo, frac(1, 1024));
    }
}
