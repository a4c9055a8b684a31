//! Exact rationals, their `"p/q"` text form, and the small numeric trait that
//! lets the map code run over both exact rationals and `f64`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};
use thiserror::Error;

/// Arbitrary precision rational, always stored reduced with a positive denominator.
pub type Scalar = BigRational;

/// A point or vector with exact coordinates.
pub type Point = Vec<Scalar>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as a rational number")]
pub struct ParseScalarError {
    pub input: String,
}

pub fn rat(num: i64, den: i64) -> Scalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn half() -> Scalar {
    rat(1, 2)
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"0.41"`, all exactly.
pub fn parse_scalar(input: &str) -> Result<Scalar, ParseScalarError> {
    let err = || ParseScalarError { input: input.to_string() };
    let s = input.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let digits_ok = |t: &str| t.chars().all(|c| c.is_ascii_digit());
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !digits_ok(whole_digits) || !digits_ok(frac) || (whole_digits.is_empty() && frac.is_empty()) {
            return Err(err());
        }
        let mantissa: BigInt = format!("{}{}", if whole_digits.is_empty() { "0" } else { whole_digits }, frac)
            .parse()
            .map_err(|_| err())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let value = BigRational::new(mantissa, den);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s.parse().map_err(|_| err())?;
    Ok(BigRational::from_integer(n))
}

/// Canonical `"p/q"` form; the denominator is always written, even when it is 1.
pub fn format_scalar(x: &Scalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn to_f64(x: &Scalar) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact binary value of a finite double.
pub fn from_f64(x: f64) -> Option<Scalar> {
    BigRational::from_float(x)
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).fold(Scalar::zero(), |acc, (x, y)| acc + x * y)
}

pub fn fmt_point(p: &[Scalar]) -> String {
    let parts: Vec<String> = p.iter().map(format_scalar).collect();
    format!("({})", parts.join(", "))
}

/// Serde adapter storing a [`Scalar`] as a `"p/q"` string.
pub mod serde_scalar {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_scalar(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        let s = String::deserialize(d)?;
        parse_scalar(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a vector of [`Scalar`]s.
pub mod serde_scalar_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[Scalar], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&format_scalar(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Scalar>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_scalar(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Wrapper giving a [`Scalar`] a `"p/q"` `Display` and serde form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(pub Scalar);

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_scalar(&self.0))
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_scalar::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        serde_scalar::deserialize(d).map(Exact)
    }
}

/// Number types the map can be evaluated over: exact rationals for proofs,
/// doubles for simulation.
pub trait Real:
    Clone
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    fn from_ratio(num: i64, den: i64) -> Self;
    fn floor(&self) -> Self;
    fn from_scalar(x: &Scalar) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    /// Representative in `[0, 1)`.
    fn frac(&self) -> Self {
        let f = self.clone() - self.floor();
        // -1e-17 + 1.0 rounds to 1.0 in floating point.
        if f >= Self::from_int(1) {
            f - Self::from_int(1)
        } else {
            f
        }
    }
}

impl Real for Scalar {
    fn from_ratio(num: i64, den: i64) -> Self {
        rat(num, den)
    }
    fn floor(&self) -> Self {
        BigRational::floor(self)
    }
    fn from_scalar(x: &Scalar) -> Self {
        x.clone()
    }
}

impl Real for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn from_scalar(x: &Scalar) -> Self {
        to_f64(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fraction_integer_and_decimal_forms() {
        assert_eq!(parse_scalar("41/100").unwrap(), rat(41, 100));
        assert_eq!(parse_scalar("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_scalar("-3").unwrap(), int(-3));
        assert_eq!(parse_scalar("0.41").unwrap(), rat(41, 100));
        assert_eq!(parse_scalar("-.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_scalar("2/-4").unwrap(), rat(-1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["abc", "", "1/0", "1.2.3", "1/x", ".", "0.4e1"] {
            assert!(parse_scalar(bad).is_err(), "{bad:?} parsed");
        }
    }

    #[test]
    fn format_always_writes_denominator() {
        assert_eq!(format_scalar(&int(2)), "2/1");
        assert_eq!(format_scalar(&rat(-6, 8)), "-3/4");
    }

    #[test]
    fn frac_handles_negative_doubles() {
        assert_eq!((-0.25f64).frac(), 0.75);
        assert!((-1e-17f64).frac() < 1.0);
        assert_eq!(rat(-1, 4).frac(), rat(3, 4));
    }

    proptest! {
        #[test]
        fn text_form_round_trips(n in -1_000_000_000i64..1_000_000_000, d in 1i64..1_000_000_000) {
            let x = rat(n, d);
            let back = parse_scalar(&format_scalar(&x)).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
