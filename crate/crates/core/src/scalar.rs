//! Arithmetic backends.
//!
//! Every probability in the crate is generic over [`Scalar`]. Two backends
//! exist: `f64` for sampling campaigns and [`Rational`] (arbitrary precision)
//! for table reproduction and tolerance-free verification.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exact rational number.
pub type Rational = BigRational;

/// Wire form of a scalar: a JSON number for floats, a `"n/d"` string for
/// exact rationals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Encoded {
    Float(f64),
    Exact(String),
}

pub trait Scalar:
    num_traits::Num + Signed + Clone + PartialOrd + fmt::Debug + Send + Sync + 'static
{
    /// True for backends where equality is exact.
    const EXACT: bool;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Parses a decimal (`0.125`), integer, or fraction (`1/8`) literal.
    fn parse_literal(s: &str) -> Option<Self>;

    fn encode(&self) -> Encoded;

    fn decode(value: Encoded) -> Result<Self, String>;

    /// One base-parameter draw for sampling campaigns, kept away from the
    /// boundary: uniform on [0.01, 0.99] for floats, `k/1000` with
    /// `k` uniform in 10..=990 for rationals.
    fn sample_interior<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Human rendering used in text tables.
    fn render(&self) -> String;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_literal(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            if d == 0.0 {
                return None;
            }
            return Some(n / d);
        }
        let v: f64 = s.parse().ok()?;
        v.is_finite().then_some(v)
    }

    fn encode(&self) -> Encoded {
        Encoded::Float(*self)
    }

    fn decode(value: Encoded) -> Result<Self, String> {
        match value {
            Encoded::Float(v) => Ok(v),
            Encoded::Exact(s) => {
                Self::parse_literal(&s).ok_or_else(|| format!("invalid number `{s}`"))
            }
        }
    }

    fn sample_interior<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen_range(0.01..=0.99)
    }

    fn render(&self) -> String {
        format!("{self:.6}")
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Rational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse_literal(s: &str) -> Option<Self> {
        parse_exact(s)
    }

    fn encode(&self) -> Encoded {
        Encoded::Exact(self.to_string())
    }

    fn decode(value: Encoded) -> Result<Self, String> {
        match value {
            Encoded::Exact(s) => parse_exact(&s).ok_or_else(|| format!("invalid rational `{s}`")),
            Encoded::Float(v) => {
                Rational::from_float(v).ok_or_else(|| format!("non-finite value {v}"))
            }
        }
    }

    fn sample_interior<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::from_ratio(rng.gen_range(10..=990), 1000)
    }

    fn render(&self) -> String {
        format!("{} ({:.6})", self, Scalar::to_f64(self))
    }
}

/// Exact parse of `a/b`, an integer, or a decimal literal with optional sign.
fn parse_exact(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if !digits(int_part) || !digits(frac_part) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if joined.is_empty() { "0" } else { &joined }).ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let v = Rational::new(numer, denom);
    Some(if neg { -v } else { v })
}

/// Serde adapter for `#[serde(with = "crate::scalar::repr")]` fields.
pub mod repr {
    use super::*;

    pub fn serialize<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        v.encode().serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let enc = Encoded::deserialize(d)?;
        T::decode(enc).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn zero<T: Scalar>() -> T {
    T::zero()
}

pub(crate) fn one<T: Scalar>() -> T {
    T::one()
}

pub(crate) fn complement<T: Scalar>(p: &T) -> T {
    T::one() - p.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_decimal_parse() {
        assert_eq!(parse_exact("0.4"), Some(Rational::from_ratio(2, 5)));
        assert_eq!(parse_exact("-1.25"), Some(Rational::from_ratio(-5, 4)));
        assert_eq!(parse_exact("3/12"), Some(Rational::from_ratio(1, 4)));
        assert_eq!(parse_exact(".5"), Some(Rational::from_ratio(1, 2)));
        assert_eq!(parse_exact("1"), Some(Rational::from_ratio(1, 1)));
        assert_eq!(parse_exact("1e-3"), None);
        assert_eq!(parse_exact("1/0"), None);
        assert_eq!(parse_exact(""), None);
    }

    #[test]
    fn encoding_round_trips() {
        let r = Rational::from_ratio(119, 200);
        assert_eq!(r.encode(), Encoded::Exact("119/200".into()));
        assert_eq!(Rational::decode(r.encode()).unwrap(), r);
        assert_eq!(f64::decode(Encoded::Exact("1/4".into())).unwrap(), 0.25);
    }
}
