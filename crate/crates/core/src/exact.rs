//! Exact rational helpers and the serde representation used for rational
//! quantities in JSON files.
//!
//! Rationals are written as strings (`"3/8"`, `"1"`); on input both strings
//! and plain JSON numbers are accepted. Numbers are read through their
//! shortest decimal representation, so `0.1` becomes exactly `1/10`.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

pub fn int(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// `num / den`, with the 0/0 (and x/0) convention mapping to zero.
pub fn ratio_or_zero(num: &Rational, den: &Rational) -> Rational {
    if den.is_zero() {
        Rational::zero()
    } else {
        num / den
    }
}

/// Parses a decimal literal (`-1.25`, `3`, `.5`) or a fraction (`3/8`).
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let denom = num::pow(BigInt::from(10u8), frac.len());
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Exact value of a finite float's shortest decimal representation.
pub fn from_f64_decimal(v: f64) -> Option<Rational> {
    if !v.is_finite() {
        return None;
    }
    parse_rational(&format!("{v}"))
}

pub fn format_rational(v: &Rational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Decimal rendering with at least `digits` significant digits.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 {
            "0".to_string()
        } else {
            v.to_string()
        };
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn is_nonnegative(v: &Rational) -> bool {
    !v.is_negative()
}

/// Tree form of nested rational containers for (de)serialization.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum Repr {
    Text(String),
    Number(f64),
    List(Vec<Repr>),
}

pub trait ExactSerde: Sized {
    fn to_repr(&self) -> Repr;
    fn from_repr(repr: Repr) -> Result<Self, String>;
}

impl ExactSerde for Rational {
    fn to_repr(&self) -> Repr {
        Repr::Text(format_rational(self))
    }

    fn from_repr(repr: Repr) -> Result<Self, String> {
        match repr {
            Repr::Text(t) => parse_rational(&t).ok_or_else(|| format!("invalid rational `{t}`")),
            Repr::Number(n) => from_f64_decimal(n).ok_or_else(|| format!("invalid number {n}")),
            Repr::List(_) => Err("expected a rational, found a list".into()),
        }
    }
}

impl<T: ExactSerde> ExactSerde for Vec<T> {
    fn to_repr(&self) -> Repr {
        Repr::List(self.iter().map(ExactSerde::to_repr).collect())
    }

    fn from_repr(repr: Repr) -> Result<Self, String> {
        match repr {
            Repr::List(items) => items.into_iter().map(T::from_repr).collect(),
            _ => Err("expected a list".into()),
        }
    }
}

impl<T: ExactSerde, const N: usize> ExactSerde for [T; N] {
    fn to_repr(&self) -> Repr {
        Repr::List(self.iter().map(ExactSerde::to_repr).collect())
    }

    fn from_repr(repr: Repr) -> Result<Self, String> {
        let items: Vec<T> = Vec::from_repr(repr)?;
        let len = items.len();
        items
            .try_into()
            .map_err(|_| format!("expected {N} entries, found {len}"))
    }
}

impl<T: ExactSerde> ExactSerde for Option<T> {
    fn to_repr(&self) -> Repr {
        match self {
            Some(v) => v.to_repr(),
            None => Repr::List(Vec::new()),
        }
    }

    fn from_repr(repr: Repr) -> Result<Self, String> {
        T::from_repr(repr).map(Some)
    }
}

/// `#[serde(with = "crate::exact::serde_exact")]` adapter.
pub mod serde_exact {
    use super::*;

    pub fn serialize<T: ExactSerde, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        v.to_repr().serialize(s)
    }

    pub fn deserialize<'de, T: ExactSerde, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let repr = Repr::deserialize(d)?;
        T::from_repr(repr).map_err(serde::de::Error::custom)
    }
}
