use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const FRACTION_DIGITS: usize = 18;
const SCALE: i128 = 1_000_000_000_000_000_000;

/// A time value stored as an exact decimal (fixed point, 18 fractional
/// digits), so equality and tie detection never depend on float rounding.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Time(i128);

impl Time {
    pub const ZERO: Time = Time(0);

    pub fn from_units(units: i128) -> Time {
        Time(units)
    }

    pub fn from_int(v: i64) -> Time {
        Time(v as i128 * SCALE)
    }

    /// Exact time of a float's shortest decimal representation.
    pub fn from_f64(v: f64) -> Option<Time> {
        if !v.is_finite() {
            return None;
        }
        format!("{v}").parse().ok()
    }

    pub fn to_f64(self) -> f64 {
        self.to_string().parse().unwrap_or(f64::NAN)
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.0), BigInt::from(SCALE))
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeParseError(pub String);

impl fmt::Display for TimeParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid time `{}`", self.0)
    }
}

impl std::error::Error for TimeParseError {}

impl FromStr for Time {
    type Err = TimeParseError;

    fn from_str(s: &str) -> std::result::Result<Time, TimeParseError> {
        let err = || TimeParseError(s.to_string());
        let text = s.trim();
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
        if (whole.is_empty() && frac.is_empty())
            || frac.len() > FRACTION_DIGITS
            || !whole
                .chars()
                .chain(frac.chars())
                .all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let whole: i128 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| err())?
        };
        let mut frac_units: i128 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| err())?
        };
        for _ in frac.len()..FRACTION_DIGITS {
            frac_units *= 10;
        }
        let units = whole
            .checked_mul(SCALE)
            .and_then(|w| w.checked_add(frac_units))
            .ok_or_else(err)?;
        Ok(Time(if negative { -units } else { units }))
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / SCALE as u128;
        let frac = abs % SCALE as u128;
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let digits = format!("{frac:018}");
            write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Time, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Time::from_f64(v)
                .ok_or_else(|| serde::de::Error::custom(format!("invalid time {v}"))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Strictly increasing list of support times.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct TimeGrid(Vec<Time>);

impl TimeGrid {
    pub fn new(times: Vec<Time>) -> Result<TimeGrid> {
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "grid times must be strictly increasing".into(),
            ));
        }
        Ok(TimeGrid(times))
    }

    /// Sorted distinct union of the given times.
    pub fn from_unsorted(times: impl IntoIterator<Item = Time>) -> TimeGrid {
        let mut times: Vec<Time> = times.into_iter().collect();
        times.sort_unstable();
        times.dedup();
        TimeGrid(times)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn times(&self) -> &[Time] {
        &self.0
    }

    pub fn get(&self, index: usize) -> Time {
        self.0[index]
    }

    pub fn index_of(&self, t: Time) -> Option<usize> {
        self.0.binary_search(&t).ok()
    }

    pub fn require_index(&self, t: Time) -> Result<usize> {
        self.index_of(t).ok_or(Error::OffGrid(t))
    }

    /// Number of grid points `<= t`.
    pub fn count_at_or_below(&self, t: Time) -> usize {
        self.0.partition_point(|g| *g <= t)
    }

    /// Grid points strictly after position `index`.
    pub fn tail(&self, index: usize) -> TimeGrid {
        TimeGrid(self.0[index + 1..].to_vec())
    }
}

impl<'de> Deserialize<'de> for TimeGrid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<TimeGrid, D::Error> {
        let times = Vec::<Time>::deserialize(d)?;
        TimeGrid::new(times).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Time {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_prints_exact_decimals() {
        assert_eq!(t(".51").to_string(), "0.51");
        assert_eq!(t("0.24"), t(".240"));
        assert_eq!(t("-1.5").to_string(), "-1.5");
        assert_eq!(t("12").to_string(), "12");
        assert!("1e-3".parse::<Time>().is_err());
        assert!("0.0000000000000000001".parse::<Time>().is_err());
        assert!("".parse::<Time>().is_err());
        assert_eq!(
            t("0.51").to_rational(),
            BigRational::new(51.into(), 100.into())
        );
    }

    #[test]
    fn float_bridge_is_exact_for_short_decimals() {
        assert_eq!(Time::from_f64(0.62), Some(t("0.62")));
        assert_eq!(t("0.68").to_f64(), 0.68);
        let json = serde_json::to_string(&t("0.02")).unwrap();
        assert_eq!(json, "0.02");
        assert_eq!(serde_json::from_str::<Time>(&json).unwrap(), t("0.02"));
    }

    #[test]
    fn grid_lookup() {
        let g = TimeGrid::from_unsorted([t("3"), t("1"), t("2"), t("1")]);
        assert_eq!(g.times(), &[t("1"), t("2"), t("3")]);
        assert_eq!(g.index_of(t("2")), Some(1));
        assert_eq!(g.index_of(t("2.5")), None);
        assert_eq!(g.count_at_or_below(t("0")), 0);
        assert_eq!(g.count_at_or_below(t("2.5")), 2);
        assert!(TimeGrid::new(vec![t("1"), t("1")]).is_err());
    }
}
