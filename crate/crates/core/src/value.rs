//! Exact rationals and the extended value domain `Q ∪ {+∞}`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number used for every time, count and rate.
pub type Q = BigRational;

/// Shorthand constructor for `n/d`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse rational from {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `"num/den"`, an integer, or a finite decimal (`"0.125"`, `"-2.5e-1"`
/// is not accepted) into an exact rational.
pub fn parse_q(s: &str) -> Result<Q, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| err())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let scale = num::pow(BigInt::from(10), frac.len());
        let frac_part = Q::new(BigInt::from_str(frac).map_err(|_| err())?, scale);
        let base = Q::from_integer(int_part.abs());
        let mag = base + frac_part;
        return Ok(if neg { -mag } else { mag });
    }
    BigInt::from_str(s).map(Q::from_integer).map_err(|_| err())
}

/// Formats a rational as `"num/den"` (or just `"num"` for integers).
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of two positive rationals.
pub fn lcm_q(a: &Q, b: &Q) -> Q {
    use num::Integer;
    // a = p1/q1, b = p2/q2 in lowest terms: lcm = lcm(p1, p2) / gcd(q1, q2)
    let n = a.numer().lcm(b.numer());
    let d = a.denom().gcd(b.denom());
    Q::new(n, d)
}

/// Smallest integer `k` with `k >= x`.
pub fn ceil_q(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

/// An element of the codomain of curves: an exact rational or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Finite(Q),
    Infinite,
}

impl Value {
    pub fn zero() -> Self {
        Value::Finite(Q::zero())
    }

    pub fn fin(x: Q) -> Self {
        Value::Finite(x)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Value::Infinite)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            Value::Finite(x) => Some(x),
            Value::Infinite => None,
        }
    }

    pub fn min(self, other: Value) -> Value {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Value) -> Value {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// `max(self, 0)`.
    pub fn positive_part(self) -> Value {
        self.max(Value::zero())
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Finite(x) => to_f64(x),
            Value::Infinite => f64::INFINITY,
        }
    }
}

impl From<Q> for Value {
    fn from(x: Q) -> Self {
        Value::Finite(x)
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => a.cmp(b),
            (Value::Finite(_), Value::Infinite) => Ordering::Less,
            (Value::Infinite, Value::Finite(_)) => Ordering::Greater,
            (Value::Infinite, Value::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for Value {
    type Output = Value;
    fn add(self, rhs: Value) -> Value {
        match (self, rhs) {
            (Value::Finite(a), Value::Finite(b)) => Value::Finite(a + b),
            _ => Value::Infinite,
        }
    }
}

impl Add<&Q> for &Value {
    type Output = Value;
    fn add(self, rhs: &Q) -> Value {
        match self {
            Value::Finite(a) => Value::Finite(a + rhs),
            Value::Infinite => Value::Infinite,
        }
    }
}

/// `+∞ - x = +∞`; subtracting from a finite value stays finite.
impl Sub<&Q> for &Value {
    type Output = Value;
    fn sub(self, rhs: &Q) -> Value {
        match self {
            Value::Finite(a) => Value::Finite(a - rhs),
            Value::Infinite => Value::Infinite,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(x) => f.write_str(&fmt_q(x)),
            Value::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Value {
    type Err = ParseRationalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(Value::Infinite),
            other => parse_q(other).map(Value::Finite),
        }
    }
}

/// Serde adapters that carry rationals as `"num/den"` strings.
pub mod serde_q {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let raw = RawNumber::deserialize(d)?;
        raw.into_q().map_err(de::Error::custom)
    }

    /// Accepts both JSON strings and JSON numbers (integers, or decimals
    /// converted from their textual form).
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum RawNumber {
        Str(String),
        Int(i64),
        Float(serde_json::Number),
    }

    impl RawNumber {
        pub(crate) fn into_q(self) -> Result<Q, ParseRationalError> {
            match self {
                RawNumber::Str(s) => parse_q(&s),
                RawNumber::Int(i) => Ok(qi(i)),
                RawNumber::Float(n) => parse_q(&n.to_string()),
            }
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(x) => s.serialize_str(&fmt_q(x)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
            let raw: Option<RawNumber> = Option::deserialize(d)?;
            raw.map(|r| r.into_q().map_err(de::Error::custom))
                .transpose()
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&fmt_q(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            let raw: Vec<RawNumber> = Vec::deserialize(d)?;
            raw.into_iter()
                .map(|r| r.into_q().map_err(de::Error::custom))
                .collect()
        }
    }
}

/// Serde adapter for [`Value`] as `"num/den"` or `"inf"`.
pub mod serde_value {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Value, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Value, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}
