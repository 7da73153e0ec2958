//! Exact rational scalars and their string encoding.
//!
//! Every quantity in the toolkit is an arbitrary-precision rational kept in
//! reduced form with a positive denominator. On the wire a rational is the
//! string `"p/q"`, or `"p"` when the denominator is one.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use num_rational::BigRational as Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// Canonical string form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Best-effort decimal view, only for display.
pub fn approx(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(if r.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// Serde adapter for a single rational as a string.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a list of rationals as strings.
pub mod serde_rational_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for a rational matrix as nested string arrays.
pub mod serde_rational_matrix {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|row| row.iter().map(format_rational).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let raw = Vec::<Vec<String>>::deserialize(d)?;
        raw.iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}
