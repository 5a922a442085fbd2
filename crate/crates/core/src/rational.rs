//! Helpers around arbitrary-precision rationals: parsing, conversion to floats,
//! and the `[num, den]` JSON encoding used by every exported file.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

/// Parses `p/q`, `p`, or a finite decimal such as `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_abs: BigInt = match whole.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let frac_int: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = BigRational::new(whole_abs * &scale + frac_int, scale);
        return Ok(if negative { -mag } else { mag });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest-float conversion that does not overflow for huge numerators and
/// denominators.
pub fn to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * (ln_bigint(&r.numer().abs()) - ln_bigint(r.denom())).exp()
}

/// Natural logarithm of a positive big integer.
pub fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(num / den)` for positive big integers.
pub fn ln_ratio(num: &BigInt, den: &BigInt) -> f64 {
    ln_bigint(num) - ln_bigint(den)
}

/// Exact rational value of a finite float.
pub fn from_f64_exact(v: f64) -> Option<Rational> {
    BigRational::from_float(v)
}

/// Common denominator of a list of rationals (their lcm).
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    use num_integer::Integer;
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

pub(crate) mod json {
    //! `[num, den]` encoding. Integers that fit in an `i64` are written as JSON
    //! numbers, larger ones as decimal strings.

    use super::*;
    use serde_json::Value;

    fn big_to_value(b: &BigInt) -> Value {
        match b.to_i64() {
            Some(v) => Value::from(v),
            None => Value::String(b.to_string()),
        }
    }

    fn value_to_big(v: &Value) -> Result<BigInt> {
        match v {
            Value::Number(n) => n
                .as_i64()
                .map(BigInt::from)
                .ok_or_else(|| Error::Parse(format!("expected an integer, got {n}"))),
            Value::String(s) => s
                .parse()
                .map_err(|_| Error::Parse(format!("expected an integer string, got {s:?}"))),
            other => Err(Error::Parse(format!("expected an integer, got {other}"))),
        }
    }

    pub fn to_value(r: &Rational) -> Value {
        Value::Array(vec![big_to_value(r.numer()), big_to_value(r.denom())])
    }

    pub fn from_value(v: &Value) -> Result<Rational> {
        match v {
            Value::Array(pair) if pair.len() == 2 => {
                let num = value_to_big(&pair[0])?;
                let den = value_to_big(&pair[1])?;
                if den.is_zero() {
                    return Err(Error::Parse("zero denominator".into()));
                }
                Ok(BigRational::new(num, den))
            }
            Value::Number(_) => Ok(BigRational::from_integer(value_to_big(v)?)),
            Value::String(s) => parse_rational(s),
            other => Err(Error::Parse(format!("expected [num, den], got {other}"))),
        }
    }

    pub fn vec_to_value(rs: &[Rational]) -> Value {
        Value::Array(rs.iter().map(to_value).collect())
    }

    pub fn vec_from_value(v: &Value) -> Result<Vec<Rational>> {
        v.as_array()
            .ok_or_else(|| Error::Parse("expected an array of rationals".into()))?
            .iter()
            .map(from_value)
            .collect()
    }
}
