//! Number types used throughout the crate.
//!
//! Every algorithm is generic over [`Scalar`]. Two implementations exist:
//! [`Rational`] (arbitrary precision, all comparisons exact) and `f64`
//! (all comparisons use the tolerance `|a - b| <= 1e-9 * max(1, |a|, |b|)`).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Rational = BigRational;

/// Relative tolerance used by the floating mode.
pub const FLOAT_TOL: f64 = 1e-9;

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + num::Num
    + Signed
    + Send
    + Sync
    + 'static
{
    /// `true` for exact arithmetic.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact value, when the scalar carries one.
    fn to_rational(&self) -> Option<Rational>;

    /// Equality: exact for rationals, toleranced for floats.
    fn approx_eq(&self, other: &Self) -> bool;

    /// Nearest value to a float; exact scalars take the float's exact value.
    fn from_f64(x: f64) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn is_zero_tol(&self) -> bool {
        self.approx_eq(&Self::zero())
    }

    /// Strictly positive beyond tolerance.
    fn is_pos(&self) -> bool {
        !self.is_zero_tol() && *self > Self::zero()
    }

    /// Strictly negative beyond tolerance.
    fn is_neg(&self) -> bool {
        !self.is_zero_tol() && *self < Self::zero()
    }

    /// `self >= other` up to tolerance.
    fn ge_tol(&self, other: &Self) -> bool {
        self > other || self.approx_eq(other)
    }

    /// `self <= other` up to tolerance.
    fn le_tol(&self, other: &Self) -> bool {
        self < other || self.approx_eq(other)
    }

    fn cmp_tol(&self, other: &Self) -> Ordering {
        if self.approx_eq(other) {
            Ordering::Equal
        } else if self < other {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// JSON encoding: `"p/q"` strings when exact, numbers otherwise.
    fn to_json(&self) -> serde_json::Value;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        self.to_f64_lossy()
    }

    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).unwrap_or_default()
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        r.to_f64_lossy()
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = 1f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= FLOAT_TOL * scale
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

trait LossyF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyF64 for Rational {
    fn to_f64_lossy(&self) -> f64 {
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                // Huge numerator or denominator: shift both to keep 64 bits of precision.
                let shift = self.numer().bits().max(self.denom().bits()).saturating_sub(900);
                let n = (self.numer() >> shift).to_f64().unwrap_or(0.0);
                let d = (self.denom() >> shift).to_f64().unwrap_or(1.0);
                n / d
            }
        }
    }
}

/// Parses `"p/q"`, integers, and decimal literals (with optional exponent) exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::InvalidInput("empty rational literal".into()));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim())
            .map_err(|_| Error::InvalidInput(format!("bad numerator in {s:?}")))?;
        let q = BigInt::from_str(q.trim())
            .map_err(|_| Error::InvalidInput(format!("bad denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    parse_decimal(t).ok_or_else(|| Error::InvalidInput(format!("not a rational: {s:?}")))
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i64>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str(&all).ok()?);
    let scale = exp - frac_part.len() as i64;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num::pow(ten, scale as usize);
    } else {
        value /= num::pow(ten, (-scale) as usize);
    }
    Some(if neg { -value } else { value })
}

/// Shorthand constructor for small rationals, mostly for tests and examples.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Sum of a slice of scalars.
pub fn sum<S: Scalar>(xs: &[S]) -> S {
    xs.iter().fold(S::zero(), |acc, x| acc + x.clone())
}

/// Dot product.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn max_of<S: Scalar>(a: S, b: S) -> S {
    if a >= b {
        a
    } else {
        b
    }
}

/// Componentwise approximate equality of two vectors.
pub fn vec_approx_eq<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

/// Exact integer power for `p` given as a nonnegative integer rational.
pub fn pow_usize<S: Scalar>(base: &S, exp: usize) -> S {
    let mut acc = S::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

/// Returns `Some(k)` when `r` is a nonnegative integer.
pub fn as_usize(r: &Rational) -> Option<usize> {
    if r.is_integer() && !r.is_negative() {
        r.to_integer().to_usize()
    } else {
        None
    }
}

/// A cost that may be `+inf`, used for infeasible transport problems.
#[derive(Debug, Clone, PartialEq)]
pub enum Extended<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> Extended<S> {
    pub fn finite(&self) -> Option<&S> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Extended::Finite(v) => v.to_json(),
            Extended::Infinite => serde_json::Value::String("inf".into()),
        }
    }

    /// Tolerant comparison; `+inf` equals itself and exceeds every finite value.
    pub fn cmp_tol(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.cmp_tol(b),
            (Extended::Finite(_), Extended::Infinite) => Ordering::Less,
            (Extended::Infinite, Extended::Finite(_)) => Ordering::Greater,
            (Extended::Infinite, Extended::Infinite) => Ordering::Equal,
        }
    }

    pub fn le_tol(&self, other: &Self) -> bool {
        self.cmp_tol(other) != Ordering::Greater
    }

    pub fn max_tol(self, other: Self) -> Self {
        if self.cmp_tol(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

impl<S: fmt::Display> fmt::Display for Extended<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => v.fmt(f),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational(" -2/4 ").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("1e-2").unwrap(), rat(1, 100));
        assert_eq!(parse_rational("1.5E1").unwrap(), int(15));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn float_tolerance_is_relative() {
        assert!(1e12f64.approx_eq(&(1e12 + 1.0)));
        assert!(!1.0f64.approx_eq(&(1.0 + 1e-6)));
        assert!(1e-10f64.is_zero_tol());
        assert!(!1e-10f64.is_pos());
        assert!((2e-9f64).is_pos());
    }

    #[test]
    fn rational_json_is_string() {
        assert_eq!(rat(2, 6).to_json(), serde_json::json!("1/3"));
        assert_eq!(0.5f64.to_json(), serde_json::json!(0.5));
    }

    #[test]
    fn lossy_conversion_handles_huge_values() {
        let big = Rational::new(num::pow(BigInt::from(10), 400), num::pow(BigInt::from(10), 399) * 4);
        assert!((Scalar::to_f64(&big) - 2.5).abs() < 1e-12);
    }
}
