//! Real scalars for lattice coordinates: exact rationals or tolerant floats.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use crate::coeff::{Coeff, Symbolic};
use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Default relative tolerance for floating-point lattices.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Environment variable that overrides [`DEFAULT_TOL`] in the front ends.
pub const TOL_ENV: &str = "TORUS_EXTREMAL_TOL";

/// Reads the tolerance override from the environment.
pub fn tolerance_from_env() -> f64 {
    std::env::var(TOL_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(DEFAULT_TOL)
}

/// Numeric mode of a lattice and everything derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Exact,
    Float { tol: f64 },
}

/// Ordered real field used for lattice data.
///
/// Exact implementations ignore the tolerance arguments; the float
/// implementation compares relative to `max(1, |a|, |b|)`.
pub trait Real:
    Clone + fmt::Debug + fmt::Display + PartialEq + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// Coefficient field of trigonometric polynomials over this lattice.
    type Coeff: Coeff;
    /// Hashable identity of a frequency coordinate.
    type Key: Ord + Clone + fmt::Debug + Send + Sync;

    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;
    fn key(&self) -> Self::Key;
    fn to_coeff(&self) -> Self::Coeff;
    /// Square root of a nonnegative value, embedded in the coefficient field.
    fn sqrt_coeff(&self) -> Result<Self::Coeff>;
    /// Serialized form: `"p/q"` strings for rationals, numbers for floats.
    fn to_json(&self) -> serde_json::Value;
    /// Inverse of [`Real::to_json`]; exact scalars also accept JSON numbers
    /// through their decimal text.
    fn from_json(v: &serde_json::Value) -> Option<Self>;

    fn is_zero_tol(&self, tol: f64) -> bool {
        self.approx_eq(&Self::zero(), tol)
    }

    fn cmp_tol(&self, other: &Self, tol: f64) -> Ordering {
        if self.approx_eq(other, tol) {
            Ordering::Equal
        } else {
            self.partial_cmp(other).unwrap_or(Ordering::Equal)
        }
    }

    fn mode(tol: f64) -> Mode {
        if Self::EXACT {
            Mode::Exact
        } else {
            Mode::Float { tol }
        }
    }
}

impl Real for Rational {
    type Coeff = Symbolic;
    type Key = Rational;
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
    fn key(&self) -> Self::Key {
        self.clone()
    }
    fn to_coeff(&self) -> Symbolic {
        Symbolic::from_rational(self.clone())
    }
    fn sqrt_coeff(&self) -> Result<Symbolic> {
        Symbolic::sqrt_rational(self)
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
    fn from_json(v: &serde_json::Value) -> Option<Self> {
        match v {
            serde_json::Value::String(s) => parse_rational(s),
            serde_json::Value::Number(n) => parse_rational(&n.to_string()),
            _ => None,
        }
    }
}

impl Real for f64 {
    type Coeff = Complex64;
    type Key = i64;
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale = 1f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= tol * scale
    }
    fn key(&self) -> i64 {
        // frequencies are identified after rounding to 12 decimal digits
        let k = (self * 1e12).round();
        if k == 0.0 {
            0
        } else {
            k as i64
        }
    }
    fn to_coeff(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn sqrt_coeff(&self) -> Result<Complex64> {
        if *self < 0.0 {
            return Err(Error::NonRealInput);
        }
        Ok(Complex64::new(self.sqrt(), 0.0))
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
    fn from_json(v: &serde_json::Value) -> Option<Self> {
        match v {
            serde_json::Value::Number(n) => n.as_f64(),
            serde_json::Value::String(s) => parse_rational(s).and_then(|q| ToPrimitive::to_f64(&q)),
            _ => None,
        }
    }
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"0.25"` into a rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(n));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(digits, den);
    Some(if neg { -v } else { v })
}

/// `x * x` for any ring element.
pub(crate) fn sq<R: Real>(x: &R) -> R {
    x.clone() * x.clone()
}

pub(crate) fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter()
        .zip(b)
        .fold(R::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("1/3"), Some(Rational::from_ratio(1, 3)));
        assert_eq!(parse_rational("-4/6"), Some(Rational::from_ratio(-2, 3)));
        assert_eq!(parse_rational("7"), Some(Rational::from_i64(7)));
        assert_eq!(parse_rational("0.25"), Some(Rational::from_ratio(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(Rational::from_ratio(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn float_comparisons_are_relative() {
        assert!(1e6f64.approx_eq(&(1e6 + 1e-4), 1e-9));
        assert!(!1.0f64.approx_eq(&(1.0 + 1e-6), 1e-9));
        assert!(1e-12f64.is_zero_tol(1e-9));
    }

    #[test]
    fn float_keys_round() {
        assert_eq!(0.5f64.key(), (0.5f64 + 1e-14).key());
        assert_eq!((-0.0f64).key(), 0);
    }

    #[test]
    fn rational_json_is_canonical() {
        assert_eq!(Rational::from_ratio(2, 4).to_json(), serde_json::json!("1/2"));
        assert_eq!(Rational::from_i64(3).to_json(), serde_json::json!("3"));
    }
}
