//! Numeric backends.
//!
//! Every closed-form object in the crate is written once against [`Scalar`]
//! and evaluated either in `f64` or in exact [`Rational`] arithmetic. All
//! comparisons against cutoffs go through a [`Comparator`], which applies an
//! absolute tolerance for floating point and exact ordering for rationals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

/// Default absolute tolerance used when comparing floating-point values
/// against thresholds.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Field operations required by the models.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    /// `num / den`; `den` must be nonzero.
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact conversion from a float (binary expansion for rationals).
    fn from_f64(x: f64) -> Option<Self>;
    /// Nearest representable value of an exact rational.
    fn from_rational(r: &Rational) -> Self;
    /// True when arithmetic is exact and comparisons ignore tolerances.
    fn is_exact() -> bool;
    fn is_finite(&self) -> bool;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `(x)_+`
    fn positive_part(self) -> Self {
        self.max_of(Self::zero())
    }

    fn abs_val(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(x)
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn is_exact() -> bool {
        false
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_exact() -> bool {
        true
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn abs_val(self) -> Self {
        Signed::abs(&self)
    }
}

/// The one comparator used for every probability/threshold comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparator {
    pub tolerance: f64,
}

impl Default for Comparator {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl Comparator {
    pub fn new(tolerance: f64) -> Self {
        Self { tolerance }
    }

    /// Exact comparison (zero tolerance) for floats as well.
    pub fn exact() -> Self {
        Self { tolerance: 0.0 }
    }

    pub fn cmp<S: Scalar>(&self, a: &S, b: &S) -> Ordering {
        if !S::is_exact() && (a.to_f64() - b.to_f64()).abs() <= self.tolerance {
            return Ordering::Equal;
        }
        a.partial_cmp(b).unwrap_or(Ordering::Equal)
    }

    pub fn le<S: Scalar>(&self, a: &S, b: &S) -> bool {
        self.cmp(a, b) != Ordering::Greater
    }

    pub fn lt<S: Scalar>(&self, a: &S, b: &S) -> bool {
        self.cmp(a, b) == Ordering::Less
    }

    pub fn ge<S: Scalar>(&self, a: &S, b: &S) -> bool {
        self.cmp(a, b) != Ordering::Less
    }

    pub fn gt<S: Scalar>(&self, a: &S, b: &S) -> bool {
        self.cmp(a, b) == Ordering::Greater
    }

    pub fn eq<S: Scalar>(&self, a: &S, b: &S) -> bool {
        self.cmp(a, b) == Ordering::Equal
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as a number (expected decimal like 0.3, fraction like 5/7, or scientific notation)")]
pub struct ParseNumberError(pub String);

/// Parses decimal (`0.30`, `1e-3`) or fraction (`5/7`) text into an exact
/// rational. Decimal text is read digit by digit, so `0.3` becomes `3/10`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseNumberError> {
    let err = || ParseNumberError(text.to_string());
    let s = text.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if all_digits.is_empty() { "0" } else { &all_digits })
        .map_err(|_| err())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Parses the same grammar as [`parse_rational`] into any backend.
pub fn parse_scalar<S: Scalar>(text: &str) -> Result<S, ParseNumberError> {
    parse_rational(text).map(|r| S::from_rational(&r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_text_is_exact() {
        assert_eq!(parse_rational("0.3").unwrap(), Rational::ratio(3, 10));
        assert_eq!(parse_rational("5/7").unwrap(), Rational::ratio(5, 7));
        assert_eq!(parse_rational("-1.25e1").unwrap(), Rational::ratio(-25, 2));
        assert_eq!(parse_rational("1e-9").unwrap(), Rational::ratio(1, 1_000_000_000));
        assert_eq!(parse_rational(".5").unwrap(), Rational::ratio(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn parse_into_float_backend() {
        let x: f64 = parse_scalar("5/7").unwrap();
        assert!((x - 5.0 / 7.0).abs() < 1e-15);
        let r: Rational = parse_scalar("0.714").unwrap();
        assert_eq!(r, Rational::ratio(714, 1000));
    }

    #[test]
    fn comparator_tolerance_applies_only_to_floats() {
        let c = Comparator::default();
        assert_eq!(c.cmp(&0.5, &(0.5 + 1e-13)), Ordering::Equal);
        assert_eq!(c.cmp(&0.5, &(0.5 + 1e-9)), Ordering::Less);
        let a = Rational::ratio(1, 2);
        let b = Rational::ratio(1, 2) + Rational::ratio(1, 10_i64.pow(15));
        assert_eq!(c.cmp(&a, &b), Ordering::Less);
    }
}
