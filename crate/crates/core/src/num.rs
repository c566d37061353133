//! Numeric backends.
//!
//! Every solver in this crate is generic over [`Scalar`], with two backends:
//! `f64` with a relative tolerance of `1e-9`, and [`Rat`] (arbitrary-precision
//! rationals) with tolerance zero, so that equality tests become exact.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rat = BigRational;

pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    /// True when arithmetic is exact and tolerances are zero.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact value of a finite float (every finite `f64` is rational).
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// Parse `"p/q"`, decimal, or integer text exactly.
    fn parse_text(text: &str) -> Result<Self>;
    /// Canonical text form; the rational backend prints `p/q`.
    fn to_text(&self) -> String {
        format!("{self}")
    }

    fn abs(&self) -> Self;
    fn is_zero(&self) -> bool;

    /// Default relative tolerance scale used for alignment and equality
    /// checks: `1e-9` for floats, `0` for rationals.
    fn default_tol() -> Self;

    /// `self^(num/den)` when representable in the backend, for `self >= 0`.
    fn pow_ratio(&self, num: u32, den: u32) -> Option<Self>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn parse_text(text: &str) -> Result<Self> {
        let (n, d) = parse_fraction_text(text, |s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("not a finite number: {s:?}")))
        })?;
        Ok(n / d)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn default_tol() -> Self {
        1e-9
    }
    fn pow_ratio(&self, num: u32, den: u32) -> Option<Self> {
        (*self >= 0.0 && den > 0).then(|| self.powf(num as f64 / den as f64))
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn one() -> Self {
        <Rat as num_traits::One>::one()
    }
    fn from_int(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rat::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Rat::from_float(x)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn parse_text(text: &str) -> Result<Self> {
        let (n, d) = parse_fraction_text(text, parse_decimal_rat)?;
        Ok(n / d)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn default_tol() -> Self {
        <Rat as Zero>::zero()
    }
    fn pow_ratio(&self, num: u32, den: u32) -> Option<Self> {
        if self.is_negative() || den == 0 {
            return None;
        }
        let powered = num_traits::pow::pow(self.clone(), num as usize);
        let n = exact_root(powered.numer().magnitude(), den)?;
        let d = exact_root(powered.denom().magnitude(), den)?;
        Some(Rat::new(
            BigInt::from_biguint(Sign::Plus, n),
            BigInt::from_biguint(Sign::Plus, d),
        ))
    }
}

fn exact_root(v: &BigUint, den: u32) -> Option<BigUint> {
    let root = v.nth_root(den);
    (num_traits::pow::pow(root.clone(), den as usize) == *v).then_some(root)
}

/// Split `"p/q"` into parts and delegate single-number parsing.
fn parse_fraction_text<S, F>(text: &str, parse_one: F) -> Result<(S, S)>
where
    S: Scalar,
    F: Fn(&str) -> Result<S>,
{
    let text = text.trim();
    match text.split_once('/') {
        Some((num, den)) => {
            let d = parse_one(den.trim())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {text:?}")));
            }
            Ok((parse_one(num.trim())?, d))
        }
        None => Ok((parse_one(text)?, S::one())),
    }
}

/// Parse a decimal literal (optionally signed, with exponent) into an exact
/// rational.
fn parse_decimal_rat(text: &str) -> Result<Rat> {
    let err = || Error::Parse(format!("not a decimal number: {text:?}"));
    let (mantissa, exp10) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = text[pos + 1..].parse().map_err(|_| err())?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let all: String = [int_part, frac_part].concat();
    if all.is_empty() || !all.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let numer: BigInt = all.parse().map_err(|_| err())?;
    let shift = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let scale = num_traits::pow::pow(ten, shift.unsigned_abs() as usize);
    let value = if shift >= 0 {
        Rat::from_integer(numer * scale)
    } else {
        Rat::new(numer, scale)
    };
    Ok(if sign < 0 { -value } else { value })
}

/// `|a - b| <= tol * (1 + |scale|)`; exact equality when `tol` is zero.
pub fn within_tol<S: Scalar>(a: &S, b: &S, tol: &S, scale: &S) -> bool {
    let diff = (a.clone() - b.clone()).abs();
    let bound = tol.clone() * (S::one() + scale.abs());
    diff <= bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_exactly() {
        assert_eq!(Rat::parse_text("3/4").unwrap(), Rat::from_ratio(3, 4));
        assert_eq!(Rat::parse_text("0.125").unwrap(), Rat::from_ratio(1, 8));
        assert_eq!(Rat::parse_text("-2.5e-1").unwrap(), Rat::from_ratio(-1, 4));
        assert_eq!(Rat::parse_text("7").unwrap(), Rat::from_int(7));
        assert!(Rat::parse_text("1/0").is_err());
        assert!(Rat::parse_text("abc").is_err());
    }

    #[test]
    fn parses_floats() {
        assert_eq!(f64::parse_text("3/4").unwrap(), 0.75);
        assert_eq!(f64::parse_text("1.5").unwrap(), 1.5);
        assert!(f64::parse_text("nan").is_err());
    }

    #[test]
    fn float_to_exact_rational() {
        assert_eq!(Rat::from_f64(0.5).unwrap(), Rat::from_ratio(1, 2));
        assert_eq!(Scalar::to_f64(&Rat::from_f64(0.1).unwrap()), 0.1);
        assert!(<Rat as Scalar>::from_f64(f64::INFINITY).is_none());
    }

    #[test]
    fn exact_powers() {
        let quarter = Rat::from_ratio(1, 4);
        assert_eq!(quarter.pow_ratio(1, 2).unwrap(), Rat::from_ratio(1, 2));
        assert_eq!(Rat::from_int(8).pow_ratio(2, 3).unwrap(), Rat::from_int(4));
        assert!(Rat::from_int(2).pow_ratio(1, 2).is_none());
        let f: f64 = 2.0;
        assert!((f.pow_ratio(1, 2).unwrap() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn tolerance_is_exact_for_rationals() {
        let a = Rat::from_ratio(1, 3);
        let b = Rat::from_ratio(1, 3);
        let tol = <Rat as Scalar>::default_tol();
        assert!(within_tol(&a, &b, &tol, &<Rat as Scalar>::one()));
        let c = a.clone() + Rat::from_ratio(1, 1_000_000_000_000i64);
        assert!(!within_tol(&a, &c, &tol, &<Rat as Scalar>::one()));
    }
}
