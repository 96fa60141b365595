//! Exact rational scalars.
//!
//! Every numeric quantity in the solvers is a [`Rational`]: an
//! arbitrary-precision fraction kept in lowest terms with a positive
//! denominator. Nothing in the solver paths ever rounds.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Builds `num/den` from machine integers. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^-exp`, exactly.
pub fn pow2_neg(exp: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << exp as usize)
}

/// Parses `"num/den"`, `"num"` or `"-num/den"`; whitespace around the parts is
/// tolerated. Floats and exponents are rejected.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidProblem(format!("`{text}` is not an exact fraction"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let digits = |s: &str| {
        let body = s.strip_prefix('-').unwrap_or(s);
        !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
    };
    if !digits(num) || !digits(den) || den.starts_with('-') {
        return Err(bad());
    }
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Canonical `"num/den"` rendering; integers print as `"num"`.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Decimal approximation with `digits` fractional digits, truncated toward
/// zero. Display only.
pub fn approx_decimal(value: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (value.numer() * &scale).div_floor(value.denom());
    let scaled = if value.is_negative() && !(value.numer() * &scale).is_multiple_of(value.denom()) {
        scaled + 1
    } else {
        scaled
    };
    let neg = value.is_negative() && !scaled.is_zero();
    let mag = scaled.abs().to_string();
    let mag = format!("{:0>width$}", mag, width = digits + 1);
    let (whole, frac) = mag.split_at(mag.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac}")
    }
}

/// Whether `value` is an integer multiple of `2^-bits`.
pub fn is_dyadic_with(value: &Rational, bits: u32) -> bool {
    let pow = BigInt::one() << bits as usize;
    pow.is_multiple_of(value.denom())
}

/// Smallest `b` such that `value` is a multiple of `2^-b`, or `None` when the
/// denominator is not a power of two.
pub fn dyadic_bits(value: &Rational) -> Option<u32> {
    let den: BigUint = value.denom().magnitude().clone();
    if den.count_ones() != 1 {
        return None;
    }
    Some(den.trailing_zeros().unwrap_or(0) as u32)
}
