//! Exact rational arithmetic helpers.
//!
//! All probabilities, times, rates and consumed fractions in this crate are
//! [`Rational`] values: arbitrary-precision fractions kept in lowest terms
//! with a positive denominator. The type itself comes from `num-rational`
//! (which normalizes eagerly on every operation); this module adds the
//! crate's conventions on top: constructors, `"num/den"` parsing and
//! formatting, and the prefix-sum helper used by the dominance checks.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Error;

/// Exact rational number, always normalized.
pub type Rational = num_rational::BigRational;

/// `0` as a rational.
pub fn zero() -> Rational {
    Rational::zero()
}

/// `1` as a rational.
pub fn one() -> Rational {
    Rational::one()
}

/// `num/den` from machine integers. Panics on `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rational {
    assert!(den != 0, "rational with zero denominator");
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Canonical `"num/den"` rendering, e.g. `"1/2"`, `"0/1"`, `"7/1"`.
///
/// The denominator is always printed so the format round-trips through
/// [`parse`] without ambiguity and stays byte-stable across runs.
pub fn format_exact(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Decimal approximation to six places, for human-facing report lines.
pub fn format_decimal(value: &Rational) -> String {
    // Round half away from zero at the sixth decimal place, exactly.
    let scaled = value * int(1_000_000);
    let rounded = scaled.round().to_integer();
    let negative = rounded.is_negative();
    let abs = rounded.abs();
    let (whole, frac) = (abs.clone() / 1_000_000, abs % 1_000_000);
    let sign = if negative { "-" } else { "" };
    format!("{sign}{whole}.{frac:06}")
}

/// Both renderings side by side: `"7/18 (0.388889)"`.
pub fn format_full(value: &Rational) -> String {
    format!("{} ({})", format_exact(value), format_decimal(value))
}

/// Parses `"num/den"`, a bare integer, or a decimal like `"0.25"`.
pub fn parse(text: &str) -> Result<Rational, Error> {
    let text = text.trim();
    let bad = || Error::InvalidInput(format!("cannot parse rational from {text:?}"));
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if !frac.is_empty() && frac.chars().all(|c| c.is_ascii_digit()) {
            let whole_part: BigInt = if whole.is_empty() || whole == "-" {
                BigInt::zero()
            } else {
                whole.parse().map_err(|_| bad())?
            };
            let negative = whole.starts_with('-');
            let scale = BigInt::from(10u8).pow(frac.len() as u32);
            let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
            let magnitude = whole_part.abs() * &scale + frac_part;
            let signed = if negative { -magnitude } else { magnitude };
            return Ok(Rational::new(signed, scale));
        }
        return Err(bad());
    }
    let num: BigInt = text.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(num))
}

/// Running prefix sums of `values`: element `j` is `values[0] + .. + values[j]`.
pub fn prefix_sums(values: &[Rational]) -> Vec<Rational> {
    let mut acc = zero();
    values
        .iter()
        .map(|v| {
            acc += v;
            acc.clone()
        })
        .collect()
}

/// Sum of any walk over rationals.
pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().fold(zero(), |acc, v| acc + v)
}

/// `f64` approximation (for progress output only, never for decisions).
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}
