//! Exact rational scalars and parsing of the `"a/b"` / decimal string forms
//! used by the instance file format.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Parses a rational from `"a/b"`, an integer string, or a decimal string
/// like `"1.05"`. The result is always exact.
pub fn parse_rat(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational string".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let sign = if int_part.trim_start().starts_with('-') {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        let int: BigInt = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            BigInt::zero()
        } else {
            int_part
                .parse()
                .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?
        };
        if frac_part.is_empty() {
            return Ok(BigRational::from_integer(int));
        }
        let frac: BigUint = frac_part
            .parse()
            .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = BigRational::new(sign * BigInt::from(frac), scale);
        return Ok(BigRational::from_integer(int) + frac);
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    Ok(BigRational::from_integer(n))
}

/// Formats a rational in the canonical `"a/b"` form (or `"a"` for integers).
pub fn format_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Converts a rational to `f64`, saturating on overflow.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational from a finite `f64`.
pub fn rat_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite float {x}")))
}

/// Rounds to the nearest integer, ties away from zero.
pub fn round_rat(r: &BigRational) -> BigInt {
    let two = BigInt::from(2);
    let half = BigRational::new(BigInt::one(), two);
    if r.is_negative() {
        -((-r + half).floor().to_integer())
    } else {
        (r + half).floor().to_integer()
    }
}
