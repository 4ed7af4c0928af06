//! Exact rational helpers: decimal parsing, canonical printing and lattice gcd.

use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number used for every model parameter and state value.
pub type Rational = num_rational::Ratio<i64>;

/// Parses `"2.01"`, `"-0.5"`, `"3"` or `"7/3"` into an exact rational.
///
/// Binary floating point is never involved, so `"2.01"` is exactly `201/100`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not an exact decimal or fraction: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num.trim().parse().map_err(|_| bad())?;
        let d: i64 = den.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if frac_part.len() > 18 {
        return Err(Error::Parse(format!("too many decimal digits in {text:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: i64 = if digits.is_empty() {
        0
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let denom = 10_i64.pow(frac_part.len() as u32);
    let value = Rational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

/// Canonical exact text for a rational: a terminating decimal when one exists,
/// otherwise `p/q`.
pub fn format_rational(value: &Rational) -> String {
    Exact(value).to_string()
}

/// Display adapter producing the same text as [`format_rational`].
pub struct Exact<'a>(pub &'a Rational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.0;
        let mut den = *v.denom();
        let (mut twos, mut fives) = (0u32, 0u32);
        while den % 2 == 0 {
            den /= 2;
            twos += 1;
        }
        while den % 5 == 0 {
            den /= 5;
            fives += 1;
        }
        if den != 1 {
            return write!(f, "{}/{}", v.numer(), v.denom());
        }
        let places = twos.max(fives);
        let scale = 10_i128.pow(places);
        let scaled = *v.numer() as i128 * scale / *v.denom() as i128;
        let sign = if scaled < 0 { "-" } else { "" };
        let abs = scaled.abs();
        let int = abs / scale;
        if places == 0 {
            write!(f, "{sign}{int}")
        } else {
            let frac = abs % scale;
            write!(f, "{sign}{int}.{frac:0width$}", width = places as usize)
        }
    }
}

/// Greatest common step of a collection of rationals: the largest `α > 0`
/// such that every value is an integer multiple of `α`. Zeros are ignored;
/// returns `None` when every value is zero.
pub fn rational_gcd<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
    let mut acc: Option<Rational> = None;
    for v in values {
        if v.is_zero() {
            continue;
        }
        let v = v.abs();
        acc = Some(match acc {
            None => v,
            Some(a) => {
                // gcd(p/q, r/s) = gcd(p·s, r·q) / (q·s), reduced by Ratio::new.
                let n = (a.numer() * v.denom()).gcd(&(v.numer() * a.denom()));
                Rational::new(n, a.denom() * v.denom())
            }
        });
    }
    acc
}

/// `⌊x⌋` as an integer.
pub fn floor_int(x: &Rational) -> i64 {
    x.floor().to_integer()
}

/// `⌈x⌉` as an integer.
pub fn ceil_int(x: &Rational) -> i64 {
    x.ceil().to_integer()
}
