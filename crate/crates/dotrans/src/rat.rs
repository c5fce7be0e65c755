//! Exact rational scalars.
//!
//! Masses are rationals by contract. Coordinates are accepted and reported as
//! `f64` but carried internally as rationals too: every finite float is a
//! dyadic rational, so the conversion in is lossless and all comparisons,
//! slopes and intersections downstream stay exact. Floats only reappear at
//! the query/serialization boundary.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub use num_rational::BigRational as Rat;

/// Exact value of a finite float. `None` for NaN or infinities.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("finite rational converts to f64")
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses "3", "-1/2", "0.25", "2.5e-3". Decimal strings are read in base 10
/// exactly ("0.1" is 1/10, not the nearest float).
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let numer = BigInt::from_str(n.trim()).ok()?;
        let denom = BigInt::from_str(d.trim()).ok()?;
        if denom.is_zero() {
            return None;
        }
        return Some(Rat::new(numer, denom));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, i32::from_str(e).ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let negative = int_part.starts_with('-');
    let int_digits = int_part.strip_prefix(['-', '+']).unwrap_or(int_part);
    if (int_digits.is_empty() && frac_part.is_empty())
        || !int_digits.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_digits}{frac_part}");
    let mut numer = BigInt::from_str(&digits).ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exp - frac_part.len() as i32;
    let pow = BigInt::from(10).pow(scale.unsigned_abs());
    Some(if scale >= 0 {
        Rat::from_integer(numer * pow)
    } else {
        Rat::new(numer, pow)
    })
}

/// "1/2" for fractions, "3" for integers. Inverse of `parse_rat` on its image.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

/// Shortest round-trip decimal for a float, the form used in all text output.
pub fn format_f64(x: f64) -> String {
    format!("{x}")
}

pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

pub fn rat_min<'a>(a: &'a Rat, b: &'a Rat) -> &'a Rat {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn rat_max<'a>(a: &'a Rat, b: &'a Rat) -> &'a Rat {
    if a >= b {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn float_conversion_is_lossless() {
        for x in [0.0, 1.2, -0.5, 1e-10, 12345.6789, f64::MIN_POSITIVE] {
            let r = rat_from_f64(x).unwrap();
            assert_eq!(rat_to_f64(&r), x);
        }
        assert!(rat_from_f64(f64::NAN).is_none());
        assert!(rat_from_f64(f64::INFINITY).is_none());
    }

    #[test]
    fn parses_fractions_integers_decimals() {
        assert_eq!(parse_rat("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rat(" -2/4 ").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat("3").unwrap(), rat_int(3));
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_rat("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rat("2.5e-3").unwrap(), rat(1, 400));
        assert_eq!(parse_rat("1e2").unwrap(), rat_int(100));
        assert_eq!(parse_rat(".5").unwrap(), rat(1, 2));
        for bad in ["", "a", "1/0", "1.2.3", "1/2/3", "--1", "1e", "e5"] {
            assert!(parse_rat(bad).is_none(), "accepted {bad:?}");
        }
    }

    #[test]
    fn formats_reduced() {
        assert_eq!(format_rat(&rat(2, 4)), "1/2");
        assert_eq!(format_rat(&rat_int(3)), "3");
        assert_eq!(format_rat(&rat(-1, 3)), "-1/3");
        assert!(Rat::one().is_integer());
    }
}
