//! Exact rational scalars and their text forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact rational number with arbitrary-precision numerator and denominator.
///
/// Values are always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"7"`, `"-11/8"`, `"0.3"` or `"-.5"`-free decimal forms into an exact rational.
pub fn parse_rational(src: &str) -> Option<Rational> {
    let s = src.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    let value = if let Some((num, den)) = body.split_once('/') {
        let num = parse_uint(num.trim())?;
        let den = parse_uint(den.trim())?;
        if den.is_zero() {
            return None;
        }
        Rational::new(num, den)
    } else if let Some((whole, frac)) = body.split_once('.') {
        decimal(whole, frac)?
    } else {
        Rational::from_integer(parse_uint(body)?)
    };
    Some(if neg { -value } else { value })
}

fn parse_uint(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Exact value of the decimal literal `whole.frac`.
pub(crate) fn decimal(whole: &str, frac: &str) -> Option<Rational> {
    let whole = parse_uint(whole)?;
    if frac.is_empty() {
        return Some(Rational::from_integer(whole));
    }
    let digits = parse_uint(frac)?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::from_integer(whole) + Rational::new(digits, scale))
}

/// Canonical text form: `"3"`, `"-11/8"`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest `f64`, robust to numerators and denominators beyond the `f64` range.
pub fn to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both parts so they fit, then divide.
    let nbits = r.numer().bits() as i64;
    let dbits = r.denom().bits() as i64;
    let shift_n = (nbits - 60).max(0) as usize;
    let shift_d = (dbits - 60).max(0) as usize;
    let n = (r.numer().abs() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d).to_f64().unwrap_or(1.0);
    let mag = n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32);
    if r.is_negative() {
        -mag
    } else {
        mag
    }
}

pub mod serde_rational {
    //! Serde adapters that store rationals as canonical strings.
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| D::Error::custom(format!("invalid rational {s:?}")))
    }

    pub mod vec {
        use super::super::{format_rational, parse_rational, Rational};
        use serde::{de::Error, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(format_rational))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| parse_rational(s).ok_or_else(|| D::Error::custom(format!("invalid rational {s:?}"))))
                .collect()
        }
    }

    pub mod matrix {
        use super::super::{format_rational, parse_rational, Rational};
        use serde::{de::Error, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(m.iter().map(|row| row.iter().map(format_rational).collect::<Vec<_>>()))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
            Vec::<Vec<String>>::deserialize(d)?
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|s| parse_rational(s).ok_or_else(|| D::Error::custom(format!("invalid rational {s:?}"))))
                        .collect()
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse_rational("1"), Some(int(1)));
        assert_eq!(parse_rational("-11/8"), Some(rat(-11, 8)));
        assert_eq!(parse_rational("0.3"), Some(rat(3, 10)));
        assert_eq!(parse_rational("1.0"), Some(int(1)));
        assert_eq!(parse_rational("0.05"), Some(rat(1, 20)));
        assert_eq!(parse_rational("4/6"), Some(rat(2, 3)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&rat(-22, 16)), "-11/8");
        assert_eq!(format_rational(&int(5)), "5");
    }

    #[test]
    fn huge_rationals_convert_to_f64() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let r = Rational::new(big.clone() * 3, big);
        assert!((to_f64(&r) - 3.0).abs() < 1e-12);
        let tiny = Rational::new(BigInt::from(-1), num_traits::pow(BigInt::from(2), 1100));
        assert_eq!(to_f64(&tiny), -0.0);
    }
}
