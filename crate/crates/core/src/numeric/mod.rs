//! Exact and certified numerics: dyadic floats, outward-rounded intervals,
//! exact angles and trigonometric enclosures.

pub mod angle;
pub mod dyadic;
pub mod interval;
pub mod trig;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use angle::StructuredAngle;
pub use dyadic::{decimal_string, Dyadic, Round};
pub use interval::Interval;

/// Default working precision in bits.
pub const DEFAULT_PRECISION_BITS: u32 = 128;

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `p/q` in lowest terms (or `p` for integers).
pub fn ratio_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.25` or `-1.5e-3`.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().ok()?),
        None => (s, 0),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches(['-', '+']);
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    Some(q)
}

/// Exact dyadic rational closest below `v` with at most `bits` significant bits.
pub fn dyadic_ratio_from_f64(v: f64, bits: u32) -> BigRational {
    Dyadic::from_f64(v).round(bits, Round::Down).to_ratio()
}

pub fn ratio_to_f64(q: &BigRational) -> f64 {
    Dyadic::from_ratio(q, 64, Round::Down).to_f64()
}

pub fn is_positive_ratio(q: &BigRational) -> bool {
    q.is_positive()
}

/// Serde adapter storing a `BigRational` as a `"p/q"` string.
pub mod ratio_serde {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::ratio_to_string(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_ratio(&s).ok_or_else(|| serde::de::Error::custom(format!("malformed rational {s:?}")))
    }
}

/// Same as [`ratio_serde`] for optional fields.
pub mod opt_ratio_serde {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_str(&super::ratio_to_string(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        match s {
            None => Ok(None),
            Some(s) => super::parse_ratio(&s).map(Some).ok_or_else(|| serde::de::Error::custom(format!("malformed rational {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_ratio("3/12"), Some(ratio(1, 4)));
        assert_eq!(parse_ratio("0.25"), Some(ratio(1, 4)));
        assert_eq!(parse_ratio("-1.5e-1"), Some(ratio(-3, 20)));
        assert_eq!(parse_ratio("7"), Some(ratio(7, 1)));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(parse_ratio("abc"), None);
        assert_eq!(ratio_to_string(&ratio(6, 4)), "3/2");
    }
}
