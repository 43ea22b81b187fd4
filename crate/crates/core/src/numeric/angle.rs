use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An angle stored exactly as a rational fraction of a full turn, so
/// `StructuredAngle::new(1, 3)` is `2π/3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StructuredAngle(Ratio<i64>);

impl StructuredAngle {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        StructuredAngle(Ratio::new(num, den))
    }

    pub fn turns(&self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    /// Reduced into `[0, 1)` turns.
    pub fn normalized(&self) -> Self {
        let n = self.numer().rem_euclid(self.denom());
        StructuredAngle::new(n, self.denom())
    }

    /// Reduced into `(0, 1]` turns; full-turn multiples map to `1`.
    pub fn normalized_positive(&self) -> Self {
        let a = self.normalized();
        if a.numer() == 0 {
            StructuredAngle::new(1, 1)
        } else {
            a
        }
    }

    pub fn add(&self, other: &StructuredAngle) -> Self {
        StructuredAngle(self.0 + other.0)
    }

    pub fn sub(&self, other: &StructuredAngle) -> Self {
        StructuredAngle(self.0 - other.0)
    }

    pub fn midpoint(&self, other: &StructuredAngle) -> Self {
        StructuredAngle((self.0 + other.0) / 2)
    }

    pub fn to_radians(&self) -> f64 {
        (*self.0.numer() as f64 / *self.0.denom() as f64) * std::f64::consts::TAU
    }

    /// Angle as `n/d` of a full turn in lowest terms.
    pub fn to_fraction_string(&self) -> String {
        let g = self.numer().gcd(&self.denom());
        format!("{}/{}", self.numer() / g, self.denom() / g)
    }
}

impl PartialOrd for StructuredAngle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for StructuredAngle {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Display for StructuredAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_fraction_string())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("malformed angle fraction {0:?}")]
pub struct ParseAngleError(String);

impl FromStr for StructuredAngle {
    type Err = ParseAngleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseAngleError(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: i64 = n.parse().map_err(|_| err())?;
        let d: i64 = d.parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        Ok(StructuredAngle::new(n, d))
    }
}

impl Serialize for StructuredAngle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_fraction_string())
    }
}

impl<'de> Deserialize<'de> for StructuredAngle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(StructuredAngle::new(4, 3).normalized(), StructuredAngle::new(1, 3));
        assert_eq!(StructuredAngle::new(-1, 4).normalized(), StructuredAngle::new(3, 4));
        assert_eq!(StructuredAngle::new(3, 3).normalized_positive(), StructuredAngle::new(1, 1));
    }

    #[test]
    fn parse_and_print() {
        let a: StructuredAngle = "2/6".parse().unwrap();
        assert_eq!(a.to_string(), "1/3");
        assert!("1/0".parse::<StructuredAngle>().is_err());
        assert_eq!("1".parse::<StructuredAngle>().unwrap(), StructuredAngle::new(1, 1));
    }
}
