//! Closed intervals with dyadic endpoints and outward rounding.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;

use super::dyadic::{Dyadic, Round};

/// A certified enclosure `[lo, hi]`. Every operation rounds outward at the
/// interval's working precision, so the true result of the exact operation
/// on any points of the operands is always contained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi, prec }
    }

    pub fn point(v: Dyadic, prec: u32) -> Self {
        Interval { lo: v.round(prec, Round::Down), hi: v.round(prec, Round::Up), prec }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Interval::point(Dyadic::from_i64(v), prec)
    }

    pub fn zero(prec: u32) -> Self {
        Interval::from_i64(0, prec)
    }

    pub fn one(prec: u32) -> Self {
        Interval::from_i64(1, prec)
    }

    pub fn from_ratio(q: &BigRational, prec: u32) -> Self {
        Interval { lo: Dyadic::from_ratio(q, prec, Round::Down), hi: Dyadic::from_ratio(q, prec, Round::Up), prec }
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        Interval::point(Dyadic::from_f64(v), prec)
    }

    /// The interval `[-r, r]`.
    pub fn symmetric(r: &Dyadic, prec: u32) -> Self {
        let r = r.abs();
        Interval::new(r.neg().round(prec, Round::Down), r.round(prec, Round::Up), prec)
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Interval { lo: self.lo.round(prec, Round::Down), hi: self.hi.round(prec, Round::Up), prec }
    }

    fn p(&self, other: &Interval) -> u32 {
        self.prec.max(other.prec)
    }

    pub fn add(&self, other: &Interval) -> Interval {
        let p = self.p(other);
        Interval { lo: self.lo.add(&other.lo, p, Round::Down), hi: self.hi.add(&other.hi, p, Round::Up), prec: p }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        let p = self.p(other);
        Interval { lo: self.lo.sub(&other.hi, p, Round::Down), hi: self.hi.sub(&other.lo, p, Round::Up), prec: p }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: self.hi.neg(), hi: self.lo.neg(), prec: self.prec }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let p = self.p(other);
        // Exact corner products, rounded once.
        let corners =
            [self.lo.mul_exact(&other.lo), self.lo.mul_exact(&other.hi), self.hi.mul_exact(&other.lo), self.hi.mul_exact(&other.hi)];
        let mut lo = corners[0].clone();
        let mut hi = corners[0].clone();
        for c in &corners[1..] {
            if *c < lo {
                lo = c.clone();
            }
            if *c > hi {
                hi = c.clone();
            }
        }
        Interval { lo: lo.round(p, Round::Down), hi: hi.round(p, Round::Up), prec: p }
    }

    pub fn scale_i64(&self, k: i64) -> Interval {
        self.mul(&Interval::from_i64(k, self.prec))
    }

    /// `x^2`, tight when the interval straddles zero.
    pub fn sqr(&self) -> Interval {
        let p = self.prec;
        let a = self.lo.mul_exact(&self.lo);
        let b = self.hi.mul_exact(&self.hi);
        let hi = a.clone().max(b.clone()).round(p, Round::Up);
        let lo = if self.contains_zero() { Dyadic::zero() } else { a.min(b).round(p, Round::Down) };
        Interval { lo, hi, prec: p }
    }

    pub fn pow(&self, n: u32) -> Interval {
        let mut acc = Interval::one(self.prec);
        let mut base = self.clone();
        let mut n = n;
        if n.is_multiple_of(2) && n > 0 {
            return self.sqr().pow(n / 2);
        }
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Division; panics when the divisor contains zero.
    pub fn div(&self, other: &Interval) -> Interval {
        assert!(!other.contains_zero(), "interval division by an interval containing zero");
        let p = self.p(other);
        let cands_lo = [
            self.lo.div(&other.lo, p, Round::Down),
            self.lo.div(&other.hi, p, Round::Down),
            self.hi.div(&other.lo, p, Round::Down),
            self.hi.div(&other.hi, p, Round::Down),
        ];
        let cands_hi = [
            self.lo.div(&other.lo, p, Round::Up),
            self.lo.div(&other.hi, p, Round::Up),
            self.hi.div(&other.lo, p, Round::Up),
            self.hi.div(&other.hi, p, Round::Up),
        ];
        let lo = cands_lo.into_iter().reduce(Dyadic::min).expect("four candidates");
        let hi = cands_hi.into_iter().reduce(Dyadic::max).expect("four candidates");
        Interval { lo, hi, prec: p }
    }

    /// Square root of the non-negative part; panics if entirely negative.
    pub fn sqrt(&self) -> Interval {
        assert!(!self.hi.is_negative(), "square root of a negative interval");
        let lo = if self.lo.is_positive() { self.lo.sqrt(self.prec, Round::Down) } else { Dyadic::zero() };
        Interval { lo, hi: self.hi.sqrt(self.prec, Round::Up), prec: self.prec }
    }

    pub fn abs(&self) -> Interval {
        if self.lo.is_negative() && self.hi.is_positive() {
            Interval { lo: Dyadic::zero(), hi: self.lo.abs().max(self.hi.clone()), prec: self.prec }
        } else if self.hi.signum() <= 0 {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.clone().min(other.lo.clone()), hi: self.hi.clone().max(other.hi.clone()), prec: self.p(other) }
    }

    /// Widens by `[-r, r]`.
    pub fn widen(&self, r: &Dyadic) -> Interval {
        self.add(&Interval::symmetric(r, self.prec))
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn contains(&self, v: &Dyadic) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Sign if certified, `None` when the interval contains zero.
    pub fn certified_sign(&self) -> Option<i32> {
        if self.is_positive() {
            Some(1)
        } else if self.is_negative() {
            Some(-1)
        } else {
            None
        }
    }

    /// Certainly less than `other` on every pair of points.
    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo, self.prec, Round::Up)
    }

    pub fn mid(&self) -> Dyadic {
        self.lo.add(&self.hi, self.prec + 1, Round::Down).mul(&Dyadic::pow2(-1), self.prec + 1, Round::Down)
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64()
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64()
    }

    /// Decimal rendering of the midpoint with about `prec` bits worth of digits.
    pub fn to_decimal(&self) -> String {
        let digits = ((self.prec as f64) * std::f64::consts::LOG10_2).floor().max(1.0) as usize;
        self.mid().to_decimal(digits)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo.to_decimal(17), self.hi.to_decimal(17))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Interval> for &Interval {
            type Output = Interval;
            fn $method(self, rhs: &Interval) -> Interval {
                Interval::$method(self, rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::neg(self)
    }
}
