//! Binary floating point numbers of arbitrary precision with directed rounding.
//!
//! A [`Dyadic`] is `mantissa * 2^exponent` with an unbounded exponent. Every
//! inexact operation takes a precision (significant bits) and a rounding
//! direction, which is all interval arithmetic needs.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for inexact results.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

impl Round {
    pub fn flip(self) -> Round {
        match self {
            Round::Down => Round::Up,
            Round::Up => Round::Down,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn floor_shr(m: &BigInt, shift: u64) -> BigInt {
    // `>>` on BigInt rounds toward negative infinity.
    m >> shift
}

fn ceil_shr(m: &BigInt, shift: u64) -> BigInt {
    -floor_shr(&-m, shift)
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_i64(v: i64) -> Self {
        Dyadic { mant: BigInt::from(v), exp: 0 }
    }

    pub fn from_parts(mant: BigInt, exp: i64) -> Self {
        Dyadic { mant, exp }.normalized()
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: e }
    }

    /// Exact conversion; every finite `f64` is dyadic.
    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "non-finite value {v}");
        if v == 0.0 {
            return Dyadic::zero();
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 { (frac as i64, -1074) } else { ((frac | (1u64 << 52)) as i64, raw_exp - 1075) };
        Dyadic::from_parts(BigInt::from(sign * m), e)
    }

    /// Rounds a rational to `prec` significant bits.
    pub fn from_ratio(q: &BigRational, prec: u32, dir: Round) -> Self {
        Dyadic::from_parts(q.numer().clone(), 0).div(&Dyadic::from_parts(q.denom().clone(), 0), prec, dir)
    }

    /// Exact value as a rational.
    pub fn to_ratio(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    fn normalized(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// Position of the leading bit plus one: `2^(top-1) <= |x| < 2^top`.
    fn top(&self) -> i64 {
        self.mant.bits() as i64 + self.exp
    }

    pub fn neg(&self) -> Self {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Rounds to at most `prec` significant bits.
    pub fn round(&self, prec: u32, dir: Round) -> Self {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        let mant = match dir {
            Round::Down => floor_shr(&self.mant, shift),
            Round::Up => ceil_shr(&self.mant, shift),
        };
        Dyadic::from_parts(mant, self.exp + shift as i64)
    }

    pub fn add(&self, other: &Dyadic, prec: u32, dir: Round) -> Self {
        if self.is_zero() {
            return other.round(prec, dir);
        }
        if other.is_zero() {
            return self.round(prec, dir);
        }
        let (big, small) = if self.top() >= other.top() { (self, other) } else { (other, self) };
        // Replace a negligible operand by a sticky bit that rounds identically.
        let sticky_exp = big.exp.min(big.top() - prec as i64) - 4;
        let small_owned;
        let small = if small.top() < sticky_exp {
            small_owned = Dyadic { mant: BigInt::from(small.signum()), exp: sticky_exp - 1 };
            &small_owned
        } else {
            small
        };
        let e = big.exp.min(small.exp);
        let m = (&big.mant << (big.exp - e) as u64) + (&small.mant << (small.exp - e) as u64);
        Dyadic::from_parts(m, e).round(prec, dir)
    }

    pub fn sub(&self, other: &Dyadic, prec: u32, dir: Round) -> Self {
        self.add(&other.neg(), prec, dir)
    }

    pub fn mul(&self, other: &Dyadic, prec: u32, dir: Round) -> Self {
        Dyadic::from_parts(&self.mant * &other.mant, self.exp + other.exp).round(prec, dir)
    }

    /// Exact product, no rounding.
    pub fn mul_exact(&self, other: &Dyadic) -> Self {
        Dyadic::from_parts(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn div(&self, other: &Dyadic, prec: u32, dir: Round) -> Self {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let shift = (prec as i64 + other.mant.bits() as i64 - self.mant.bits() as i64 + 2).max(0);
        let num = &self.mant << shift as u64;
        let q = match dir {
            Round::Down => num.div_floor(&other.mant),
            Round::Up => -((-num).div_floor(&other.mant)),
        };
        Dyadic::from_parts(q, self.exp - other.exp - shift).round(prec, dir)
    }

    /// Square root of a non-negative value.
    pub fn sqrt(&self, prec: u32, dir: Round) -> Self {
        assert!(!self.is_negative(), "square root of negative value");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let mut shift = (2 * prec as i64 + 4 - self.mant.bits() as i64).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = &self.mant << shift as u64;
        let mut r = m.sqrt();
        if dir == Round::Up && &r * &r != m {
            r += 1;
        }
        Dyadic::from_parts(r, (self.exp - shift) / 2).round(prec, dir)
    }

    pub fn min(self, other: Dyadic) -> Dyadic {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Dyadic) -> Dyadic {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Approximate `f64` from the leading 60 bits; saturates to infinity.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let keep = bits.min(60);
        let m = floor_shr(&self.mant, (bits - keep) as u64).to_i64().unwrap_or(0);
        let e = self.exp + bits - keep;
        let mut v = m as f64;
        // Scale in steps to avoid intermediate overflow of powi.
        let mut e = e;
        while e > 0 {
            let step = e.min(512);
            v *= 2f64.powi(step as i32);
            e -= step;
        }
        while e < 0 {
            let step = (-e).min(512);
            v /= 2f64.powi(step as i32);
            e += step;
        }
        v
    }

    /// Decimal rendering with `digits` significant digits (truncated toward zero).
    pub fn to_decimal(&self, digits: usize) -> String {
        decimal_string(&self.to_ratio(), digits)
    }
}

/// Renders a rational with `digits` significant digits, truncating toward
/// zero. Plain notation for moderate exponents, `e` notation otherwise.
pub fn decimal_string(q: &BigRational, digits: usize) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let neg = q.is_negative();
    let q = q.abs();
    // Find the decimal exponent e with 10^e <= q < 10^(e+1).
    let mut e: i64 = (q.numer().bits() as i64 - q.denom().bits() as i64) * 30103 / 100000;
    let pow = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(num_traits::pow(BigInt::from(10), k as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), (-k) as usize))
        }
    };
    while pow(e) > q {
        e -= 1;
    }
    while pow(e + 1) <= q {
        e += 1;
    }
    let scaled = &q / pow(e) * pow(digits as i64 - 1);
    let int = scaled.to_integer();
    let mut s = int.to_string();
    while s.len() > 1 && s.ends_with('0') {
        s.pop();
    }
    let sign = if neg { "-" } else { "" };
    if (-6..=15).contains(&e) {
        if e >= 0 {
            let e = e as usize;
            if s.len() <= e + 1 {
                let zeros = "0".repeat(e + 1 - s.len());
                format!("{sign}{s}{zeros}")
            } else {
                format!("{sign}{}.{}", &s[..e + 1], &s[e + 1..])
            }
        } else {
            let zeros = "0".repeat((-e - 1) as usize);
            format!("{sign}0.{zeros}{s}")
        }
    } else if s.len() == 1 {
        format!("{sign}{s}e{e}")
    } else {
        format!("{sign}{}.{}e{e}", &s[..1], &s[1..])
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let (ta, tb) = (self.top(), other.top());
        if ta != tb {
            let mag = ta.cmp(&tb);
            return if sa > 0 { mag } else { mag.reverse() };
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(20))
    }
}
