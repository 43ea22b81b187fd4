//! Certified enclosures of π and of sine/cosine at rational multiples of a turn.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::angle::StructuredAngle;
use super::dyadic::Dyadic;
use super::interval::Interval;

const GUARD_BITS: u32 = 24;

/// `atan(1/n)` by its alternating series with a tail bound.
fn atan_inv(n: i64, prec: u32) -> Interval {
    let wp = prec + GUARD_BITS;
    let inv_n = Interval::one(wp).div(&Interval::from_i64(n, wp));
    let inv_n2 = inv_n.sqr();
    let tol = Dyadic::pow2(-(wp as i64) - 4);
    let mut power = inv_n.clone();
    let mut sum = Interval::zero(wp);
    let mut k: i64 = 0;
    loop {
        let term = power.div(&Interval::from_i64(2 * k + 1, wp));
        if term.hi() < &tol {
            // Alternating with decreasing terms: the tail is bounded by this term.
            return sum.widen(term.hi()).with_prec(prec);
        }
        sum = if k % 2 == 0 { sum.add(&term) } else { sum.sub(&term) };
        power = power.mul(&inv_n2);
        k += 1;
    }
}

/// π by Machin's formula.
pub fn pi(prec: u32) -> Interval {
    let wp = prec + GUARD_BITS;
    let a = atan_inv(5, wp).scale_i64(16);
    let b = atan_inv(239, wp).scale_i64(4);
    a.sub(&b).with_prec(prec)
}

/// Taylor series for (sin x, cos x) with `|x| <= 1`.
fn sin_cos_small(x: &Interval) -> (Interval, Interval) {
    let wp = x.prec();
    let x2 = x.sqr();
    let tol = Dyadic::pow2(-(wp as i64) - 4);

    let mut sin = Interval::zero(wp);
    let mut term = x.clone();
    let mut k: i64 = 0;
    loop {
        let mag = term.abs();
        if mag.hi() < &tol {
            sin = sin.widen(mag.hi());
            break;
        }
        sin = sin.add(&term);
        term = term.mul(&x2).div(&Interval::from_i64((2 * k + 2) * (2 * k + 3), wp)).neg();
        k += 1;
    }

    let mut cos = Interval::zero(wp);
    let mut term = Interval::one(wp);
    let mut k: i64 = 0;
    loop {
        let mag = term.abs();
        if mag.hi() < &tol {
            cos = cos.widen(mag.hi());
            break;
        }
        cos = cos.add(&term);
        term = term.mul(&x2).div(&Interval::from_i64((2 * k + 1) * (2 * k + 2), wp)).neg();
        k += 1;
    }
    (sin, cos)
}

/// Certified `(cos θ, sin θ)` for an exactly represented angle. Exact at
/// multiples of a quarter turn.
pub fn cos_sin(angle: &StructuredAngle, prec: u32) -> (Interval, Interval) {
    let a = angle.normalized();
    let (n, d) = (a.numer(), a.denom());
    // quarter index and the remainder inside the quarter, as a fraction num4/d of a quarter
    let quarter = (4 * n) / d;
    let rem = 4 * n - quarter * d;
    let (c, s) = if rem == 0 {
        (Interval::one(prec), Interval::zero(prec))
    } else {
        let wp = prec + GUARD_BITS;
        let half_pi = pi(wp).mul(&Interval::from_ratio(&BigRational::new(BigInt::from(1), BigInt::from(2)), wp));
        // Reflect the larger half of the quarter so the series argument stays below π/4.
        let reflect = 2 * rem > d;
        let frac = if reflect { d - rem } else { rem };
        let t = half_pi.mul(&Interval::from_ratio(&BigRational::new(BigInt::from(frac), BigInt::from(d)), wp));
        let (st, ct) = sin_cos_small(&t);
        let (c, s) = if reflect { (st, ct) } else { (ct, st) };
        (c.with_prec(prec), s.with_prec(prec))
    };
    match quarter {
        0 => (c, s),
        1 => (s.neg(), c),
        2 => (c.neg(), s.neg()),
        _ => (s, c.neg()),
    }
}

/// `sin(π/k)`, the sine of the half-angle of a sector of a `k`-fold division.
pub fn sin_half_sector(k: u32, prec: u32) -> Interval {
    cos_sin(&StructuredAngle::new(1, 2 * k as i64), prec).1
}

/// `cos(π/k)`.
pub fn cos_half_sector(k: u32, prec: u32) -> Interval {
    cos_sin(&StructuredAngle::new(1, 2 * k as i64), prec).0
}

/// Certified enclosure of a rational number.
pub fn rational(q: &BigRational, prec: u32) -> Interval {
    if q.is_zero() {
        return Interval::zero(prec);
    }
    Interval::from_ratio(q, prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_encloses_reference_value() {
        let p = pi(200);
        assert!(p.lo_f64() <= std::f64::consts::PI && std::f64::consts::PI <= p.hi_f64());
        assert!(p.width().to_f64() < 1e-55);
    }

    #[test]
    fn exact_quarter_turns() {
        let (c, s) = cos_sin(&StructuredAngle::new(3, 4), 64);
        assert!(c.lo().is_zero() && c.hi().is_zero());
        assert_eq!(s.lo().to_f64(), -1.0);
    }

    #[test]
    fn sixty_degrees() {
        let s = sin_half_sector(3, 128);
        let want = 3f64.sqrt() / 2.0;
        assert!((s.mid_f64() - want).abs() < 1e-15);
        // sin^2 + cos^2 = 1 within the enclosure width
        let c = cos_half_sector(3, 128);
        let one = s.sqr().add(&c.sqr());
        assert!(one.contains(&Dyadic::one()));
        assert!(one.width().to_f64() < 1e-30);
    }

    #[test]
    fn matches_libm_across_the_circle() {
        for den in [3i64, 5, 7, 12, 24, 97] {
            for num in 0..2 * den {
                let a = StructuredAngle::new(num, den);
                let (c, s) = cos_sin(&a, 96);
                let t = a.to_radians();
                assert!((c.mid_f64() - t.cos()).abs() < 1e-14, "cos {a}");
                assert!((s.mid_f64() - t.sin()).abs() < 1e-14, "sin {a}");
                assert!(c.width().to_f64() < 1e-25);
            }
        }
    }
}
