//! Dense monomial expansion of a factored polynomial.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{CompiledStep, DiagQuad, FactoredPolynomial, PolyError};
use crate::numeric::Interval;

pub const DEFAULT_MONOMIAL_GUARD: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    /// Midpoint of the coefficient enclosure.
    pub coefficient: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Expansion {
    pub ordering: String,
    pub n_vars: usize,
    pub monomials: Vec<Monomial>,
    #[serde(skip)]
    pub enclosures: Vec<Interval>,
}

type Sparse = HashMap<Vec<u32>, Interval>;

fn grlex(a: &[u32], b: &[u32]) -> Ordering {
    let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
    db.cmp(&da).then_with(|| b.cmp(a))
}

fn times_quad(p: &Sparse, q: &DiagQuad<Interval>, guard: usize) -> Result<Sparse, PolyError> {
    let mut out: Sparse = HashMap::with_capacity(p.len() * 2);
    let mut put = |e: Vec<u32>, c: Interval| -> Result<(), PolyError> {
        match out.get_mut(&e) {
            Some(v) => *v = v.add(&c),
            None => {
                if out.len() >= guard {
                    return Err(PolyError::ExpansionTooLarge(guard));
                }
                out.insert(e, c);
            }
        }
        Ok(())
    };
    for (e, c) in p {
        put(e.clone(), c.mul(&q.c))?;
        for (i, a, b) in &q.terms {
            let mut e2 = e.clone();
            e2[*i] += 2;
            put(e2, c.mul(a))?;
            let mut e1 = e.clone();
            e1[*i] += 1;
            put(e1, c.mul(b))?;
        }
    }
    Ok(out)
}

/// Expands in grlex order, refusing more than `guard` monomials.
pub fn expand(f: &FactoredPolynomial, prec: u32, guard: usize) -> Result<Expansion, PolyError> {
    let n = f.n_vars;
    let c = f.compile_interval(prec);
    let mut p: Sparse = HashMap::new();
    p.insert(vec![0; n], Interval::one(prec));
    for q in &c.planar {
        p = times_quad(&p, q, guard)?;
    }
    for st in &c.steps {
        match st {
            CompiledStep::Deficit(vars) => {
                for &i in vars {
                    let mut e = vec![0; n];
                    e[i] = 2;
                    let v = p.entry(e).or_insert_with(|| Interval::zero(prec));
                    *v = v.sub(&Interval::one(prec));
                }
                if p.len() > guard {
                    return Err(PolyError::ExpansionTooLarge(guard));
                }
            }
            CompiledStep::Multiply(qs) => {
                for q in qs {
                    p = times_quad(&p, q, guard)?;
                }
            }
        }
    }
    let mut terms: Vec<(Vec<u32>, Interval)> = p.into_iter().filter(|(_, v)| !is_exact_zero(v)).collect();
    terms.sort_by(|a, b| grlex(&a.0, &b.0));
    Ok(Expansion {
        ordering: "grlex".into(),
        n_vars: n,
        monomials: terms.iter().map(|(e, v)| Monomial { exponents: e.clone(), coefficient: v.to_decimal() }).collect(),
        enclosures: terms.into_iter().map(|(_, v)| v).collect(),
    })
}

fn is_exact_zero(v: &Interval) -> bool {
    v.lo().is_zero() && v.hi().is_zero()
}

impl Expansion {
    pub fn degree(&self) -> u32 {
        self.monomials.iter().map(|m| m.exponents.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.enclosures
            .iter()
            .zip(&self.monomials)
            .map(|(c, m)| m.exponents.iter().zip(x).fold(c.mid_f64(), |acc, (&e, &v)| acc * v.powi(e as i32)))
            .sum()
    }

    /// `c*x1^2*x3 + ...` in grlex order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (idx, m) in self.monomials.iter().enumerate() {
            let (neg, mag) = match m.coefficient.strip_prefix('-') {
                Some(s) => (true, s),
                None => (false, m.coefficient.as_str()),
            };
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(mag);
            for (i, &e) in m.exponents.iter().enumerate() {
                match e {
                    0 => {}
                    1 => out.push_str(&format!("*x{}", i + 1)),
                    _ => out.push_str(&format!("*x{}^{}", i + 1, e)),
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_model::{validate, GraphSpec};
    use crate::poly::{synthesize, unit_disk, us_construct};

    #[test]
    fn sphere_expansion() {
        let e = expand(&us_construct(&unit_disk(), 1), 64, DEFAULT_MONOMIAL_GUARD).unwrap();
        assert_eq!(e.to_text(), "-1*x1^2 - 1*x2^2 - 1*x3^2 + 1");
        assert_eq!(e.degree(), 2);
    }

    #[test]
    fn expansion_agrees_with_factored_form() {
        let s = synthesize(&validate(&GraphSpec::circle(&[2, 1, 2], 5).with_handles(&[((2, 1), &[1, 0])])).unwrap(), 96).unwrap();
        let e = expand(&s.polynomial, 128, DEFAULT_MONOMIAL_GUARD).unwrap();
        assert_eq!(e.degree(), s.degree);
        let c = s.polynomial.compile_f64();
        for p in [[0.3, 1.1, 0.1, 0.0, -0.2, 0.05], [-0.9, 0.2, 0.0, 0.3, 0.1, 0.0]] {
            let (a, b) = (e.eval_f64(&p), c.eval(&p));
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn guard_trips() {
        let s = synthesize(&validate(&GraphSpec::circle(&[2, 2, 2], 2)).unwrap(), 96).unwrap();
        assert_eq!(expand(&s.polynomial, 64, 10).unwrap_err(), PolyError::ExpansionTooLarge(10));
    }

    #[test]
    fn grlex_order() {
        let mut v = vec![vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 0]];
        v.sort_by(|a, b| grlex(a, b));
        assert_eq!(v, vec![vec![2, 0], vec![1, 1], vec![0, 1], vec![0, 0]]);
    }
}
