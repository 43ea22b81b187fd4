//! Defining polynomials in factored form: planar quadratic factors, unit
//! sphere deficits `- Σ y²` and staged ellipsoid factors.

pub mod expand;
pub mod height;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::graph_model::{Mode, ValidatedSpec};
use crate::layout::{build_arrangement, CircleArrangement, CircleGeometry, LayoutError, PlacedCircle, Role};
use crate::numeric::{ratio_serde, trig, Interval};

pub use expand::{expand, Expansion, Monomial, DEFAULT_MONOMIAL_GUARD};
pub use height::{disk_lower_bound, ellipsoid_height, ellipsoid_height_with, HeightOptions};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("polynomial has no factors")]
    NoFactors,
    #[error("height failure for {0}: no certified positive lower bound on the disk")]
    HeightFailure(String),
    #[error("expansion would exceed {0} monomials")]
    ExpansionTooLarge(usize),
    #[error("degree {found} differs from the closed form {expected}")]
    DegreeMismatch { expected: u32, found: u32 },
}

/// A quadratic factor `Σ (α_i x_i² + β_i x_i) + c` with structured parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    /// `(1+a)² - x1² - x2²`
    AnnulusOuter {
        #[serde(with = "ratio_serde")]
        a: BigRational,
    },
    /// `x1² + x2² - (1-a)²`
    AnnulusInner {
        #[serde(with = "ratio_serde")]
        a: BigRational,
    },
    /// `‖x - b‖² - r²`, positive outside the disk.
    Disk { circle: usize, k: u32, geometry: CircleGeometry },
    /// `A²B² - B²(x1 - cx)² - A² x2²`, positive inside the ellipse.
    EllipseOuter {
        #[serde(with = "ratio_serde")]
        center_x: BigRational,
        #[serde(with = "ratio_serde")]
        semi_x: BigRational,
        #[serde(with = "ratio_serde")]
        semi_y: BigRational,
    },
    /// `h²‖x - b‖² + r² Σ_t y_t² - r²h²`, positive outside the ellipsoid.
    Ellipsoid {
        circle: usize,
        k: u32,
        geometry: CircleGeometry,
        #[serde(with = "ratio_serde")]
        height: BigRational,
        transverse: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Step {
    /// Subtract the squares of fresh variables.
    Deficit { vars: Vec<usize> },
    /// Multiply by the ellipsoid factors of one stage.
    Ellipsoids { stage: u32, factors: Vec<Factor> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredPolynomial {
    pub n_vars: usize,
    pub planar: Vec<Factor>,
    pub steps: Vec<Step>,
}

/// Diagonal quadratic with coefficients in `T`.
#[derive(Clone, Debug)]
pub struct DiagQuad<T> {
    /// `(variable, α, β)`
    pub terms: Vec<(usize, T, T)>,
    pub c: T,
}

pub trait Scalar: Clone {
    fn from_i64(v: i64, prec: u32) -> Self;
    fn from_ratio(q: &BigRational, prec: u32) -> Self;
    fn from_interval(v: &Interval) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn sqr(&self) -> Self {
        self.mul(self)
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64, _: u32) -> Self {
        v as f64
    }
    fn from_ratio(q: &BigRational, _: u32) -> Self {
        crate::numeric::ratio_to_f64(q)
    }
    fn from_interval(v: &Interval) -> Self {
        v.mid_f64()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

impl Scalar for Interval {
    fn from_i64(v: i64, prec: u32) -> Self {
        Interval::from_i64(v, prec)
    }
    fn from_ratio(q: &BigRational, prec: u32) -> Self {
        Interval::from_ratio(q, prec)
    }
    fn from_interval(v: &Interval) -> Self {
        v.clone()
    }
    fn add(&self, o: &Self) -> Self {
        Interval::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Interval::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Interval::mul(self, o)
    }
    fn sqr(&self) -> Self {
        Interval::sqr(self)
    }
}

impl<T: Scalar> DiagQuad<T> {
    pub fn eval(&self, x: &[T]) -> T {
        let mut v = self.c.clone();
        for (i, a, b) in &self.terms {
            v = v.add(&a.mul(&x[*i].sqr())).add(&b.mul(&x[*i]));
        }
        v
    }

    /// Adds `scale · ∇q(x)` into `grad`.
    fn add_scaled_gradient(&self, x: &[T], scale: &T, grad: &mut [T], prec: u32) {
        let two = T::from_i64(2, prec);
        for (i, a, b) in &self.terms {
            let d = two.mul(a).mul(&x[*i]).add(b);
            grad[*i] = grad[*i].add(&scale.mul(&d));
        }
    }
}

/// Circle centre and radius enclosures of a structured geometry.
pub(crate) fn circle_params(geometry: &CircleGeometry, k: u32, prec: u32) -> (Interval, Interval, Interval) {
    match geometry {
        CircleGeometry::Polar { d, center_angle } => {
            let (c, s) = trig::cos_sin(center_angle, prec);
            let d = Interval::from_ratio(d, prec);
            let r = d.mul(&trig::sin_half_sector(k, prec));
            (d.mul(&c), d.mul(&s), r)
        }
        CircleGeometry::Cartesian { center_x, center_y, radius } => {
            (Interval::from_ratio(center_x, prec), Interval::from_ratio(center_y, prec), Interval::from_ratio(radius, prec))
        }
    }
}

impl Factor {
    pub fn compile(&self, prec: u32) -> DiagQuad<Interval> {
        let iv = |q: &BigRational| Interval::from_ratio(q, prec);
        let one = Interval::one(prec);
        let zero = Interval::zero(prec);
        let two = Interval::from_i64(2, prec);
        match self {
            Factor::AnnulusOuter { a } => {
                DiagQuad { terms: vec![(0, one.neg(), zero.clone()), (1, one.neg(), zero)], c: one.add(&iv(a)).sqr() }
            }
            Factor::AnnulusInner { a } => {
                DiagQuad { terms: vec![(0, one.clone(), zero.clone()), (1, one.clone(), zero)], c: one.sub(&iv(a)).sqr().neg() }
            }
            Factor::Disk { k, geometry, .. } => {
                let (cx, cy, r) = circle_params(geometry, *k, prec);
                DiagQuad {
                    terms: vec![(0, one.clone(), two.mul(&cx).neg()), (1, one, two.mul(&cy).neg())],
                    c: cx.sqr().add(&cy.sqr()).sub(&r.sqr()),
                }
            }
            Factor::EllipseOuter { center_x, semi_x, semi_y } => {
                let (cx, a2, b2) = (iv(center_x), iv(semi_x).sqr(), iv(semi_y).sqr());
                DiagQuad { terms: vec![(0, b2.neg(), two.mul(&b2).mul(&cx)), (1, a2.neg(), zero)], c: a2.mul(&b2).sub(&b2.mul(&cx.sqr())) }
            }
            Factor::Ellipsoid { k, geometry, height, transverse, .. } => {
                let (cx, cy, r) = circle_params(geometry, *k, prec);
                let h2 = iv(height).sqr();
                let r2 = r.sqr();
                let mut terms = vec![(0, h2.clone(), two.mul(&h2).mul(&cx).neg()), (1, h2.clone(), two.mul(&h2).mul(&cy).neg())];
                for &t in transverse {
                    terms.push((t, r2.clone(), zero.clone()));
                }
                DiagQuad { terms, c: h2.mul(&cx.sqr().add(&cy.sqr())).sub(&r2.mul(&h2)) }
            }
        }
    }
}

/// Compiled form for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct Compiled<T> {
    pub n_vars: usize,
    pub prec: u32,
    pub planar: Vec<DiagQuad<T>>,
    pub steps: Vec<CompiledStep<T>>,
}

#[derive(Clone, Debug)]
pub enum CompiledStep<T> {
    Deficit(Vec<usize>),
    Multiply(Vec<DiagQuad<T>>),
}

fn convert<T: Scalar>(q: &DiagQuad<Interval>) -> DiagQuad<T> {
    DiagQuad { terms: q.terms.iter().map(|(i, a, b)| (*i, T::from_interval(a), T::from_interval(b))).collect(), c: T::from_interval(&q.c) }
}

impl<T: Scalar> Compiled<T> {
    /// Value after the planar product and the first `steps` steps.
    pub fn eval_prefix(&self, x: &[T], steps: usize) -> T {
        let mut v = T::from_i64(1, self.prec);
        for q in &self.planar {
            v = v.mul(&q.eval(x));
        }
        for st in self.steps.iter().take(steps) {
            match st {
                CompiledStep::Deficit(vars) => {
                    for &i in vars {
                        v = v.sub(&x[i].sqr());
                    }
                }
                CompiledStep::Multiply(qs) => {
                    for q in qs {
                        v = v.mul(&q.eval(x));
                    }
                }
            }
        }
        v
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.eval_prefix(x, self.steps.len())
    }

    /// Value and gradient by product-rule accumulation.
    pub fn eval_gradient(&self, x: &[T]) -> (T, Vec<T>) {
        let p = self.prec;
        let mut v = T::from_i64(1, p);
        let mut g = vec![T::from_i64(0, p); self.n_vars];
        let mul_in = |v: &mut T, g: &mut Vec<T>, q: &DiagQuad<T>| {
            let f = q.eval(x);
            for gi in g.iter_mut() {
                *gi = gi.mul(&f);
            }
            q.add_scaled_gradient(x, v, g, p);
            *v = v.mul(&f);
        };
        for q in &self.planar {
            mul_in(&mut v, &mut g, q);
        }
        let two = T::from_i64(2, p);
        for st in &self.steps {
            match st {
                CompiledStep::Deficit(vars) => {
                    for &i in vars {
                        v = v.sub(&x[i].sqr());
                        g[i] = g[i].sub(&two.mul(&x[i]));
                    }
                }
                CompiledStep::Multiply(qs) => {
                    for q in qs {
                        mul_in(&mut v, &mut g, q);
                    }
                }
            }
        }
        (v, g)
    }
}

impl FactoredPolynomial {
    pub fn degree(&self) -> Result<u32, PolyError> {
        if self.planar.is_empty() {
            return Err(PolyError::NoFactors);
        }
        let ellipsoids: usize = self
            .steps
            .iter()
            .map(|s| match s {
                Step::Ellipsoids { factors, .. } => factors.len(),
                Step::Deficit { .. } => 0,
            })
            .sum();
        Ok(2 * (self.planar.len() + ellipsoids) as u32)
    }

    pub fn ellipsoid_count(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match s {
                Step::Ellipsoids { factors, .. } => factors.len(),
                Step::Deficit { .. } => 0,
            })
            .sum()
    }

    pub fn compile_interval(&self, prec: u32) -> Compiled<Interval> {
        self.compile_with(prec)
    }

    pub fn compile_f64(&self) -> Compiled<f64> {
        self.compile_with(64)
    }

    fn compile_with<T: Scalar>(&self, prec: u32) -> Compiled<T> {
        Compiled {
            n_vars: self.n_vars,
            prec,
            planar: self.planar.iter().map(|f| convert(&f.compile(prec))).collect(),
            steps: self
                .steps
                .iter()
                .map(|s| match s {
                    Step::Deficit { vars } => CompiledStep::Deficit(vars.clone()),
                    Step::Ellipsoids { factors, .. } => CompiledStep::Multiply(factors.iter().map(|f| convert(&f.compile(prec))).collect()),
                })
                .collect(),
        }
    }

    /// The polynomial after only the first `steps` steps.
    pub fn prefix(&self, steps: usize) -> FactoredPolynomial {
        let steps: Vec<Step> = self.steps.iter().take(steps).cloned().collect();
        let n_vars = steps
            .iter()
            .filter_map(|s| match s {
                Step::Deficit { vars } => vars.iter().max().map(|m| m + 1),
                _ => None,
            })
            .max()
            .unwrap_or(2)
            .max(2);
        FactoredPolynomial { n_vars, planar: self.planar.clone(), steps }
    }
}

/// `F = (annulus factors) · Π (‖x - b‖² - r²)` over removed disks only.
pub fn region_polynomial(arr: &CircleArrangement) -> FactoredPolynomial {
    let mut planar = match arr.mode {
        Mode::Circle => {
            let a = arr.halfwidth();
            vec![Factor::AnnulusOuter { a: a.clone() }, Factor::AnnulusInner { a }]
        }
        Mode::Line => {
            let e = arr.ellipse.clone().expect("line arrangement has an ellipse");
            vec![Factor::EllipseOuter { center_x: e.center_x, semi_x: e.semi_x, semi_y: e.semi_y }]
        }
    };
    for (i, c) in arr.removed() {
        planar.push(Factor::Disk { circle: i, k: arr.k, geometry: c.geometry.clone() });
    }
    FactoredPolynomial { n_vars: 2, planar, steps: Vec::new() }
}

/// `F - Σ y²` over `k_new` fresh variables.
pub fn us_construct(f: &FactoredPolynomial, k_new: usize) -> FactoredPolynomial {
    let mut out = f.clone();
    let vars: Vec<usize> = (f.n_vars..f.n_vars + k_new).collect();
    out.n_vars += k_new;
    out.steps.push(Step::Deficit { vars });
    out
}

/// Multiplies in one ellipsoid factor per handle circle of `stage`, each
/// lying over its disk with a certified height.
pub fn remove_ellipsoids(
    f: &FactoredPolynomial,
    arr: &CircleArrangement,
    circles: &[(usize, &PlacedCircle)],
    stage: u32,
    prec: u32,
) -> Result<FactoredPolynomial, PolyError> {
    if circles.is_empty() {
        return Ok(f.clone());
    }
    let transverse: Vec<usize> = (2..f.n_vars).collect();
    let mut factors = Vec::with_capacity(circles.len());
    for (i, c) in circles {
        let h = ellipsoid_height(f, &c.geometry, arr.k, prec).map_err(|_| PolyError::HeightFailure(c.label()))?;
        factors.push(Factor::Ellipsoid { circle: *i, k: arr.k, geometry: c.geometry.clone(), height: h, transverse: transverse.clone() });
    }
    let mut out = f.clone();
    out.steps.push(Step::Ellipsoids { stage, factors });
    Ok(out)
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A synthesized model: arrangement plus the polynomial in `m + 1` variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synthesis {
    pub arrangement: CircleArrangement,
    pub polynomial: FactoredPolynomial,
    pub degree: u32,
    pub expected_degree: u32,
}

/// Without handles: region then one deficit of `m - 1` variables. With
/// handles: one variable, then per stage the ellipsoids and one more
/// variable, the last stage topping up to `m + 1` variables.
pub fn synthesize(spec: &ValidatedSpec, prec: u32) -> Result<Synthesis, SynthesisError> {
    let arr = build_arrangement(spec, prec)?;
    synthesize_from(spec, arr, prec)
}

/// Synthesis on an already built arrangement.
pub fn synthesize_from(spec: &ValidatedSpec, arr: CircleArrangement, prec: u32) -> Result<Synthesis, SynthesisError> {
    let m = spec.dimension() as usize;
    let region = region_polynomial(&arr);
    let poly = if spec.handles().is_none() {
        us_construct(&region, m - 1)
    } else {
        let stages = spec.spec().handle_stages();
        let mut f = us_construct(&region, 1);
        for stage in 1..=stages {
            let circles: Vec<(usize, &PlacedCircle)> =
                arr.handle_circles().filter(|(_, c)| matches!(c.role, Role::Handle { stage: s, .. } if s == stage)).collect();
            f = remove_ellipsoids(&f, &arr, &circles, stage, prec)?;
            let k_new = if stage < stages { 1 } else { m + 1 - f.n_vars };
            f = us_construct(&f, k_new);
        }
        f
    };
    let degree = poly.degree()?;
    let expected = spec.expected_degree();
    if degree != expected {
        return Err(PolyError::DegreeMismatch { expected, found: degree }.into());
    }
    Ok(Synthesis { arrangement: arr, polynomial: poly, degree, expected_degree: expected })
}

/// Certified value and gradient of `F` at an exact point.
pub fn eval_and_gradient(f: &FactoredPolynomial, point: &[f64], prec: u32) -> (Interval, Vec<Interval>) {
    let c = f.compile_interval(prec);
    let x: Vec<Interval> = point.iter().map(|&v| Interval::from_f64(v, prec)).collect();
    c.eval_gradient(&x)
}

/// The region `{P >= 0}` whose boundary is the synthesized manifold, with
/// the map to the target curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionArtifact {
    pub inequality: String,
    pub ambient_dimension: usize,
    pub degree: u32,
    pub polynomial: FactoredPolynomial,
    pub map: String,
    pub boundary: String,
    /// Recorded property of the construction; not proved here.
    pub restriction_nonsingular: bool,
}

pub fn nonsingular_extension(f: &FactoredPolynomial, mode: Mode) -> Result<ExtensionArtifact, PolyError> {
    let n = f.n_vars;
    let map = match mode {
        Mode::Circle => format!("(x1,...,x{n}) -> (x1,x2)/sqrt(x1^2+x2^2) in S^1"),
        Mode::Line => format!("(x1,...,x{n}) -> x1 in R"),
    };
    Ok(ExtensionArtifact {
        inequality: format!("P(x1,...,x{n}) >= 0"),
        ambient_dimension: n,
        degree: f.degree()?,
        polynomial: f.clone(),
        map,
        boundary: format!("P(x1,...,x{n}) = 0"),
        restriction_nonsingular: true,
    })
}

/// `1 - ‖x‖²` in the plane, for tests and examples.
pub fn unit_disk() -> FactoredPolynomial {
    FactoredPolynomial { n_vars: 2, planar: vec![Factor::AnnulusOuter { a: BigRational::zero() }], steps: Vec::new() }
}

/// `r` as a rational centred disk at the origin of radius `r`.
pub fn centred_disk(r: &BigRational) -> CircleGeometry {
    CircleGeometry::Cartesian { center_x: BigRational::zero(), center_y: BigRational::zero(), radius: r.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_model::{validate, GraphSpec};

    fn synth(spec: GraphSpec) -> Synthesis {
        synthesize(&validate(&spec).unwrap(), 96).unwrap()
    }

    #[test]
    fn degrees_of_examples() {
        let s = synth(GraphSpec::circle(&[], 2));
        assert_eq!((s.degree, s.polynomial.n_vars), (4, 3));
        let s = synth(GraphSpec::circle(&[2, 2, 2], 2));
        assert_eq!((s.degree, s.polynomial.n_vars), (10, 3));
        let s = synth(GraphSpec::circle(&[2, 1, 2], 5).with_handles(&[((2, 1), &[1, 0])]));
        assert_eq!((s.degree, s.polynomial.n_vars), (10, 6));
        let s = synth(GraphSpec::line(&[1, 3, 1], 3));
        assert_eq!((s.degree, s.polynomial.n_vars), (2 + 4, 4));
        assert_eq!(FactoredPolynomial { n_vars: 2, planar: vec![], steps: vec![] }.degree(), Err(PolyError::NoFactors));
    }

    #[test]
    fn origin_is_outside_the_region() {
        let s = synth(GraphSpec::circle(&[2, 2, 2], 2));
        let f = region_polynomial(&s.arrangement);
        assert!(f.compile_interval(64).eval(&[Interval::zero(64), Interval::zero(64)]).is_negative());
    }

    #[test]
    fn us_construct_of_unit_disk_is_a_sphere() {
        let f = us_construct(&unit_disk(), 1);
        assert_eq!(f.n_vars, 3);
        assert_eq!(f.degree().unwrap(), 2);
        let c = f.compile_f64();
        let (x, y) = (0.6, 0.0);
        let z = (1.0f64 - x * x - y * y).sqrt();
        assert!(c.eval(&[x, y, z]).abs() < 1e-15);
    }

    #[test]
    fn staged_ellipsoid_is_negative_at_its_centre() {
        let s = synth(GraphSpec::circle(&[2, 1, 2], 5).with_handles(&[((2, 1), &[1, 0])]));
        let arr = &s.arrangement;
        let (_, h) = arr.handle_circles().next().unwrap();
        let (cx, cy, _) = circle_params(&h.geometry, arr.k, 64);
        let mut x = vec![0.0; s.polynomial.n_vars];
        x[0] = cx.mid_f64();
        x[1] = cy.mid_f64();
        // after the ellipsoid step, before the next deficit
        let c = s.polynomial.compile_f64();
        assert!(c.eval_prefix(&x, 2) < 0.0);
        assert!(c.eval_prefix(&x, 1) > 0.0);
        assert_eq!(s.polynomial.ellipsoid_count(), 1);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s = synth(GraphSpec::circle(&[2, 1, 2], 5).with_handles(&[((2, 1), &[1, 0])]));
        let c = s.polynomial.compile_f64();
        let p = [0.1, 1.02, 0.01, -0.02, 0.005, 0.0];
        let (_, g) = c.eval_gradient(&p);
        for i in 0..p.len() {
            let h = 1e-6;
            let (mut a, mut b) = (p, p);
            a[i] += h;
            b[i] -= h;
            let fd = (c.eval(&a) - c.eval(&b)) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1e-3), "var {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn annulus_gradient_on_outer_boundary() {
        let s = synth(GraphSpec::circle(&[], 2));
        let a = crate::numeric::ratio_to_f64(&s.arrangement.halfwidth());
        let (v, g) = eval_and_gradient(&s.polynomial, &[1.0 + a, 0.0, 0.0], 96);
        assert!(v.contains_zero());
        // (other factor) * ∇(outer factor) = ((1+a)^2 - (1-a)^2) * (-2(1+a), 0)
        let want = ((1.0 + a).powi(2) - (1.0 - a).powi(2)) * (-2.0 * (1.0 + a));
        assert!((g[0].mid_f64() - want).abs() < 1e-12);
        assert!(g[1].contains_zero() && g[1].width().to_f64() < 1e-20);
    }

    #[test]
    fn extension_artifact() {
        let s = synth(GraphSpec::circle(&[2, 2, 2], 2));
        let e = nonsingular_extension(&s.polynomial, Mode::Circle).unwrap();
        assert_eq!(e.degree, 10);
        assert!(e.inequality.ends_with(">= 0"));
    }

    #[test]
    fn factored_json_round_trip() {
        let s = synth(GraphSpec::circle(&[2, 1, 2], 5).with_handles(&[((2, 1), &[1, 0])]));
        let j = serde_json::to_string(&s.polynomial).unwrap();
        let back: FactoredPolynomial = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s.polynomial);
    }
}
