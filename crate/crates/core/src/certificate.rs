//! Sampling certificates for synthesized models and the bundle that
//! collects every check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::graph_model::{reeb_isomorphic, Mode, ValidatedSpec};
use crate::layout::{certify_disjointness, CircleArrangement, CircleGeometry, MarginReport};
use crate::numeric::{ratio_to_f64, Interval};
use crate::poly::{circle_params, Compiled, DiagQuad, Factor, FactoredPolynomial, Step, Synthesis};
use crate::sweep::{
    brute_oracle_reeb, euler_check, fiber_counts_check, oracle_equivalent, sweep_reeb, verify_morse, EulerReport, FiberTable,
    ReebGraphResult, SweepCertificate,
};

/// Below this a factor value is re-evaluated with intervals.
const F64_TRUST: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionIdentityReport {
    pub points: usize,
    pub inside: usize,
    /// Points within `band` of a boundary curve, excluded from the comparison.
    pub in_band: usize,
    pub mismatches: usize,
    /// Points whose sign no enclosure could decide.
    pub undecided: usize,
    pub band: f64,
    pub staged: Vec<StagedIdentity>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StagedIdentity {
    pub stage: u32,
    pub points: usize,
    pub inside_ellipsoids: usize,
    pub in_band: usize,
    pub mismatches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub points: usize,
    /// Points whose gradient enclosure excludes zero.
    pub gradient_nonzero: usize,
    /// Largest `|P| / |grad P|` over the sampled points.
    pub max_residual_distance: f64,
    pub ellipsoid_points: usize,
}

struct PlanarGeometry {
    circle: Option<(f64, f64)>,
    ellipse: Option<(f64, f64, f64)>,
    disks: Vec<(f64, f64, f64)>,
}

impl PlanarGeometry {
    fn new(arr: &CircleArrangement) -> Self {
        let disks = arr
            .removed()
            .map(|(_, c)| {
                let (cx, cy, r) = circle_params(&c.geometry, arr.k, 64);
                (cx.mid_f64(), cy.mid_f64(), r.mid_f64())
            })
            .collect();
        match arr.mode {
            Mode::Circle => {
                let a = ratio_to_f64(&arr.halfwidth());
                PlanarGeometry { circle: Some((1.0 - a, 1.0 + a)), ellipse: None, disks }
            }
            Mode::Line => {
                let e = arr.ellipse.as_ref().expect("line arrangement has an ellipse");
                let el = (ratio_to_f64(&e.center_x), ratio_to_f64(&e.semi_x), ratio_to_f64(&e.semi_y));
                PlanarGeometry { circle: None, ellipse: Some(el), disks }
            }
        }
    }

    fn bbox(&self) -> [f64; 4] {
        match (self.circle, self.ellipse) {
            (Some((_, outer)), _) => [-outer, outer, -outer, outer],
            (_, Some((cx, a, b))) => [cx - a, cx + a, -b, b],
            _ => unreachable!(),
        }
    }

    /// `(inside, distance to the nearest boundary curve)`
    fn classify(&self, x: f64, y: f64) -> (bool, f64) {
        let (mut inside, mut dist) = match (self.circle, self.ellipse) {
            (Some((inner, outer)), _) => {
                let rho = x.hypot(y);
                (rho > inner && rho < outer, (rho - inner).abs().min((outer - rho).abs()))
            }
            (_, Some((cx, a, b))) => {
                let (u, v) = ((x - cx) / a, y / b);
                let g = 1.0 - u * u - v * v;
                let grad = 2.0 * (u / a).hypot(v / b);
                (g > 0.0, g.abs() / grad.max(f64::MIN_POSITIVE))
            }
            _ => unreachable!(),
        };
        for &(cx, cy, r) in &self.disks {
            let d = (x - cx).hypot(y - cy);
            inside &= d > r;
            dist = dist.min((d - r).abs());
        }
        (inside, dist)
    }
}

fn quad_sign(qf: &DiagQuad<f64>, qi: &DiagQuad<Interval>, x: &[f64], prec: u32) -> Option<i32> {
    let v = qf.eval(x);
    if v.abs() > F64_TRUST {
        return Some(if v > 0.0 { 1 } else { -1 });
    }
    let xi: Vec<Interval> = x.iter().map(|&t| Interval::from_f64(t, prec)).collect();
    qi.eval(&xi).certified_sign()
}

fn planar_sign(cf: &Compiled<f64>, ci: &Compiled<Interval>, x: &[f64]) -> Option<i32> {
    let mut s = 1;
    for (qf, qi) in cf.planar.iter().zip(&ci.planar) {
        s *= quad_sign(qf, qi, x, ci.prec)?;
    }
    Some(s)
}

fn value_sign(cf: &Compiled<f64>, ci: &Compiled<Interval>, x: &[f64], steps: usize) -> Option<i32> {
    let v = cf.eval_prefix(x, steps);
    if v.abs() > F64_TRUST {
        return Some(if v > 0.0 { 1 } else { -1 });
    }
    let xi: Vec<Interval> = x.iter().map(|&t| Interval::from_f64(t, ci.prec)).collect();
    ci.eval_prefix(&xi, steps).certified_sign()
}

/// Compares `sign(F)` with direct membership on quasi-random planar points,
/// then each ellipsoid stage against `old region minus open ellipsoids`.
pub fn region_identity(syn: &Synthesis, points: usize, staged_points: usize, band: f64, seed: u64, prec: u32) -> RegionIdentityReport {
    let arr = &syn.arrangement;
    let geo = PlanarGeometry::new(arr);
    let region = FactoredPolynomial { n_vars: 2, planar: syn.polynomial.planar.clone(), steps: Vec::new() };
    let (cf, ci) = (region.compile_f64(), region.compile_interval(prec));
    let [x0, x1, y0, y1] = geo.bbox();
    let mut rep = RegionIdentityReport { points, inside: 0, in_band: 0, mismatches: 0, undecided: 0, band, staged: Vec::new() };
    let hx = halton::Sequence::new(2).skip(1);
    let hy = halton::Sequence::new(3).skip(1);
    for (u, v) in hx.zip(hy).take(points) {
        let (x, y) = (x0 + (x1 - x0) * u, y0 + (y1 - y0) * v);
        let (inside, dist) = geo.classify(x, y);
        if dist < band {
            rep.in_band += 1;
            continue;
        }
        rep.inside += inside as usize;
        match planar_sign(&cf, &ci, &[x, y]) {
            Some(s) if (s > 0) == inside => {}
            Some(_) => rep.mismatches += 1,
            None => rep.undecided += 1,
        }
    }
    rep.staged = staged_identity(&syn.polynomial, staged_points, band, seed, prec);
    rep
}

fn ellipsoid_params(f: &Factor, prec: u32) -> Option<(f64, f64, f64, f64, Vec<usize>)> {
    if let Factor::Ellipsoid { k, geometry, height, transverse, .. } = f {
        let (cx, cy, r) = circle_params(geometry, *k, prec);
        Some((cx.mid_f64(), cy.mid_f64(), r.mid_f64(), ratio_to_f64(height), transverse.clone()))
    } else {
        None
    }
}

fn staged_identity(poly: &FactoredPolynomial, points: usize, band: f64, seed: u64, prec: u32) -> Vec<StagedIdentity> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for (si, st) in poly.steps.iter().enumerate() {
        let Step::Ellipsoids { stage, factors } = st else { continue };
        let before = poly.prefix(si);
        let after = poly.prefix(si + 1);
        let n = before.n_vars;
        let (cf, ci) = (after.compile_f64(), after.compile_interval(prec));
        let (pf, pi) = (before.compile_f64(), before.compile_interval(prec));
        let ells: Vec<_> = factors.iter().filter_map(|f| ellipsoid_params(f, 64)).collect();
        let mut row = StagedIdentity { stage: *stage, points: 0, inside_ellipsoids: 0, in_band: 0, mismatches: 0 };
        let per = (points / ells.len().max(1)).max(1);
        for (bx, by, r, h, transverse) in &ells {
            for _ in 0..per {
                let mut p = vec![0.0; n];
                p[0] = bx + r * rng.gen_range(-1.5..1.5);
                p[1] = by + r * rng.gen_range(-1.5..1.5);
                for &t in transverse {
                    p[t] = h * rng.gen_range(-1.5..1.5);
                }
                row.points += 1;
                let q =
                    ((p[0] - bx).powi(2) + (p[1] - by).powi(2)) / (r * r) + transverse.iter().map(|&t| p[t] * p[t]).sum::<f64>() / (h * h);
                if (q - 1.0).abs() < band {
                    row.in_band += 1;
                    continue;
                }
                let in_ell = ells.iter().any(|(cx, cy, rr, hh, tr)| {
                    ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)) / (rr * rr) + tr.iter().map(|&t| p[t] * p[t]).sum::<f64>() / (hh * hh) < 1.0
                });
                row.inside_ellipsoids += in_ell as usize;
                let old = value_sign(&pf, &pi, &p, si);
                let new = value_sign(&cf, &ci, &p, si + 1);
                match (old, new) {
                    (Some(o), Some(s)) => {
                        let member = o > 0 && !in_ell;
                        if (s > 0) != member {
                            row.mismatches += 1;
                        }
                    }
                    _ => row.in_band += 1,
                }
            }
        }
        out.push(row);
    }
    out
}

fn diameter(arr: &CircleArrangement) -> f64 {
    let [x0, x1, y0, y1] = PlanarGeometry::new(arr).bbox();
    (x1 - x0).hypot(y1 - y0)
}

/// Finds a root of `P` on the segment from `z` (where `P > 0`) along `u`.
fn shoot(c: &Compiled<f64>, z: &[f64], u: &[f64], reach: f64) -> Option<Vec<f64>> {
    let at = |t: f64| -> Vec<f64> { z.iter().zip(u).map(|(a, b)| a + t * b).collect() };
    let steps = 256;
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=steps {
        let t = reach * i as f64 / steps as f64;
        if c.eval(&at(t)) <= 0.0 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if c.eval(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(at(0.5 * (lo + hi)))
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize, vars: &[usize]) -> Vec<f64> {
    let mut u = vec![0.0; n];
    for &i in vars {
        u[i] = rng.sample(StandardNormal);
    }
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    u.iter().map(|v| v / norm).collect()
}

/// Samples zero-set points by bisection along random rays from interior
/// points and checks that the certified gradient excludes zero.
pub fn regularity(syn: &Synthesis, points: usize, seed: u64, prec: u32) -> RegularityReport {
    let poly = &syn.polynomial;
    let n = poly.n_vars;
    let (cf, ci) = (poly.compile_f64(), poly.compile_interval(prec));
    let geo = PlanarGeometry::new(&syn.arrangement);
    let [x0, x1, y0, y1] = geo.bbox();
    let reach = diameter(&syn.arrangement) + 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..n).collect();
    let mut rep = RegularityReport { points: 0, gradient_nonzero: 0, max_residual_distance: 0.0, ellipsoid_points: 0 };

    let ells: Vec<_> = poly
        .steps
        .iter()
        .filter_map(|s| match s {
            Step::Ellipsoids { factors, .. } => Some(factors.iter().filter_map(|f| ellipsoid_params(f, 64))),
            _ => None,
        })
        .flatten()
        .collect();
    let targeted = if ells.is_empty() { 0 } else { points / 4 };
    let mut found: Vec<(Vec<f64>, bool)> = Vec::with_capacity(points);
    // From a point above each ellipsoid towards its interior.
    let mut attempts = 0;
    while found.len() < targeted && attempts < 20 * points {
        attempts += 1;
        let (bx, by, _, h, tr) = &ells[found.len() % ells.len()];
        let dir = unit_vector(&mut rng, n, tr);
        let mut z = vec![0.0; n];
        z[0] = *bx;
        z[1] = *by;
        for &t in tr {
            z[t] = 1.5 * h * dir[t];
        }
        if cf.eval(&z) <= 0.0 {
            continue;
        }
        let u: Vec<f64> = dir.iter().map(|v| -v).collect();
        if let Some(p) = shoot(&cf, &z, &u, 1.5 * h) {
            found.push((p, true));
        }
    }
    while found.len() < points && attempts < 40 * points {
        attempts += 1;
        let mut z = vec![0.0; n];
        z[0] = rng.gen_range(x0..x1);
        z[1] = rng.gen_range(y0..y1);
        if cf.eval(&z) <= 0.0 {
            continue;
        }
        let u = unit_vector(&mut rng, n, &all);
        if let Some(p) = shoot(&cf, &z, &u, reach) {
            found.push((p, false));
        }
    }
    for (p, on_ellipsoid) in found {
        let xi: Vec<Interval> = p.iter().map(|&t| Interval::from_f64(t, prec)).collect();
        let (v, g) = ci.eval_gradient(&xi);
        rep.points += 1;
        rep.ellipsoid_points += on_ellipsoid as usize;
        if g.iter().any(|gi| gi.certified_sign().is_some_and(|s| s != 0)) {
            rep.gradient_nonzero += 1;
        }
        let gnorm = g.iter().map(|gi| gi.mid_f64().powi(2)).sum::<f64>().sqrt();
        let resid = v.mid_f64().abs() / gnorm.max(f64::MIN_POSITIVE);
        rep.max_residual_distance = rep.max_residual_distance.max(resid);
    }
    rep
}

#[derive(Clone, Debug)]
pub struct CertificateOptions {
    pub precision_bits: u32,
    pub region_points: usize,
    pub staged_points: usize,
    pub regularity_points: usize,
    pub band: f64,
    pub seed: u64,
    /// `(radial, angular)` resolution of the raster oracle; `None` skips it.
    pub oracle: Option<(usize, usize)>,
    /// Absolute clearance the layout margins are compared against.
    pub margin_threshold: f64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            precision_bits: crate::numeric::DEFAULT_PRECISION_BITS,
            region_points: 100_000,
            staged_points: 10_000,
            regularity_points: 1_000,
            band: 1e-9,
            seed: 0,
            oracle: Some((2048, 512)),
            margin_threshold: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeCheck {
    pub found: u32,
    pub expected: u32,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub radial: usize,
    pub angular: usize,
    pub equivalent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateBundle {
    pub precision_bits: u32,
    pub seed: u64,
    pub degree: DegreeCheck,
    pub margins: Option<MarginReport>,
    pub margin_threshold: f64,
    pub margins_above_threshold: bool,
    pub reeb: Option<ReebGraphResult>,
    pub isomorphic: bool,
    pub morse: Option<SweepCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euler: Option<EulerReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibers: Option<FiberTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCheck>,
    pub region_identity: RegionIdentityReport,
    pub regularity: RegularityReport,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Runs every check on a synthesized model. Failures are collected rather
/// than returned early so the bundle always describes the whole model.
pub fn certify(spec: &ValidatedSpec, syn: &Synthesis, opts: &CertificateOptions) -> CertificateBundle {
    let prec = opts.precision_bits;
    let arr = &syn.arrangement;
    let mut failures = Vec::new();
    let mut fail = |msg: String| failures.push(msg);

    let found = syn.polynomial.degree().unwrap_or(0);
    let expected = spec.expected_degree();
    let degree = DegreeCheck { found, expected, pass: found == expected && found == syn.degree };
    if !degree.pass {
        fail(format!("degree {found} differs from {expected}"));
    }

    let margins = certify_disjointness(arr, prec).map_err(|e| fail(format!("margins: {e}"))).ok();
    let margins_above_threshold = margins.as_ref().is_some_and(|m| m.min_margin_f64().is_none_or(|v| v > opts.margin_threshold));

    let reeb = sweep_reeb(arr, prec).map_err(|e| fail(format!("sweep: {e}"))).ok();
    let isomorphic = reeb.as_ref().is_some_and(|r| reeb_isomorphic(spec.spec(), r));
    if reeb.is_some() && !isomorphic {
        fail("swept graph is not isomorphic to the spec".into());
    }
    let morse = verify_morse(arr, prec).map_err(|e| fail(format!("morse: {e}"))).ok();
    if morse.as_ref().is_some_and(|m| !m.pass) {
        fail("morse certificate did not pass".into());
    }
    let euler = if arr.mode == Mode::Circle && arr.dimension == 2 {
        euler_check(arr, prec).map_err(|e| fail(format!("euler: {e}"))).ok()
    } else {
        None
    };
    let fibers = if arr.handles.is_some() { fiber_counts_check(arr, prec).map_err(|e| fail(format!("fibers: {e}"))).ok() } else { None };
    let oracle = opts.oracle.map(|(radial, angular)| match brute_oracle_reeb(arr, radial, angular) {
        Ok(g) => {
            let tol = match arr.mode {
                Mode::Circle => 4.0 / angular as f64,
                Mode::Line => 4.0 * diameter(arr) / angular as f64,
            };
            let equivalent = reeb.as_ref().is_some_and(|r| oracle_equivalent(r, &g, arr.mode, tol));
            OracleCheck { radial, angular, equivalent, error: None }
        }
        Err(e) => OracleCheck { radial, angular, equivalent: false, error: Some(e.to_string()) },
    });
    if oracle.as_ref().is_some_and(|o| !o.equivalent) {
        fail("raster oracle disagrees with the sweep".into());
    }

    let region_identity = region_identity(syn, opts.region_points, opts.staged_points, opts.band, opts.seed, prec);
    let staged_bad: usize = region_identity.staged.iter().map(|s| s.mismatches).sum();
    if region_identity.mismatches + region_identity.undecided + staged_bad > 0 {
        fail(format!(
            "region identity: {} planar mismatches, {} undecided, {} staged mismatches",
            region_identity.mismatches, region_identity.undecided, staged_bad
        ));
    }
    let regularity = regularity(syn, opts.regularity_points, opts.seed, prec);
    if regularity.gradient_nonzero != regularity.points || regularity.points < opts.regularity_points {
        fail(format!(
            "regularity: {} of {} sampled zero-set points have a certified nonzero gradient (wanted {})",
            regularity.gradient_nonzero, regularity.points, opts.regularity_points
        ));
    }
    let pass = failures.is_empty();
    CertificateBundle {
        precision_bits: prec,
        seed: opts.seed,
        degree,
        margins,
        margin_threshold: opts.margin_threshold,
        margins_above_threshold,
        reeb,
        isomorphic,
        morse,
        euler,
        fibers,
        oracle,
        region_identity,
        regularity,
        failures,
        pass,
    }
}

/// Planar centre of a circle, for plotting and sampling.
pub fn circle_center_f64(geometry: &CircleGeometry, k: u32) -> (f64, f64, f64) {
    let (cx, cy, r) = circle_params(geometry, k, 64);
    (cx.mid_f64(), cy.mid_f64(), r.mid_f64())
}
