//! Plane geometry of the construction: the annulus (or closing ellipse in
//! line mode) and the chains of circles tangent to both rays of a sector.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::graph_model::{EdgeId, HandleEntry, Mode, ValidatedSpec};
use crate::numeric::{dyadic_ratio_from_f64, opt_ratio_serde, ratio, ratio_serde, ratio_to_string, trig, Interval, StructuredAngle};

/// Chain safety factor on top of the packing bound.
pub const SAFETY_FACTOR: f64 = 1.25;
/// Significant bits kept when rounding a chain distance to an exact dyadic.
const DISTANCE_BITS: u32 = 40;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LayoutError {
    #[error("packing failure: {0}")]
    PackingFailure(String),
    #[error("margin violation between {first} and {second}: clearance {value} is not above epsilon")]
    MarginViolation { first: String, second: String, value: String },
}

/// Sweep parameter or vertex position: an exact angle in circle mode, an
/// exact abscissa in line mode.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Angle(StructuredAngle),
    Abscissa(#[serde(with = "ratio_serde")] BigRational),
}

impl Position {
    pub fn as_ratio(&self) -> BigRational {
        match self {
            Position::Angle(a) => ratio(a.numer(), a.denom()),
            Position::Abscissa(x) => x.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Position::Angle(a) => a.numer() as f64 / a.denom() as f64,
            Position::Abscissa(x) => crate::numeric::ratio_to_f64(x),
        }
    }
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Position::Angle(a) => write!(f, "angle {a}"),
            Position::Abscissa(x) => write!(f, "x = {}", ratio_to_string(x)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Role {
    /// `C_{j, chain_index}`, separating channels `chain_index` and `chain_index + 1`.
    RemovedDisk {
        chain_index: u32,
    },
    Handle {
        channel: u32,
        stage: u32,
        index: u32,
    },
}

impl Role {
    pub fn is_removed(&self) -> bool {
        matches!(self, Role::RemovedDisk { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CircleGeometry {
    /// Centre on the sector bisector at distance `d`; radius `d sin(pi/k)`.
    Polar {
        #[serde(with = "ratio_serde")]
        d: BigRational,
        center_angle: StructuredAngle,
    },
    Cartesian {
        #[serde(with = "ratio_serde")]
        center_x: BigRational,
        #[serde(with = "ratio_serde")]
        center_y: BigRational,
        #[serde(with = "ratio_serde")]
        radius: BigRational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedCircle {
    pub sector: u32,
    #[serde(flatten)]
    pub geometry: CircleGeometry,
    pub role: Role,
}

impl PlacedCircle {
    pub fn label(&self) -> String {
        match &self.role {
            Role::RemovedDisk { chain_index } => format!("C({},{})", self.sector, chain_index),
            Role::Handle { channel, stage, index } => {
                format!("H({},{};{},{})", self.sector, channel, stage, index)
            }
        }
    }
}

/// Interval enclosure of a circle's centre and radius.
#[derive(Clone, Debug)]
pub struct CircleEnclosure {
    pub cx: Interval,
    pub cy: Interval,
    pub r: Interval,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ellipse {
    #[serde(with = "ratio_serde")]
    pub center_x: BigRational,
    #[serde(with = "ratio_serde")]
    pub semi_x: BigRational,
    #[serde(with = "ratio_serde")]
    pub semi_y: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleArrangement {
    pub mode: Mode,
    pub k: u32,
    pub multiplicities: Vec<u32>,
    pub dimension: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handles: Option<Vec<HandleEntry>>,
    #[serde(default, with = "opt_ratio_serde", skip_serializing_if = "Option::is_none")]
    pub a: Option<BigRational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ellipse: Option<Ellipse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_abscissae: Option<Vec<String>>,
    pub circles: Vec<PlacedCircle>,
    #[serde(with = "ratio_serde")]
    pub epsilon: BigRational,
}

impl CircleArrangement {
    pub fn halfwidth(&self) -> BigRational {
        self.a.clone().unwrap_or_else(|| ratio(1, 2))
    }

    pub fn removed(&self) -> impl Iterator<Item = (usize, &PlacedCircle)> {
        self.circles.iter().enumerate().filter(|(_, c)| c.role.is_removed())
    }

    pub fn handle_circles(&self) -> impl Iterator<Item = (usize, &PlacedCircle)> {
        self.circles.iter().enumerate().filter(|(_, c)| !c.role.is_removed())
    }

    pub fn handle_stages(&self) -> u32 {
        self.dimension.saturating_sub(1) / 2
    }

    /// Prescribed handle sequence of an edge channel, zeros when absent.
    pub fn handle_sequence(&self, edge: EdgeId) -> Vec<u32> {
        self.handles
            .iter()
            .flatten()
            .find(|h| h.edge == [edge.sector, edge.channel])
            .map(|h| h.sequence.clone())
            .unwrap_or_else(|| vec![0; self.handle_stages() as usize])
    }

    pub fn vertex_positions(&self) -> Vec<Position> {
        match self.mode {
            Mode::Circle => (1..=self.k as i64).map(|j| Position::Angle(StructuredAngle::new(j, self.k as i64))).collect(),
            Mode::Line => {
                let e = self.ellipse.as_ref().expect("line arrangement has an ellipse");
                let mut out = vec![Position::Abscissa(&e.center_x - &e.semi_x)];
                for s in self.vertex_abscissae.iter().flatten() {
                    out.push(Position::Abscissa(crate::numeric::parse_ratio(s).expect("stored abscissa")));
                }
                out.push(Position::Abscissa(&e.center_x + &e.semi_x));
                out
            }
        }
    }

    /// Interval centres and radii for every circle at working precision `prec`.
    pub fn enclosures(&self, prec: u32) -> Vec<CircleEnclosure> {
        let s = if self.mode == Mode::Circle && self.k >= 3 { Some(trig::sin_half_sector(self.k, prec)) } else { None };
        let mut trig_cache: Vec<(StructuredAngle, Interval, Interval)> = Vec::new();
        self.circles
            .iter()
            .map(|c| match &c.geometry {
                CircleGeometry::Polar { d, center_angle } => {
                    let (cos, sin) = match trig_cache.iter().find(|(a, _, _)| a == center_angle) {
                        Some((_, c, s)) => (c.clone(), s.clone()),
                        None => {
                            let (c, s) = trig::cos_sin(center_angle, prec);
                            trig_cache.push((*center_angle, c.clone(), s.clone()));
                            (c, s)
                        }
                    };
                    let d = Interval::from_ratio(d, prec);
                    let r = d.mul(s.as_ref().expect("polar circles need k >= 3"));
                    CircleEnclosure { cx: d.mul(&cos), cy: d.mul(&sin), r }
                }
                CircleGeometry::Cartesian { center_x, center_y, radius } => CircleEnclosure {
                    cx: Interval::from_ratio(center_x, prec),
                    cy: Interval::from_ratio(center_y, prec),
                    r: Interval::from_ratio(radius, prec),
                },
            })
            .collect()
    }

    /// Exact structured tangency positions of one circle: `(entering, leaving)`.
    pub fn tangency_positions(&self, circle: &PlacedCircle) -> (Position, Position) {
        match &circle.geometry {
            CircleGeometry::Polar { center_angle, .. } => {
                let beta = StructuredAngle::new(1, 2 * self.k as i64);
                (
                    Position::Angle(center_angle.sub(&beta).normalized_positive()),
                    Position::Angle(center_angle.add(&beta).normalized_positive()),
                )
            }
            CircleGeometry::Cartesian { center_x, radius, .. } => {
                (Position::Abscissa(center_x - radius), Position::Abscissa(center_x + radius))
            }
        }
    }
}

/// Bisector angle `(2j+1)/(2k)` of sector `j`.
pub fn bisector(j: u32, k: u32) -> StructuredAngle {
    StructuredAngle::new(2 * j as i64 + 1, 2 * k as i64).normalized()
}

/// Radial item order of sector `j`: handles of channel 1, `C_{j,1}`, handles
/// of channel 2, and so on; handle stages ascend within a channel.
pub fn sector_roles(spec: &ValidatedSpec, j: u32) -> Vec<Role> {
    let a_j = spec.multiplicities()[j as usize - 1];
    let mut roles = Vec::new();
    for channel in 1..=a_j {
        if spec.handles().is_some() {
            let seq = spec.handle_sequence(EdgeId { sector: j, channel });
            for (st, &count) in seq.iter().enumerate() {
                for index in 1..=count {
                    roles.push(Role::Handle { channel, stage: st as u32 + 1, index });
                }
            }
        }
        if channel < a_j {
            roles.push(Role::RemovedDisk { chain_index: channel });
        }
    }
    roles
}

/// Case region letter of a handle of `channel` in a sector with `a_j` edges.
pub fn case_region(channel: u32, a_j: u32) -> char {
    match (channel == 1, channel == a_j) {
        (true, true) => 'D',
        (true, false) => 'A',
        (false, false) => 'B',
        (false, true) => 'C',
    }
}

fn chain_ratio_interval(k: u32, prec: u32) -> Interval {
    let s = trig::sin_half_sector(k, prec);
    let one = Interval::one(prec);
    one.add(&s).div(&one.sub(&s))
}

/// Smallest `a = 1 - 2^-t` whose annulus ratio `(1+a)/(1-a)` certifiably
/// exceeds `rho^(n_max + 1/2) * sigma`; the extra half period leaves room to
/// stagger neighbouring sectors.
pub fn choose_annulus_halfwidth(spec: &ValidatedSpec, prec: u32) -> BigRational {
    if let Some(a) = spec.halfwidth_override() {
        return a.clone();
    }
    let k = spec.vertex_count();
    if spec.mode() == Mode::Line || k == 0 {
        return ratio(1, 2);
    }
    let n_max = (1..=k).map(|j| sector_roles(spec, j).len()).max().unwrap_or(0) as u32;
    if n_max == 0 {
        return ratio(1, 2);
    }
    let rho = chain_ratio_interval(k, prec);
    let sigma = Interval::from_ratio(&ratio(5, 4), prec);
    let bound = rho.pow(n_max).mul(&rho.sqrt()).mul(&sigma);
    let mut t: u32 = 1;
    loop {
        let big_r = Interval::point(crate::numeric::Dyadic::pow2(t as i64 + 1), prec).sub(&Interval::one(prec));
        if bound.certainly_lt(&big_r) {
            let two_t = BigInt::one() << t as usize;
            return BigRational::new(two_t.clone() - 1, two_t);
        }
        t += 1;
    }
}

/// Geometric chain parameters shared by all sectors of one arrangement.
#[derive(Clone, Debug)]
pub struct ChainPlan {
    k: u32,
    a: f64,
    s: f64,
    ln_rho: f64,
    ln_lambda: f64,
}

impl ChainPlan {
    pub fn new(a: &BigRational, k: u32, n_max: u32) -> Result<Self, LayoutError> {
        let a = crate::numeric::ratio_to_f64(a);
        let s = (std::f64::consts::PI / k as f64).sin();
        let ln_rho = ((1.0 + s) / (1.0 - s)).ln();
        let ln_r = ((1.0 + a) / (1.0 - a)).ln();
        let n = n_max as f64;
        let ln_lambda = (ln_r - (n + 0.5) * ln_rho) / (n + 1.5);
        if n_max > 0 && (ln_lambda.is_nan() || ln_lambda <= 0.0) {
            return Err(LayoutError::PackingFailure(format!("annulus half-width {a} cannot hold {n_max} tangent circles per sector")));
        }
        Ok(ChainPlan { k, a, s, ln_rho, ln_lambda: ln_lambda.max(0.0) })
    }

    /// Log-phase of sector `j`, in periods: alternating 0 and 1/2, with a
    /// quarter period for the last sector of an odd cycle.
    pub fn phase(&self, j: u32) -> f64 {
        if self.k % 2 == 1 && j == self.k {
            0.25
        } else if j.is_multiple_of(2) {
            0.5
        } else {
            0.0
        }
    }

    pub fn distances(&self, j: u32, count: usize) -> Vec<f64> {
        let period = self.ln_rho + self.ln_lambda;
        let base = ((1.0 - self.a) / (1.0 - self.s)).ln() + self.ln_lambda;
        (0..count).map(|i| (base + (i as f64 + self.phase(j)) * period).exp()).collect()
    }

    pub fn place(&self, j: u32, roles: &[Role]) -> Vec<PlacedCircle> {
        let center_angle = bisector(j, self.k);
        self.distances(j, roles.len())
            .into_iter()
            .zip(roles)
            .map(|(d, role)| PlacedCircle {
                sector: j,
                geometry: CircleGeometry::Polar { d: dyadic_ratio_from_f64(d, DISTANCE_BITS), center_angle },
                role: role.clone(),
            })
            .collect()
    }
}

/// `count` removed disks in sector `j` of a `k`-fold annulus of half-width `a`.
pub fn place_sector_chain(j: u32, count: u32, a: &BigRational, k: u32) -> Result<Vec<PlacedCircle>, LayoutError> {
    let plan = ChainPlan::new(a, k, count)?;
    let roles: Vec<Role> = (1..=count).map(|c| Role::RemovedDisk { chain_index: c }).collect();
    Ok(plan.place(j, &roles))
}

/// Handle circles of a spec with handles, interleaved with the removed disks.
/// Returns the full per-sector chains so that radial order is preserved.
pub fn place_handle_circles(spec: &ValidatedSpec, a: &BigRational) -> Result<Vec<PlacedCircle>, LayoutError> {
    let k = spec.vertex_count();
    let n_max = (1..=k).map(|j| sector_roles(spec, j).len()).max().unwrap_or(0) as u32;
    let plan = ChainPlan::new(a, k, n_max)?;
    Ok((1..=k).flat_map(|j| plan.place(j, &sector_roles(spec, j))).collect())
}

fn epsilon_for(a: &BigRational) -> BigRational {
    let width = a * BigInt::from(2);
    let inner = BigRational::one() - a;
    let m = if width < inner { width } else { inner };
    m / BigRational::from_integer(BigInt::one() << 20)
}

/// Builds and certifies the arrangement for a validated spec.
pub fn build_arrangement(spec: &ValidatedSpec, prec: u32) -> Result<CircleArrangement, LayoutError> {
    let arr = match spec.mode() {
        Mode::Circle => build_circle(spec, prec)?,
        Mode::Line => build_line(spec)?,
    };
    certify_disjointness(&arr, prec)?;
    Ok(arr)
}

fn build_circle(spec: &ValidatedSpec, prec: u32) -> Result<CircleArrangement, LayoutError> {
    let k = spec.vertex_count();
    let a = choose_annulus_halfwidth(spec, prec);
    let circles = if k == 0 { Vec::new() } else { place_handle_circles(spec, &a)? };
    Ok(CircleArrangement {
        mode: Mode::Circle,
        k,
        multiplicities: spec.multiplicities().to_vec(),
        dimension: spec.dimension(),
        handles: spec.spec().handles.clone(),
        epsilon: epsilon_for(&a),
        a: Some(a),
        ellipse: None,
        vertex_abscissae: None,
        circles,
    })
}

/// Line mode: strips of width 1 between consecutive vertices, interior
/// vertices at `x = 0..k-3`, ends at the folds of a closing ellipse.
fn build_line(spec: &ValidatedSpec) -> Result<CircleArrangement, LayoutError> {
    let k = spec.vertex_count();
    let a = spec.multiplicities();
    let half = ratio(1, 2);
    let (cx, semi_x) = if k == 2 {
        (BigRational::zero(), BigRational::one())
    } else {
        (ratio(k as i64 - 3, 2), ratio(k as i64 - 3, 2) + BigRational::one())
    };
    let slot = ratio(5, 4);
    // Odd strips use y in (5/4)Z - shift, even strips the half-slot offset
    // lattice, so tangency points on a shared strip line never coincide.
    let n_max = a.iter().map(|x| x.saturating_sub(1)).max().unwrap_or(0);
    let shift = ratio(n_max.saturating_sub(1) as i64 * 5, 8);
    let mut circles = Vec::new();
    for (idx, &aj) in a.iter().enumerate() {
        let j = idx as u32 + 1;
        let n = aj.saturating_sub(1);
        if n == 0 {
            continue;
        }
        // strip j spans [j-2, j-1]
        let center_x = ratio(j as i64 - 2, 1) + &half;
        let offset = if j.is_multiple_of(2) { ratio(5, 8) } else { BigRational::zero() };
        for i in 0..n {
            let y = ratio(i as i64, 1) * &slot + &offset - &shift;
            circles.push(PlacedCircle {
                sector: j,
                geometry: CircleGeometry::Cartesian { center_x: center_x.clone(), center_y: y, radius: half.clone() },
                role: Role::RemovedDisk { chain_index: i + 1 },
            });
        }
    }
    // Grow the vertical semi-axis until every circle's bounding box sits
    // well inside the ellipse.
    let mut semi_y = BigRational::one();
    let fits = |b: &BigRational| {
        circles.iter().all(|c| match &c.geometry {
            CircleGeometry::Cartesian { center_x, center_y, radius } => {
                ellipse_slack_corners(&cx, &semi_x, b, center_x, center_y, radius) > BigRational::zero()
            }
            _ => false,
        })
    };
    let mut guard = 0;
    while !fits(&semi_y) {
        semi_y *= BigRational::from_integer(BigInt::from(2));
        guard += 1;
        if guard > 64 {
            return Err(LayoutError::PackingFailure("closing ellipse cannot contain the strip circles".into()));
        }
    }
    let vertex_abscissae = if k >= 3 { Some((0..k as i64 - 2).map(|x| x.to_string()).collect()) } else { Some(Vec::new()) };
    Ok(CircleArrangement {
        mode: Mode::Line,
        k,
        multiplicities: a.to_vec(),
        dimension: spec.dimension(),
        handles: None,
        a: None,
        ellipse: Some(Ellipse { center_x: cx, semi_x, semi_y }),
        vertex_abscissae,
        circles,
        epsilon: BigRational::new(BigInt::one(), BigInt::one() << 20),
    })
}

/// `min over corners of the circle's bounding box of 1 - ((x-cx)/A)^2 - (y/B)^2`,
/// minus half the slack of the widest interior strip line.
fn ellipse_slack_corners(
    ecx: &BigRational,
    ea: &BigRational,
    eb: &BigRational,
    x: &BigRational,
    y: &BigRational,
    r: &BigRational,
) -> BigRational {
    let one = BigRational::one();
    let mut worst: Option<BigRational> = None;
    for sx in [-1i64, 1] {
        for sy in [-1i64, 1] {
            let px = x + r * BigRational::from_integer(sx.into()) - ecx;
            let py = y + r * BigRational::from_integer(sy.into());
            let v = &one - (&px * &px) / (ea * ea) - (&py * &py) / (eb * eb);
            worst = Some(match worst {
                Some(w) if w < v => w,
                _ => v,
            });
        }
    }
    // Require half of the slack available at the strip line x +- r, y = 0.
    let edge = (x - ecx).abs() + r;
    let avail = &one - (&edge * &edge) / (ea * ea);
    worst.expect("four corners") - avail / BigRational::from_integer(2.into())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginEntry {
    pub first: String,
    pub second: String,
    /// Certified lower bound of the clearance, as a decimal string.
    pub lower_bound: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginReport {
    pub pairs_checked: usize,
    pub boundary_checks: usize,
    /// Smallest certified clearance, absent when there is nothing to check.
    pub min_margin: Option<String>,
    pub min_margin_between: Option<[String; 2]>,
    #[serde(with = "ratio_serde")]
    pub epsilon: BigRational,
    /// Handle circles confirmed inside their case regions.
    pub handles_in_case_region: usize,
}

impl MarginReport {
    pub fn min_margin_f64(&self) -> Option<f64> {
        self.min_margin.as_deref().and_then(crate::numeric::parse_ratio).map(|q| crate::numeric::ratio_to_f64(&q))
    }
}

struct MarginTracker {
    eps: Interval,
    min: Option<(Interval, String, String)>,
    pairs: usize,
    boundary: usize,
}

impl MarginTracker {
    fn record(&mut self, value: Interval, first: String, second: String, pair: bool) -> Result<(), LayoutError> {
        if pair {
            self.pairs += 1;
        } else {
            self.boundary += 1;
        }
        if !self.eps.certainly_lt(&value) {
            return Err(LayoutError::MarginViolation { first, second, value: value.lo().to_decimal(12) });
        }
        let better = match &self.min {
            Some((m, _, _)) => value.lo() < m.lo(),
            None => true,
        };
        if better {
            self.min = Some((value, first, second));
        }
        Ok(())
    }
}

/// Certified clearances between every pair of circles and between each
/// circle and the outer boundary. Fails when any clearance is not above `eps`.
pub fn certify_disjointness(arr: &CircleArrangement, prec: u32) -> Result<MarginReport, LayoutError> {
    let enc = arr.enclosures(prec);
    let mut t = MarginTracker { eps: Interval::from_ratio(&arr.epsilon, prec), min: None, pairs: 0, boundary: 0 };
    for i in 0..enc.len() {
        for j in i + 1..enc.len() {
            let dx = enc[i].cx.sub(&enc[j].cx);
            let dy = enc[i].cy.sub(&enc[j].cy);
            let dist = dx.sqr().add(&dy.sqr()).sqrt();
            let clearance = dist.sub(&enc[i].r).sub(&enc[j].r);
            t.record(clearance, arr.circles[i].label(), arr.circles[j].label(), true)?;
        }
    }
    match arr.mode {
        Mode::Circle => {
            let a = Interval::from_ratio(&arr.halfwidth(), prec);
            let one = Interval::one(prec);
            let (inner, outer) = (one.sub(&a), one.add(&a));
            for (i, e) in enc.iter().enumerate() {
                let dist = e.cx.sqr().add(&e.cy.sqr()).sqrt();
                t.record(dist.sub(&e.r).sub(&inner), arr.circles[i].label(), "inner boundary".into(), false)?;
                t.record(outer.sub(&dist).sub(&e.r), arr.circles[i].label(), "outer boundary".into(), false)?;
            }
        }
        Mode::Line => {
            let e = arr.ellipse.as_ref().expect("line arrangement has an ellipse");
            let half_min = if e.semi_x < e.semi_y { &e.semi_x } else { &e.semi_y } / BigRational::from_integer(2.into());
            for c in arr.circles.iter() {
                if let CircleGeometry::Cartesian { center_x, center_y, radius } = &c.geometry {
                    // E is concave, so its minimum over the bounding box sits at a corner;
                    // |grad E| <= 2/min(A,B) inside the ellipse bounds the distance.
                    let slack = ellipse_slack_corners(&e.center_x, &e.semi_x, &e.semi_y, center_x, center_y, radius);
                    let clearance = Interval::from_ratio(&(slack * &half_min), prec);
                    t.record(clearance, c.label(), "ellipse".into(), false)?;
                }
            }
        }
    }
    let handles_in_case_region = check_case_regions(arr)?;
    Ok(MarginReport {
        pairs_checked: t.pairs,
        boundary_checks: t.boundary,
        min_margin: t.min.as_ref().map(|(v, _, _)| v.lo().to_decimal(12)),
        min_margin_between: t.min.map(|(_, a, b)| [a, b]),
        epsilon: arr.epsilon.clone(),
        handles_in_case_region,
    })
}

/// Each handle of channel `c` must sit radially between `C_{j,c-1}` and
/// `C_{j,c}` (or the annulus boundaries).
fn check_case_regions(arr: &CircleArrangement) -> Result<usize, LayoutError> {
    let mut ok = 0;
    for (_, h) in arr.handle_circles() {
        let (Role::Handle { channel, .. }, CircleGeometry::Polar { d, .. }) = (&h.role, &h.geometry) else {
            continue;
        };
        let dist_of = |idx: u32| {
            arr.removed().find_map(|(_, c)| match (&c.role, &c.geometry) {
                (Role::RemovedDisk { chain_index }, CircleGeometry::Polar { d, .. }) if c.sector == h.sector && *chain_index == idx => {
                    Some(d.clone())
                }
                _ => None,
            })
        };
        let below = if *channel > 1 { dist_of(channel - 1) } else { None };
        let above = dist_of(*channel);
        let inside = below.is_none_or(|b| b < *d) && above.is_none_or(|u| *d < u);
        if !inside {
            return Err(LayoutError::PackingFailure(format!("{} left its case region", h.label())));
        }
        ok += 1;
    }
    Ok(ok)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Entering,
    Leaving,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangencyEvent {
    pub position: Position,
    pub circle: usize,
    pub removed: bool,
    pub side: Side,
    /// Tangency point, decimal midpoints of certified enclosures.
    pub point: [String; 2],
}

/// Tangency point of `circle` at its structural event `side`.
pub fn tangency_point(
    arr: &CircleArrangement,
    enc: &CircleEnclosure,
    circle: &PlacedCircle,
    side: Side,
    prec: u32,
) -> (Interval, Interval) {
    match &circle.geometry {
        CircleGeometry::Polar { d, .. } => {
            let (pos_in, pos_out) = arr.tangency_positions(circle);
            let pos = if side == Side::Entering { pos_in } else { pos_out };
            let Position::Angle(alpha) = pos else { unreachable!() };
            let (ca, sa) = trig::cos_sin(&alpha, prec);
            let t = Interval::from_ratio(d, prec).mul(&trig::cos_half_sector(arr.k, prec));
            (t.mul(&ca), t.mul(&sa))
        }
        CircleGeometry::Cartesian { .. } => {
            let x = if side == Side::Entering { enc.cx.sub(&enc.r) } else { enc.cx.add(&enc.r) };
            (x, enc.cy.clone())
        }
    }
}

/// Two events per circle at its structural tangency positions, sorted by
/// position then circle.
pub fn tangency_events(arr: &CircleArrangement, prec: u32) -> Vec<TangencyEvent> {
    let enc = arr.enclosures(prec);
    let mut out = Vec::new();
    for (i, c) in arr.circles.iter().enumerate() {
        let (p_in, p_out) = arr.tangency_positions(c);
        for (pos, side) in [(p_in, Side::Entering), (p_out, Side::Leaving)] {
            let (x, y) = tangency_point(arr, &enc[i], c, side, prec);
            out.push(TangencyEvent {
                position: pos,
                circle: i,
                removed: c.role.is_removed(),
                side,
                point: [x.mid().to_decimal(15), y.mid().to_decimal(15)],
            });
        }
    }
    out.sort_by(|a, b| a.position.cmp(&b.position).then(a.circle.cmp(&b.circle)));
    out
}

/// Independent floating-point tangency solve: `phi +- asin(r/d)` in turns.
pub fn numeric_tangency_turns(arr: &CircleArrangement, circle: &PlacedCircle) -> Option<(f64, f64)> {
    let CircleGeometry::Polar { d, center_angle } = &circle.geometry else {
        return None;
    };
    let d = d.to_f64().unwrap_or_else(|| crate::numeric::ratio_to_f64(d));
    let r = d * (std::f64::consts::PI / arr.k as f64).sin();
    let phi = center_angle.to_radians();
    let half = (r / d).asin();
    let tau = std::f64::consts::TAU;
    Some(((phi - half) / tau, (phi + half) / tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_model::{validate, GraphSpec};

    fn arr_for(spec: GraphSpec) -> CircleArrangement {
        build_arrangement(&validate(&spec).unwrap(), 96).unwrap()
    }

    #[test]
    fn halfwidth_meets_packing_bound() {
        let spec = validate(&GraphSpec::circle(&[2, 2, 2], 2)).unwrap();
        let a = choose_annulus_halfwidth(&spec, 96);
        let af = crate::numeric::ratio_to_f64(&a);
        let s = (std::f64::consts::PI / 3.0).sin();
        let rho = (1.0 + s) / (1.0 - s);
        let ratio_r = (1.0 + af) / (1.0 - af);
        assert!(ratio_r > rho * SAFETY_FACTOR);
        assert!(ratio_r > rho.powf(1.5) * SAFETY_FACTOR);
        // one step less would not do
        let prev = 2.0 * af - 1.0;
        assert!((1.0 + prev) / (1.0 - prev) <= rho.powf(1.5) * SAFETY_FACTOR);
    }

    #[test]
    fn default_halfwidth_without_circles() {
        let spec = validate(&GraphSpec::circle(&[], 2)).unwrap();
        assert_eq!(choose_annulus_halfwidth(&spec, 64), ratio(1, 2));
    }

    #[test]
    fn chain_examples() {
        assert!(place_sector_chain(1, 0, &ratio(1, 2), 4).unwrap().is_empty());
        let one = place_sector_chain(1, 1, &ratio(15, 16), 4).unwrap();
        assert_eq!(one.len(), 1);
        let two = place_sector_chain(1, 2, &ratio(127, 128), 4).unwrap();
        let ds: Vec<f64> = two
            .iter()
            .map(|c| match &c.geometry {
                CircleGeometry::Polar { d, .. } => crate::numeric::ratio_to_f64(d),
                _ => unreachable!(),
            })
            .collect();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(ds[1] / ds[0] > (1.0 + s) / (1.0 - s));
        assert!(ds[1] - ds[0] > ds[0] * s + ds[1] * s);
    }

    #[test]
    fn odd_last_sector_single_circle_is_centred_in_log_scale() {
        // phase 1/4 with one circle: the fit range is used symmetrically only
        // when the remaining slack equals the quarter shift; check it is in range.
        let a = ratio(63, 64);
        let c = &place_sector_chain(3, 1, &a, 3).unwrap()[0];
        let CircleGeometry::Polar { d, .. } = &c.geometry else { unreachable!() };
        let d = crate::numeric::ratio_to_f64(d);
        let s = (std::f64::consts::PI / 3.0).sin();
        assert!(d * (1.0 - s) > 1.0 / 64.0 && d * (1.0 + s) < 127.0 / 64.0);
    }

    #[test]
    fn packing_failure_with_tight_override() {
        let mut spec = GraphSpec::circle(&[5, 5, 5], 2);
        spec.annulus_halfwidth = Some("0.1".into());
        let err = build_arrangement(&validate(&spec).unwrap(), 64).unwrap_err();
        assert!(matches!(err, LayoutError::PackingFailure(_)));
    }

    #[test]
    fn corpus_arrangements_certify() {
        for (name, spec) in crate::corpus::corpus() {
            let arr = arr_for(spec.clone());
            let rep = certify_disjointness(&arr, 96).unwrap();
            eprintln!("{name}: {:?}", rep.min_margin_f64());
            if let Some(m) = rep.min_margin_f64() {
                assert!(m > 1e-6, "{name}: {rep:?}");
            }
        }
        // the extreme k = 3 chain still certifies above its epsilon
        let arr = arr_for(GraphSpec::circle(&[5, 5, 5], 2));
        assert_eq!(arr.circles.len(), 12);
        certify_disjointness(&arr, 96).unwrap();
        let empty = arr_for(GraphSpec::circle(&[], 2));
        let rep = certify_disjointness(&empty, 64).unwrap();
        assert_eq!(rep.pairs_checked, 0);
        assert!(rep.min_margin.is_none());
    }

    #[test]
    fn coincident_circles_violate_margin() {
        let mut arr = arr_for(GraphSpec::circle(&[2, 2, 2], 2));
        let dup = arr.circles[0].clone();
        arr.circles.push(dup);
        assert!(matches!(certify_disjointness(&arr, 64), Err(LayoutError::MarginViolation { .. })));
    }

    #[test]
    fn handle_case_regions() {
        let arr = arr_for(GraphSpec::circle(&[2, 1, 2], 5).with_handles(&[((2, 1), &[1, 0])]));
        let handles: Vec<_> = arr.handle_circles().collect();
        assert_eq!(handles.len(), 1);
        assert_eq!(handles[0].1.sector, 2);
        assert_eq!(case_region(1, 1), 'D');

        let arr = arr_for(GraphSpec::circle(&[2, 2, 2], 3).with_handles(&[((1, 1), &[1])]));
        let h = arr.handle_circles().next().unwrap().1.clone();
        let c = arr.circles.iter().find(|c| c.sector == 1 && c.role.is_removed()).unwrap();
        let d_of = |c: &PlacedCircle| match &c.geometry {
            CircleGeometry::Polar { d, .. } => d.clone(),
            _ => unreachable!(),
        };
        assert!(d_of(&h) < d_of(c));
        assert_eq!(case_region(1, 2), 'A');
        assert_eq!(certify_disjointness(&arr, 64).unwrap().handles_in_case_region, 1);
    }

    #[test]
    fn all_zero_handles_match_plain_arrangement() {
        let plain = arr_for(GraphSpec::circle(&[2, 2, 2], 3));
        let zero = arr_for(GraphSpec::circle(&[2, 2, 2], 3).with_handles(&[((1, 1), &[0])]));
        assert_eq!(plain.circles, zero.circles);
        assert_eq!(plain.a, zero.a);
    }

    #[test]
    fn tangency_events_sit_on_sector_boundaries() {
        let arr = arr_for(
            GraphSpec::circle(&[2, 1, 1, 2].iter().copied().chain([2]).collect::<Vec<_>>(), 3)
                .with_handles(&[((2, 1), &[1]), ((3, 1), &[1])]),
        );
        let ev = tangency_events(&arr, 96);
        assert_eq!(ev.len(), 2 * arr.circles.len());
        for e in &ev {
            let Position::Angle(a) = &e.position else { unreachable!() };
            assert_eq!((a.numer() * arr.k as i64) % a.denom(), 0, "{a}");
        }
        for c in &arr.circles {
            let (lo, hi) = numeric_tangency_turns(&arr, c).unwrap();
            let (Position::Angle(p), Position::Angle(q)) = arr.tangency_positions(c) else { unreachable!() };
            let wrap = |x: f64| x.rem_euclid(1.0);
            let pf = p.normalized().numer() as f64 / p.normalized().denom() as f64;
            let qf = q.normalized().numer() as f64 / q.normalized().denom() as f64;
            assert!((wrap(lo) - pf).abs() < 1e-9 || (wrap(lo) - pf).abs() > 1.0 - 1e-9);
            assert!((wrap(hi) - qf).abs() < 1e-9 || (wrap(hi) - qf).abs() > 1.0 - 1e-9);
        }
    }

    #[test]
    fn single_circle_events_k3() {
        let arr = arr_for(GraphSpec::circle(&[2, 2, 2], 2));
        let c = arr.circles.iter().find(|c| c.sector == 1).unwrap();
        let (p, q) = arr.tangency_positions(c);
        assert_eq!(p, Position::Angle(StructuredAngle::new(1, 3)));
        assert_eq!(q, Position::Angle(StructuredAngle::new(2, 3)));
        let ev = tangency_events(&arr, 64);
        assert_eq!(ev.len(), 6);
        let at = |n, d| ev.iter().filter(|e| e.position == Position::Angle(StructuredAngle::new(n, d))).count();
        assert_eq!((at(1, 3), at(2, 3), at(1, 1)), (2, 2, 2));
        let empty = arr_for(GraphSpec::circle(&[], 2));
        assert!(tangency_events(&empty, 64).is_empty());
    }

    #[test]
    fn constant_spec_chain_structure_repeats() {
        // Adjacent sectors are staggered, so only the per-sector chain shape
        // (count, roles, consecutive ratios) is rotation invariant.
        let arr = arr_for(GraphSpec::circle(&[3, 3, 3, 3], 2));
        let per_sector: Vec<Vec<f64>> = (1..=4)
            .map(|j| {
                arr.circles
                    .iter()
                    .filter(|c| c.sector == j)
                    .map(|c| match &c.geometry {
                        CircleGeometry::Polar { d, .. } => crate::numeric::ratio_to_f64(d),
                        _ => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        for ds in &per_sector {
            assert_eq!(ds.len(), 2);
            let r0 = per_sector[0][1] / per_sector[0][0];
            assert!((ds[1] / ds[0] - r0).abs() < 1e-9);
        }
        assert_eq!(per_sector[0], per_sector[2]);
        assert_eq!(per_sector[1], per_sector[3]);
    }

    #[test]
    fn line_arrangement_fits() {
        let arr = arr_for(GraphSpec::line(&[1, 3, 2, 1], 2));
        assert_eq!(arr.circles.len(), 3);
        assert_eq!(arr.vertex_positions().len(), 5);
        assert!(certify_disjointness(&arr, 64).unwrap().min_margin_f64().unwrap() > 1e-3);
        let arr = arr_for(GraphSpec::line(&[1], 2));
        assert!(arr.circles.is_empty());
        assert_eq!(arr.vertex_positions(), vec![Position::Abscissa(ratio(-1, 1)), Position::Abscissa(ratio(1, 1))]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let arr = arr_for(GraphSpec::circle(&[3, 2, 4, 1, 2], 2));
        let s = serde_json::to_string(&arr).unwrap();
        assert!(s.contains(r#""a":"#) && s.contains(r#""epsilon":"#));
        let back: CircleArrangement = serde_json::from_str(&s).unwrap();
        assert_eq!(arr, back);
    }
}
