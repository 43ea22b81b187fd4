//! Reeb graph of the angle (or abscissa) function on the planar region,
//! by an exact event sweep over tangency positions.
//!
//! Each level component on the constructed manifold lies over one interval
//! of `region ∩ ray`, and the preimage of such an interval under the
//! projection is connected, so the planar sweep computes the Reeb graph.

pub mod certify;
pub mod oracle;
pub mod uf;

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::graph_model::Mode;
use crate::layout::{CircleArrangement, CircleEnclosure, Position, Role};
use crate::numeric::{trig, Interval, StructuredAngle};

pub use certify::{
    euler_check, fiber_counts_check, fiber_word, verify_morse, EulerError, EulerReport, FiberError, FiberRow, FiberTable, MorseError,
    SweepCertificate,
};
pub use oracle::{brute_oracle_reeb, oracle_equivalent, OracleError};
use uf::UnionFind;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SweepError {
    #[error("degenerate event: {0}")]
    DegenerateEvent(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReebVertex {
    #[serde(flatten)]
    pub position: Position,
    pub degree: u32,
    /// Edges arriving from smaller positions.
    pub left: u32,
    /// Edges leaving toward larger positions.
    pub right: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReebEdge {
    /// `[sector, index]` with the index counted outward from 1.
    pub channel: [u32; 2],
    pub from: usize,
    pub to: usize,
    pub fiber: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub handle_counts: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReebGraphResult {
    pub no_vertex_circle: bool,
    pub vertices: Vec<ReebVertex>,
    pub edges: Vec<ReebEdge>,
}

impl ReebGraphResult {
    /// Edge counts between cyclically consecutive vertices, or `None` when
    /// some edge skips a vertex.
    pub fn cyclic_multiplicities(&self) -> Option<Vec<u32>> {
        let n = self.vertices.len();
        if n == 0 {
            return None;
        }
        let mut counts = vec![0u32; n];
        for e in &self.edges {
            if e.to != (e.from + 1) % n {
                return None;
            }
            counts[e.from] += 1;
        }
        Some(counts)
    }

    /// Edge counts between consecutive vertices of a path.
    pub fn path_multiplicities(&self) -> Option<Vec<u32>> {
        let n = self.vertices.len();
        if n < 2 {
            return None;
        }
        let mut counts = vec![0u32; n - 1];
        for e in &self.edges {
            if e.to != e.from + 1 {
                return None;
            }
            counts[e.from] += 1;
        }
        Some(counts)
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.vertices.iter().map(|v| v.degree).collect()
    }
}

/// A radial (circle mode) or vertical (line mode) chord of one circle.
#[derive(Clone, Debug)]
pub struct Chord {
    pub circle: usize,
    pub lo: Interval,
    pub hi: Interval,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub position: Position,
    pub tangencies: u32,
    pub removed_tangencies: u32,
    pub folds: u32,
    pub level_components: u32,
    pub vertices: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRecord {
    pub position: Position,
    pub sector: u32,
    pub level_components: u32,
    /// Per level component (outward), handle chords crossed per stage.
    pub handle_counts: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepTrace {
    pub events: Vec<EventRecord>,
    pub gaps: Vec<GapRecord>,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub graph: ReebGraphResult,
    pub trace: SweepTrace,
}

/// A singular point on an event slice: a circle tangency or an ellipse fold.
#[derive(Clone, Debug)]
struct Singular {
    circle: Option<usize>,
    coord: Interval,
}

pub(crate) struct SliceContext<'a> {
    arr: &'a CircleArrangement,
    enc: Vec<CircleEnclosure>,
    prec: u32,
    inner: Interval,
    outer: Interval,
}

enum Relation {
    Crossing(Interval, Interval),
    Missing,
}

impl<'a> SliceContext<'a> {
    pub(crate) fn new(arr: &'a CircleArrangement, prec: u32) -> Self {
        let a = Interval::from_ratio(&arr.halfwidth(), prec);
        let one = Interval::one(prec);
        SliceContext { arr, enc: arr.enclosures(prec), prec, inner: one.sub(&a), outer: one.add(&a) }
    }

    fn direction(&self, pos: &Position) -> Option<(Interval, Interval)> {
        match pos {
            Position::Angle(a) => Some(trig::cos_sin(a, self.prec)),
            Position::Abscissa(_) => None,
        }
    }

    fn relation(&self, i: usize, pos: &Position, dir: &Option<(Interval, Interval)>) -> Result<Relation, SweepError> {
        let e = &self.enc[i];
        let degenerate =
            || SweepError::DegenerateEvent(format!("{} is not certifiably crossing or missing at {pos}", self.arr.circles[i].label()));
        match (pos, dir) {
            (Position::Angle(_), Some((c, s))) => {
                let p = e.cx.mul(c).add(&e.cy.mul(s));
                let q = e.cx.sqr().add(&e.cy.sqr()).sub(&e.r.sqr());
                let disc = p.sqr().sub(&q);
                if p.is_negative() || disc.is_negative() {
                    Ok(Relation::Missing)
                } else if p.is_positive() && disc.is_positive() {
                    let root = disc.sqrt();
                    Ok(Relation::Crossing(p.sub(&root), p.add(&root)))
                } else {
                    Err(degenerate())
                }
            }
            (Position::Abscissa(x), _) => {
                let dx = Interval::from_ratio(x, self.prec).sub(&e.cx);
                let disc = e.r.sqr().sub(&dx.sqr());
                if disc.is_negative() {
                    Ok(Relation::Missing)
                } else if disc.is_positive() {
                    let root = disc.sqrt();
                    Ok(Relation::Crossing(e.cy.sub(&root), e.cy.add(&root)))
                } else {
                    Err(degenerate())
                }
            }
            _ => unreachable!("angle positions always carry a direction"),
        }
    }

    /// Slice bounds `(lo, hi)` of the outer region at a non-fold position.
    fn bounds(&self, pos: &Position) -> Result<(Interval, Interval), SweepError> {
        match pos {
            Position::Angle(_) => Ok((self.inner.clone(), self.outer.clone())),
            Position::Abscissa(x) => {
                let el = self.arr.ellipse.as_ref().expect("line arrangement has an ellipse");
                let p = self.prec;
                let u = Interval::from_ratio(x, p).sub(&Interval::from_ratio(&el.center_x, p)).div(&Interval::from_ratio(&el.semi_x, p));
                let rest = Interval::one(p).sub(&u.sqr());
                if !rest.is_positive() {
                    return Err(SweepError::DegenerateEvent(format!("slice {pos} is not inside the ellipse")));
                }
                let h = Interval::from_ratio(&el.semi_y, p).mul(&rest.sqrt());
                Ok((h.neg(), h))
            }
        }
    }

    /// Chords of every circle not listed in `skip`, removed disks sorted
    /// outward and certified disjoint and inside the slice bounds.
    fn chords(&self, pos: &Position, skip: &[usize], check_bounds: bool) -> Result<(Vec<Chord>, Vec<Chord>), SweepError> {
        let dir = self.direction(pos);
        let mut removed = Vec::new();
        let mut handles = Vec::new();
        for i in 0..self.arr.circles.len() {
            if skip.contains(&i) {
                continue;
            }
            if let Relation::Crossing(lo, hi) = self.relation(i, pos, &dir)? {
                let ch = Chord { circle: i, lo, hi };
                if self.arr.circles[i].role.is_removed() {
                    removed.push(ch);
                } else {
                    handles.push(ch);
                }
            }
        }
        removed.sort_by_key(|a| a.lo.mid());
        for w in removed.windows(2) {
            if !w[0].hi.certainly_lt(&w[1].lo) {
                return Err(SweepError::DegenerateEvent(format!("overlapping chords at {pos}")));
            }
        }
        if check_bounds {
            let (lo, hi) = self.bounds(pos)?;
            if let (Some(first), Some(last)) = (removed.first(), removed.last()) {
                if !lo.certainly_lt(&first.lo) || !last.hi.certainly_lt(&hi) {
                    return Err(SweepError::DegenerateEvent(format!("chord leaves the region at {pos}")));
                }
            }
        }
        Ok((removed, handles))
    }

    /// Position of a singular point along the slice of `circle`.
    fn tangency_coord(&self, i: usize) -> Interval {
        let e = &self.enc[i];
        match self.arr.mode {
            // distance from the origin to the tangency point: sqrt(|c|^2 - r^2)
            Mode::Circle => e.cx.sqr().add(&e.cy.sqr()).sub(&e.r.sqr()).sqrt(),
            Mode::Line => e.cy.clone(),
        }
    }
}

/// Number of chords certainly below `t`, failing when `t` is not separated.
fn rank_among(chords: &[Chord], t: &Interval) -> Result<usize, SweepError> {
    let mut below = 0;
    for c in chords {
        if c.hi.certainly_lt(t) {
            below += 1;
        } else if !t.certainly_lt(&c.lo) {
            return Err(SweepError::DegenerateEvent("singular point inside a persisting chord".into()));
        }
    }
    Ok(below)
}

fn sector_of(arr: &CircleArrangement, pos: &Position, vertex_positions: &[Position]) -> u32 {
    match pos {
        Position::Angle(a) => {
            if arr.k == 0 {
                return 0;
            }
            let a = a.normalized();
            let j = (a.numer() * arr.k as i64) / a.denom();
            if j == 0 {
                arr.k
            } else {
                j as u32
            }
        }
        Position::Abscissa(_) => vertex_positions.iter().filter(|v| *v < pos).count() as u32,
    }
}

fn midpoint(a: &Position, b: &Position, wrap: bool) -> Position {
    match (a, b) {
        (Position::Angle(x), Position::Angle(y)) => {
            let y = if wrap { y.add(&StructuredAngle::new(1, 1)) } else { *y };
            Position::Angle(x.midpoint(&y).normalized_positive())
        }
        (Position::Abscissa(x), Position::Abscissa(y)) => Position::Abscissa((x + y) / BigRational::from_integer(2.into())),
        _ => unreachable!("mixed position kinds"),
    }
}

/// Superscript rendering of a non-negative integer.
fn superscript(n: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string().chars().map(|c| DIGITS[c.to_digit(10).unwrap_or(0) as usize]).collect()
}

/// Connected-sum word of `count_j` copies of `S^j × S^(m-j-1)` over stages
/// `j = 1..`; the empty sum is the sphere `S^(m-1)`.
pub(crate) fn connected_sum_word(counts: &[u32], m: u32) -> String {
    let mut terms = Vec::new();
    for (idx, &c) in counts.iter().enumerate() {
        let j = idx as u32 + 1;
        for _ in 0..c {
            terms.push(format!("S{}×S{}", superscript(j), superscript(m.saturating_sub(j + 1))));
        }
    }
    if terms.is_empty() {
        format!("S{}", superscript(m.saturating_sub(1)))
    } else {
        terms.join(" ♯ ")
    }
}

/// Event sweep with full trace.
pub fn sweep(arr: &CircleArrangement, prec: u32) -> Result<SweepOutcome, SweepError> {
    let ctx = SliceContext::new(arr, prec);
    let stages = arr.handle_stages() as usize;
    let vertex_positions = arr.vertex_positions();

    // Singular points grouped by exact position.
    let mut singular: BTreeMap<Position, Vec<Singular>> = BTreeMap::new();
    for (i, c) in arr.circles.iter().enumerate() {
        let (p, q) = arr.tangency_positions(c);
        let coord = ctx.tangency_coord(i);
        singular.entry(p).or_default().push(Singular { circle: Some(i), coord: coord.clone() });
        singular.entry(q).or_default().push(Singular { circle: Some(i), coord });
    }
    if arr.mode == Mode::Line {
        let el = arr.ellipse.as_ref().expect("line arrangement has an ellipse");
        for x in [&el.center_x - &el.semi_x, &el.center_x + &el.semi_x] {
            singular.entry(Position::Abscissa(x)).or_default().push(Singular { circle: None, coord: Interval::zero(prec) });
        }
    }
    let events: Vec<(Position, Vec<Singular>)> = singular.into_iter().collect();
    let ne = events.len();

    if ne == 0 {
        // No singular points: a generic slice tells the number of parallel loops.
        let pos = Position::Angle(StructuredAngle::new(1, 2));
        let (removed, _) = ctx.chords(&pos, &[], true)?;
        let n = removed.len() + 1;
        let graph = ReebGraphResult { no_vertex_circle: n == 1, vertices: Vec::new(), edges: Vec::new() };
        let trace = SweepTrace {
            events: Vec::new(),
            gaps: vec![GapRecord { position: pos, sector: 0, level_components: n as u32, handle_counts: vec![vec![0; stages]; n] }],
        };
        return Ok(SweepOutcome { graph, trace });
    }

    // Event slices: persisting removed chords and the component of each singular point.
    struct EventSlice {
        persisting: Vec<usize>,
        ncomp: usize,
        vertex_comp: Vec<bool>,
    }
    let mut event_slices = Vec::with_capacity(ne);
    let mut event_records = Vec::with_capacity(ne);
    for (pos, sing) in &events {
        let skip: Vec<usize> = sing.iter().filter_map(|s| s.circle).collect();
        let is_fold = sing.iter().any(|s| s.circle.is_none());
        let (removed, _) = ctx.chords(pos, &skip, !is_fold)?;
        if is_fold && !removed.is_empty() {
            return Err(SweepError::DegenerateEvent(format!("a circle crosses the fold at {pos}")));
        }
        let ncomp = removed.len() + 1;
        let mut vertex_comp = vec![false; ncomp];
        for s in sing {
            vertex_comp[rank_among(&removed, &s.coord)?] = true;
        }
        event_records.push(EventRecord {
            position: pos.clone(),
            tangencies: sing.iter().filter(|s| s.circle.is_some()).count() as u32,
            removed_tangencies: sing.iter().filter(|s| s.circle.is_some_and(|i| arr.circles[i].role.is_removed())).count() as u32,
            folds: sing.iter().filter(|s| s.circle.is_none()).count() as u32,
            level_components: ncomp as u32,
            vertices: vertex_comp.iter().filter(|&&v| v).count() as u32,
        });
        event_slices.push(EventSlice { persisting: removed.iter().map(|c| c.circle).collect(), ncomp, vertex_comp });
    }

    // Gaps between consecutive events (cyclic in circle mode).
    let gap_pairs: Vec<(usize, usize)> = match arr.mode {
        Mode::Circle => (0..ne).map(|g| (g, (g + 1) % ne)).collect(),
        Mode::Line => (0..ne - 1).map(|g| (g, g + 1)).collect(),
    };
    struct GapSlice {
        left: usize,
        right: usize,
        /// event component on the left and right event of every gap component
        to_left: Vec<usize>,
        to_right: Vec<usize>,
        first_segment: usize,
    }
    let mut gaps = Vec::new();
    let mut gap_records = Vec::new();
    let mut n_segments = 0usize;
    for &(l, r) in &gap_pairs {
        let wrap = arr.mode == Mode::Circle && r <= l;
        let pos = midpoint(&events[l].0, &events[r].0, wrap);
        let (removed, handles) = ctx.chords(&pos, &[], true)?;
        let ncomp = removed.len() + 1;
        let map_to = |ev: usize| -> Result<Vec<usize>, SweepError> {
            let es: &EventSlice = &event_slices[ev];
            let tangent: Vec<usize> = events[ev].1.iter().filter_map(|s| s.circle).collect();
            let mut out = Vec::with_capacity(ncomp);
            let mut seen = 0;
            out.push(0);
            for ch in &removed {
                if es.persisting.contains(&ch.circle) {
                    seen += 1;
                } else if !tangent.contains(&ch.circle) {
                    return Err(SweepError::DegenerateEvent(format!(
                        "{} vanishes at {} without a tangency",
                        arr.circles[ch.circle].label(),
                        events[ev].0
                    )));
                }
                out.push(seen);
            }
            Ok(out)
        };
        let to_left = map_to(l)?;
        let to_right = map_to(r)?;
        let mut counts = vec![vec![0u32; stages]; ncomp];
        for h in &handles {
            let band = rank_among(&removed, &h.lo)?;
            if band != rank_among(&removed, &h.hi)? {
                return Err(SweepError::DegenerateEvent("handle chord straddles a removed chord".into()));
            }
            if let Role::Handle { stage, .. } = arr.circles[h.circle].role {
                if let Some(slot) = counts[band].get_mut(stage as usize - 1) {
                    *slot += 1;
                }
            }
        }
        gap_records.push(GapRecord {
            sector: sector_of(arr, &pos, &vertex_positions),
            position: pos,
            level_components: ncomp as u32,
            handle_counts: counts,
        });
        gaps.push(GapSlice { left: l, right: r, to_left, to_right, first_segment: n_segments });
        n_segments += ncomp;
    }

    // Event component ids.
    let mut comp_base = Vec::with_capacity(ne);
    let mut n_comps = 0;
    for es in &event_slices {
        comp_base.push(n_comps);
        n_comps += es.ncomp;
    }
    let is_vertex = |ev: usize, c: usize| event_slices[ev].vertex_comp[c];

    // Merge gap segments through regular event components.
    let mut uf = UnionFind::new(n_segments);
    let mut attached: Vec<Vec<usize>> = vec![Vec::new(); n_comps];
    for g in &gaps {
        for i in 0..g.to_left.len() {
            attached[comp_base[g.left] + g.to_left[i]].push(g.first_segment + i);
            attached[comp_base[g.right] + g.to_right[i]].push(g.first_segment + i);
        }
    }
    for ev in 0..ne {
        for c in 0..event_slices[ev].ncomp {
            if !is_vertex(ev, c) {
                let segs = &attached[comp_base[ev] + c];
                for w in segs.windows(2) {
                    uf.union(w[0], w[1]);
                }
            }
        }
    }

    // Vertices in position order.
    let mut vertex_of = vec![None; n_comps];
    let mut vertices = Vec::new();
    for (ev, (pos, _)) in events.iter().enumerate() {
        for c in 0..event_slices[ev].ncomp {
            if is_vertex(ev, c) {
                vertex_of[comp_base[ev] + c] = Some(vertices.len());
                vertices.push(ReebVertex { position: pos.clone(), degree: 0, left: 0, right: 0 });
            }
        }
    }

    // One edge per class of segments, oriented from its start vertex.
    let (labels, n_classes) = uf.labels();
    let mut starts: Vec<Option<(usize, usize, usize)>> = vec![None; n_classes];
    let mut ends: Vec<Option<usize>> = vec![None; n_classes];
    for (gi, g) in gaps.iter().enumerate() {
        for i in 0..g.to_left.len() {
            let seg = g.first_segment + i;
            let class = labels[seg];
            if let Some(v) = vertex_of[comp_base[g.left] + g.to_left[i]] {
                if starts[class].replace((v, gi, i)).is_some() {
                    return Err(SweepError::DegenerateEvent("edge with two start vertices".into()));
                }
            }
            if let Some(v) = vertex_of[comp_base[g.right] + g.to_right[i]] {
                if ends[class].replace(v).is_some() {
                    return Err(SweepError::DegenerateEvent("edge with two end vertices".into()));
                }
            }
        }
    }
    let mut edges = Vec::new();
    let mut loops = 0;
    for class in 0..n_classes {
        match (starts[class], ends[class]) {
            (Some((from, gi, i)), Some(to)) => {
                let rec = &gap_records[gi];
                let counts = rec.handle_counts[i].clone();
                edges.push(ReebEdge {
                    channel: [rec.sector, i as u32 + 1],
                    from,
                    to,
                    fiber: connected_sum_word(&counts, arr.dimension),
                    handle_counts: if counts.iter().any(|&c| c > 0) { counts } else { Vec::new() },
                });
            }
            (None, None) => loops += 1,
            _ => return Err(SweepError::DegenerateEvent("edge with a single end vertex".into())),
        }
    }
    edges.sort_by_key(|e| (e.from, e.to, e.channel));
    for e in &edges {
        vertices[e.from].right += 1;
        vertices[e.to].left += 1;
    }
    for v in &mut vertices {
        v.degree = v.left + v.right;
    }
    let no_vertex_circle = vertices.is_empty() && loops == 1;
    Ok(SweepOutcome {
        graph: ReebGraphResult { no_vertex_circle, vertices, edges },
        trace: SweepTrace { events: event_records, gaps: gap_records },
    })
}

/// Reeb graph of the angle function on the synthesized region.
pub fn sweep_reeb(arr: &CircleArrangement, prec: u32) -> Result<ReebGraphResult, SweepError> {
    sweep(arr, prec).map(|o| o.graph)
}

/// Level-interval count on the ray at an exact generic angle.
pub fn level_components_at(arr: &CircleArrangement, pos: &Position, prec: u32) -> Result<usize, SweepError> {
    let ctx = SliceContext::new(arr, prec);
    ctx.chords(pos, &[], true).map(|(r, _)| r.len() + 1)
}

/// Handle chord counts along a generic slice, split per band and stage.
pub(crate) fn handle_bands(arr: &CircleArrangement, pos: &Position, prec: u32) -> Result<Vec<Vec<u32>>, SweepError> {
    let ctx = SliceContext::new(arr, prec);
    let (removed, handles) = ctx.chords(pos, &[], true)?;
    let mut counts = vec![vec![0u32; arr.handle_stages() as usize]; removed.len() + 1];
    for h in &handles {
        let band = rank_among(&removed, &h.lo)?;
        if let Role::Handle { stage, .. } = arr.circles[h.circle].role {
            if let Some(slot) = counts[band].get_mut(stage as usize - 1) {
                *slot += 1;
            }
        }
    }
    Ok(counts)
}
