//! Input graphs: cycles (or paths) of multi-edges with optional handle
//! sequences, their validation, canonical forms and isomorphism tests.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::numeric::{parse_ratio, StructuredAngle};
use crate::sweep::ReebGraphResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Circle,
    Line,
}

/// Edge `e_{j,j'}`: the `channel`-th of the `a_j` edges joining `v_j` to `v_{j+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId {
    pub sector: u32,
    pub channel: u32,
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e({},{})", self.sector, self.channel)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandleEntry {
    /// `[j, j']`, both 1-based.
    pub edge: [u32; 2],
    pub sequence: Vec<u32>,
}

/// The prescribed graph, as read from a spec file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub mode: Mode,
    pub vertices: u32,
    pub multiplicities: Vec<u32>,
    pub dimension: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handles: Option<Vec<HandleEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annulus_halfwidth: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
}

impl GraphSpec {
    pub fn circle(multiplicities: &[u32], dimension: u32) -> Self {
        GraphSpec {
            mode: Mode::Circle,
            vertices: multiplicities.len() as u32,
            multiplicities: multiplicities.to_vec(),
            dimension,
            handles: None,
            annulus_halfwidth: None,
            precision_bits: None,
        }
    }

    pub fn line(multiplicities: &[u32], dimension: u32) -> Self {
        GraphSpec {
            mode: Mode::Line,
            vertices: multiplicities.len() as u32 + 1,
            multiplicities: multiplicities.to_vec(),
            dimension,
            handles: None,
            annulus_halfwidth: None,
            precision_bits: None,
        }
    }

    pub fn with_handles(mut self, handles: &[((u32, u32), &[u32])]) -> Self {
        self.handles = Some(handles.iter().map(|&((j, jp), seq)| HandleEntry { edge: [j, jp], sequence: seq.to_vec() }).collect());
        self
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// `m' = floor((m-1)/2)`.
    pub fn handle_stages(&self) -> u32 {
        self.dimension.saturating_sub(1) / 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("expected a {expected:?}-mode spec")]
    WrongMode { expected: Mode },
    #[error("circle graphs need 0 or at least 3 vertices, got {0}")]
    TooFewVertices(u32),
    #[error("line graphs need at least 2 vertices, got {0}")]
    TooFewLineVertices(u32),
    #[error("expected {expected} multiplicities, found {found}")]
    MultiplicityCount { expected: usize, found: usize },
    #[error("multiplicity a_{0} must be positive")]
    ZeroMultiplicity(u32),
    #[error("adjacent multiplicities (a_{0}, a_next) = (1, 1)")]
    AdjacentUnitPair(u32),
    #[error("line end edge a_{0} must be a single edge (fold vertices have degree 1)")]
    LineEndMultiplicity(u32),
    #[error("dimension {0} is too small")]
    DimensionTooSmall(u32),
    #[error("handle sequence for {edge} has length {found}, expected {expected}")]
    WrongSequenceLength { edge: EdgeId, expected: u32, found: u32 },
    #[error("edges e({0},1) and its successor both carry all-zero handle sequences")]
    AllZeroUnitPair(u32),
    #[error("handle edge {0} does not exist")]
    UnknownEdge(EdgeId),
    #[error("handle edge {0} listed twice")]
    DuplicateEdge(EdgeId),
    #[error("handles need a circle graph with at least 3 vertices")]
    HandlesNeedCycle,
    #[error("annulus half-width {0:?} is not a rational in (0, 1)")]
    BadHalfwidth(String),
    #[error("precision of {0} bits is below the supported minimum of 32")]
    PrecisionTooLow(u32),
}

pub type HandleTable = BTreeMap<EdgeId, Vec<u32>>;

/// A spec that passed validation, with parsed derived fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidatedSpec {
    spec: GraphSpec,
    handles: Option<HandleTable>,
    halfwidth: Option<BigRational>,
}

impl ValidatedSpec {
    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn mode(&self) -> Mode {
        self.spec.mode
    }

    pub fn vertex_count(&self) -> u32 {
        self.spec.vertices
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.spec.multiplicities
    }

    pub fn dimension(&self) -> u32 {
        self.spec.dimension
    }

    pub fn handles(&self) -> Option<&HandleTable> {
        self.handles.as_ref()
    }

    /// Handle sequence of an edge, all zeros when not listed.
    pub fn handle_sequence(&self, edge: EdgeId) -> Vec<u32> {
        let stages = self.spec.handle_stages() as usize;
        self.handles.as_ref().and_then(|h| h.get(&edge).cloned()).unwrap_or_else(|| vec![0; stages])
    }

    pub fn halfwidth_override(&self) -> Option<&BigRational> {
        self.halfwidth.as_ref()
    }

    pub fn precision_bits(&self) -> Option<u32> {
        self.spec.precision_bits
    }

    pub fn is_no_vertex_circle(&self) -> bool {
        self.spec.mode == Mode::Circle && self.spec.vertices == 0
    }

    /// Degree predicted by the closed forms: `2*sum(a_j - 1) + 4` plus two
    /// per handle circle (circle mode); line mode replaces the annulus by
    /// one ellipse, so the constant is 2.
    pub fn expected_degree(&self) -> u32 {
        let removed: u32 = self.spec.multiplicities.iter().map(|a| a - 1).sum();
        let handles: u32 = self.handles.as_ref().map(|h| h.values().flat_map(|s| s.iter()).sum()).unwrap_or(0);
        let base = match self.spec.mode {
            Mode::Circle => 4,
            Mode::Line => 2,
        };
        2 * handles + 2 * removed + base
    }

    /// Builds a validated spec without checking the adjacency rules. Used to
    /// exercise downstream certificates on deliberately broken inputs.
    pub fn unchecked(spec: GraphSpec) -> Self {
        let handles = spec
            .handles
            .as_ref()
            .map(|h| h.iter().map(|e| (EdgeId { sector: e.edge[0], channel: e.edge[1] }, e.sequence.clone())).collect());
        let halfwidth = spec.annulus_halfwidth.as_deref().and_then(parse_ratio);
        ValidatedSpec { spec, handles, halfwidth }
    }
}

fn common_violations(spec: &GraphSpec) -> (Vec<Violation>, Option<BigRational>) {
    let mut v = Vec::new();
    if spec.dimension < 2 {
        v.push(Violation::DimensionTooSmall(spec.dimension));
    }
    if let Some(p) = spec.precision_bits {
        if p < 32 {
            v.push(Violation::PrecisionTooLow(p));
        }
    }
    let mut halfwidth = None;
    if let Some(s) = &spec.annulus_halfwidth {
        match parse_ratio(s) {
            Some(q) if q.is_positive() && q < BigRational::one() => halfwidth = Some(q),
            _ => v.push(Violation::BadHalfwidth(s.clone())),
        }
    }
    (v, halfwidth)
}

fn cycle_structure_violations(spec: &GraphSpec) -> Vec<Violation> {
    let mut v = Vec::new();
    let k = spec.vertices;
    if k > 0 && k < 3 {
        v.push(Violation::TooFewVertices(k));
    }
    if spec.multiplicities.len() != k as usize {
        v.push(Violation::MultiplicityCount { expected: k as usize, found: spec.multiplicities.len() });
        return v;
    }
    for (i, &a) in spec.multiplicities.iter().enumerate() {
        if a == 0 {
            v.push(Violation::ZeroMultiplicity(i as u32 + 1));
        }
    }
    v
}

/// Indices `j` (1-based) with `a_j = a_{j+1} = 1`, cyclically.
fn unit_pairs(a: &[u32]) -> Vec<u32> {
    let k = a.len();
    if k < 3 {
        return Vec::new();
    }
    (0..k).filter(|&j| a[j] == 1 && a[(j + 1) % k] == 1).map(|j| j as u32 + 1).collect()
}

/// Validates a circle-mode spec. Without handles the forbidden pattern is any
/// cyclically adjacent `(1, 1)`; with handles the rescue rule of
/// [`validate_handle_spec`] applies instead.
pub fn validate_cycle_spec(spec: &GraphSpec) -> Result<ValidatedSpec, Vec<Violation>> {
    if spec.mode != Mode::Circle {
        return Err(vec![Violation::WrongMode { expected: Mode::Circle }]);
    }
    if spec.handles.is_some() {
        return validate_handle_spec(spec);
    }
    let (mut v, halfwidth) = common_violations(spec);
    v.extend(cycle_structure_violations(spec));
    if v.is_empty() {
        v.extend(unit_pairs(&spec.multiplicities).into_iter().map(Violation::AdjacentUnitPair));
    }
    if v.is_empty() {
        Ok(ValidatedSpec { spec: spec.clone(), handles: None, halfwidth })
    } else {
        Err(v)
    }
}

/// Validates a circle-mode spec carrying handle sequences.
pub fn validate_handle_spec(spec: &GraphSpec) -> Result<ValidatedSpec, Vec<Violation>> {
    if spec.mode != Mode::Circle {
        return Err(vec![Violation::HandlesNeedCycle]);
    }
    let (mut v, halfwidth) = common_violations(spec);
    v.extend(cycle_structure_violations(spec));
    if spec.vertices < 3 {
        v.push(Violation::HandlesNeedCycle);
    }
    if spec.dimension <= 2 && !v.contains(&Violation::DimensionTooSmall(spec.dimension)) {
        v.push(Violation::DimensionTooSmall(spec.dimension));
    }
    if !v.is_empty() {
        return Err(v);
    }
    let stages = spec.handle_stages();
    let mut table = HandleTable::new();
    for entry in spec.handles.iter().flatten() {
        let edge = EdgeId { sector: entry.edge[0], channel: entry.edge[1] };
        let valid_sector = edge.sector >= 1 && edge.sector <= spec.vertices;
        if !valid_sector || edge.channel < 1 || edge.channel > spec.multiplicities[edge.sector as usize - 1] {
            v.push(Violation::UnknownEdge(edge));
            continue;
        }
        if entry.sequence.len() != stages as usize {
            v.push(Violation::WrongSequenceLength { edge, expected: stages, found: entry.sequence.len() as u32 });
            continue;
        }
        if table.insert(edge, entry.sequence.clone()).is_some() {
            v.push(Violation::DuplicateEdge(edge));
        }
    }
    if v.is_empty() {
        let all_zero = |e: EdgeId| table.get(&e).is_none_or(|s| s.iter().all(|&x| x == 0));
        let k = spec.vertices;
        for j in unit_pairs(&spec.multiplicities) {
            let next = j % k + 1;
            if all_zero(EdgeId { sector: j, channel: 1 }) && all_zero(EdgeId { sector: next, channel: 1 }) {
                v.push(Violation::AllZeroUnitPair(j));
            }
        }
    }
    if v.is_empty() {
        Ok(ValidatedSpec { spec: spec.clone(), handles: Some(table), halfwidth })
    } else {
        Err(v)
    }
}

/// Validates a line-mode spec: a path `v_1 .. v_k` whose end vertices are
/// folds, so the end edges are simple and interior vertices avoid `(1, 1)`.
pub fn validate_line_spec(spec: &GraphSpec) -> Result<ValidatedSpec, Vec<Violation>> {
    if spec.mode != Mode::Line {
        return Err(vec![Violation::WrongMode { expected: Mode::Line }]);
    }
    let (mut v, halfwidth) = common_violations(spec);
    if spec.handles.is_some() {
        v.push(Violation::HandlesNeedCycle);
    }
    let k = spec.vertices;
    if k < 2 {
        v.push(Violation::TooFewLineVertices(k));
        return Err(v);
    }
    let a = &spec.multiplicities;
    if a.len() != k as usize - 1 {
        v.push(Violation::MultiplicityCount { expected: k as usize - 1, found: a.len() });
        return Err(v);
    }
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            v.push(Violation::ZeroMultiplicity(i as u32 + 1));
        }
    }
    if a[0] != 1 {
        v.push(Violation::LineEndMultiplicity(1));
    }
    if a.len() > 1 && a[a.len() - 1] != 1 {
        v.push(Violation::LineEndMultiplicity(a.len() as u32));
    }
    for j in 0..a.len().saturating_sub(1) {
        if a[j] == 1 && a[j + 1] == 1 {
            v.push(Violation::AdjacentUnitPair(j as u32 + 1));
        }
    }
    if v.is_empty() {
        Ok(ValidatedSpec { spec: spec.clone(), handles: None, halfwidth })
    } else {
        Err(v)
    }
}

/// Dispatches on mode and handle presence.
pub fn validate(spec: &GraphSpec) -> Result<ValidatedSpec, Vec<Violation>> {
    match (spec.mode, spec.handles.is_some()) {
        (Mode::Line, _) => validate_line_spec(spec),
        (Mode::Circle, false) => validate_cycle_spec(spec),
        (Mode::Circle, true) => validate_handle_spec(spec),
    }
}

/// Lexicographically least rotation over both orientations of a cyclic sequence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalCyclicForm(pub Vec<u32>);

pub fn canonical_cyclic_form(multiplicities: &[u32]) -> CanonicalCyclicForm {
    let n = multiplicities.len();
    let mut best: Option<Vec<u32>> = None;
    let reversed: Vec<u32> = multiplicities.iter().rev().copied().collect();
    for seq in [multiplicities, &reversed[..]] {
        for r in 0..n.max(1) {
            let rot: Vec<u32> = seq.iter().cycle().skip(r).take(n).copied().collect();
            if best.as_ref().is_none_or(|b| rot < *b) {
                best = Some(rot);
            }
        }
    }
    CanonicalCyclicForm(best.unwrap_or_default())
}

/// Canonical form of a path: the smaller of the sequence and its reversal.
pub fn canonical_path_form(multiplicities: &[u32]) -> Vec<u32> {
    let rev: Vec<u32> = multiplicities.iter().rev().copied().collect();
    if rev < multiplicities.to_vec() {
        rev
    } else {
        multiplicities.to_vec()
    }
}

/// Whether a swept Reeb graph realizes the prescribed graph.
pub fn reeb_isomorphic(spec: &GraphSpec, result: &ReebGraphResult) -> bool {
    match spec.mode {
        Mode::Circle => {
            if spec.vertices == 0 {
                return result.no_vertex_circle && result.vertices.is_empty();
            }
            if result.no_vertex_circle || result.vertices.len() != spec.vertices as usize {
                return false;
            }
            match result.cyclic_multiplicities() {
                Some(m) => canonical_cyclic_form(&m) == canonical_cyclic_form(&spec.multiplicities),
                None => false,
            }
        }
        Mode::Line => {
            if result.no_vertex_circle || result.vertices.len() != spec.vertices as usize {
                return false;
            }
            match result.path_multiplicities() {
                Some(m) => canonical_path_form(&m) == canonical_path_form(&spec.multiplicities),
                None => false,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Embedded graphs and the degree / injectivity / interiority checker.

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedVertex {
    pub angle: StructuredAngle,
}

/// An edge mapped onto the arc running counterclockwise from `from` to `to`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedEdge {
    pub from: usize,
    pub to: usize,
}

/// Which side of a vertex angle an incident edge occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Increasing,
    Decreasing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddedGraphDescription {
    pub vertices: Vec<EmbeddedVertex>,
    pub edges: Vec<EmbeddedEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EmbeddedGraphError {
    #[error("edge {edge} references missing vertex {vertex}")]
    MissingVertex { edge: usize, vertex: usize },
    #[error("graph has no vertices")]
    Empty,
}

impl EmbeddedGraphDescription {
    pub fn check_references(&self) -> Result<(), EmbeddedGraphError> {
        if self.vertices.is_empty() {
            return Err(EmbeddedGraphError::Empty);
        }
        for (i, e) in self.edges.iter().enumerate() {
            for v in [e.from, e.to] {
                if v >= self.vertices.len() {
                    return Err(EmbeddedGraphError::MissingVertex { edge: i, vertex: v });
                }
            }
        }
        Ok(())
    }

    /// Local edge-direction signs at a vertex, one per incident edge end.
    pub fn sides(&self, v: usize) -> Vec<Side> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.from == v {
                out.push(Side::Increasing);
            }
            if e.to == v {
                out.push(Side::Decreasing);
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.sides(v).len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionOutcome {
    pub pass: bool,
    /// Offending vertex indices (pairs are flattened for injectivity).
    pub offenders: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub degrees_one_or_three: ConditionOutcome,
    pub vertex_angles_injective: ConditionOutcome,
    pub trivalent_vertices_interior: ConditionOutcome,
    pub pass: bool,
}

/// Checks the combinatorial genericity conditions on a graph mapped to the
/// circle: vertex degrees in {1, 3}, distinct vertex angles, and every
/// degree-3 vertex having incident edges on both sides.
pub fn check_embedding_conditions(g: &EmbeddedGraphDescription) -> EmbeddingReport {
    let n = g.vertices.len();
    let bad_degree: Vec<usize> = (0..n).filter(|&v| !matches!(g.degree(v), 1 | 3)).collect();

    let mut by_angle: BTreeMap<StructuredAngle, Vec<usize>> = BTreeMap::new();
    for (i, v) in g.vertices.iter().enumerate() {
        by_angle.entry(v.angle.normalized()).or_default().push(i);
    }
    let collisions: Vec<usize> = by_angle.values().filter(|vs| vs.len() > 1).flatten().copied().collect();

    let one_sided: Vec<usize> = (0..n)
        .filter(|&v| {
            let sides = g.sides(v);
            sides.len() == 3 && !(sides.contains(&Side::Increasing) && sides.contains(&Side::Decreasing))
        })
        .collect();

    let outcome = |offenders: Vec<usize>| ConditionOutcome { pass: offenders.is_empty(), offenders };
    let degrees = outcome(bad_degree);
    let injective = outcome(collisions);
    let interior = outcome(one_sided);
    let pass = degrees.pass && injective.pass && interior.pass;
    EmbeddingReport { degrees_one_or_three: degrees, vertex_angles_injective: injective, trivalent_vertices_interior: interior, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_canonical(seq: &[u32]) -> Vec<u32> {
        // Independent enumeration of all 2n rotations/reflections.
        let n = seq.len();
        let mut all = Vec::new();
        for r in 0..n {
            all.push((0..n).map(|i| seq[(i + r) % n]).collect::<Vec<_>>());
            all.push((0..n).map(|i| seq[(r + n - i) % n]).collect::<Vec<_>>());
        }
        all.into_iter().min().unwrap()
    }

    #[test]
    fn cycle_validation_examples() {
        let ok = validate_cycle_spec(&GraphSpec::circle(&[2, 2, 2], 2)).unwrap();
        assert!(!ok.is_no_vertex_circle());
        let empty = validate_cycle_spec(&GraphSpec::circle(&[], 2)).unwrap();
        assert!(empty.is_no_vertex_circle());
        let err = validate_cycle_spec(&GraphSpec::circle(&[1, 2, 1], 2)).unwrap_err();
        assert_eq!(err, vec![Violation::AdjacentUnitPair(3)]);
        let err = validate_cycle_spec(&GraphSpec::circle(&[2, 2], 2)).unwrap_err();
        assert_eq!(err, vec![Violation::TooFewVertices(2)]);
    }

    #[test]
    fn handle_validation_examples() {
        let spec = GraphSpec::circle(&[2, 1, 2], 5).with_handles(&[((2, 1), &[1, 0])]);
        assert!(validate_handle_spec(&spec).is_ok());

        let spec = GraphSpec::circle(&[1, 1, 2], 5).with_handles(&[((1, 1), &[0, 0]), ((2, 1), &[0, 0])]);
        assert_eq!(validate_handle_spec(&spec).unwrap_err(), vec![Violation::AllZeroUnitPair(1)]);

        let spec = GraphSpec::circle(&[2, 2, 2], 4).with_handles(&[((1, 1), &[1, 0])]);
        assert_eq!(
            validate_handle_spec(&spec).unwrap_err(),
            vec![Violation::WrongSequenceLength { edge: EdgeId { sector: 1, channel: 1 }, expected: 1, found: 2 }]
        );

        let spec = GraphSpec::circle(&[2, 2, 2], 2).with_handles(&[]);
        assert!(validate_handle_spec(&spec).unwrap_err().contains(&Violation::DimensionTooSmall(2)));
    }

    #[test]
    fn rescue_rule_accepts_one_nonzero_side() {
        let spec = GraphSpec::circle(&[1, 1, 2], 5).with_handles(&[((1, 1), &[1, 0])]);
        let v = validate(&spec).unwrap();
        assert_eq!(v.handle_sequence(EdgeId { sector: 2, channel: 1 }), vec![0, 0]);
    }

    #[test]
    fn unknown_and_duplicate_handle_edges() {
        let spec = GraphSpec::circle(&[2, 1, 2], 3).with_handles(&[((2, 2), &[1]), ((1, 1), &[1]), ((1, 1), &[2])]);
        let err = validate(&spec).unwrap_err();
        assert!(err.contains(&Violation::UnknownEdge(EdgeId { sector: 2, channel: 2 })));
        assert!(err.contains(&Violation::DuplicateEdge(EdgeId { sector: 1, channel: 1 })));
    }

    #[test]
    fn line_validation() {
        assert!(validate(&GraphSpec::line(&[1], 2)).is_ok());
        assert!(validate(&GraphSpec::line(&[1, 3, 2, 1], 2)).is_ok());
        assert_eq!(validate(&GraphSpec::line(&[1, 1], 2)).unwrap_err(), vec![Violation::AdjacentUnitPair(1)]);
        assert!(validate(&GraphSpec::line(&[2, 2, 1], 2)).unwrap_err().contains(&Violation::LineEndMultiplicity(1)));
    }

    #[test]
    fn halfwidth_parsing() {
        let mut spec = GraphSpec::circle(&[2, 2, 2], 2);
        spec.annulus_halfwidth = Some("0.75".into());
        assert_eq!(validate(&spec).unwrap().halfwidth_override(), Some(&crate::numeric::ratio(3, 4)));
        spec.annulus_halfwidth = Some("1.5".into());
        assert!(validate(&spec).is_err());
    }

    #[test]
    fn expected_degrees() {
        let v = validate(&GraphSpec::circle(&[2, 2, 2], 2)).unwrap();
        assert_eq!(v.expected_degree(), 10);
        let v = validate(&GraphSpec::circle(&[2, 1, 2], 5).with_handles(&[((2, 1), &[1, 0])])).unwrap();
        assert_eq!(v.expected_degree(), 2 + 2 * 2 + 4);
        let v = validate(&GraphSpec::circle(&[], 2)).unwrap();
        assert_eq!(v.expected_degree(), 4);
    }

    #[test]
    fn canonical_form_examples() {
        assert_eq!(canonical_cyclic_form(&[2, 2, 2]).0, vec![2, 2, 2]);
        assert_eq!(canonical_cyclic_form(&[3, 1, 2]).0, brute_canonical(&[3, 1, 2]));
        assert_eq!(canonical_cyclic_form(&[3, 1, 2]).0, vec![1, 2, 3]);
        assert_eq!(canonical_cyclic_form(&[2, 1, 2]).0, vec![1, 2, 2]);
    }

    #[test]
    fn json_field_names() {
        let spec = GraphSpec::circle(&[2, 1, 2], 5).with_handles(&[((2, 1), &[1, 0])]);
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            s,
            r#"{"mode":"circle","vertices":3,"multiplicities":[2,1,2],"dimension":5,"handles":[{"edge":[2,1],"sequence":[1,0]}]}"#
        );
        let parsed =
            GraphSpec::from_json(r#"{"mode":"line","vertices":2,"multiplicities":[1],"dimension":3,"precision_bits":64}"#).unwrap();
        assert_eq!(parsed.precision_bits, Some(64));
    }

    fn angle(n: i64, d: i64) -> EmbeddedVertex {
        EmbeddedVertex { angle: StructuredAngle::new(n, d) }
    }

    #[test]
    fn embedding_checker_examples() {
        let g = EmbeddedGraphDescription { vertices: vec![angle(0, 1), angle(1, 4)], edges: vec![EmbeddedEdge { from: 0, to: 1 }] };
        assert!(check_embedding_conditions(&g).pass);

        // All three edges leave the centre toward increasing angle.
        let g = EmbeddedGraphDescription {
            vertices: vec![angle(0, 1), angle(1, 8), angle(1, 4), angle(3, 8)],
            edges: vec![EmbeddedEdge { from: 0, to: 1 }, EmbeddedEdge { from: 0, to: 2 }, EmbeddedEdge { from: 0, to: 3 }],
        };
        let r = check_embedding_conditions(&g);
        assert!(!r.trivalent_vertices_interior.pass);
        assert_eq!(r.trivalent_vertices_interior.offenders, vec![0]);
        assert!(r.degrees_one_or_three.pass);

        let g = EmbeddedGraphDescription { vertices: vec![angle(1, 4), angle(5, 4)], edges: vec![EmbeddedEdge { from: 0, to: 1 }] };
        let r = check_embedding_conditions(&g);
        assert!(!r.vertex_angles_injective.pass);
        assert!(!r.pass);
    }

    #[test]
    fn trivalent_vertex_with_both_sides_passes() {
        let g = EmbeddedGraphDescription {
            vertices: vec![angle(1, 8), angle(1, 4), angle(3, 8), angle(1, 2)],
            edges: vec![EmbeddedEdge { from: 0, to: 1 }, EmbeddedEdge { from: 1, to: 2 }, EmbeddedEdge { from: 1, to: 3 }],
        };
        let r = check_embedding_conditions(&g);
        assert!(r.pass, "{r:?}");
    }

    proptest! {
        #[test]
        fn canonical_form_is_rotation_and_reflection_invariant(seq in prop::collection::vec(1u32..6, 1..10), r in 0usize..10) {
            let n = seq.len();
            let rotated: Vec<u32> = (0..n).map(|i| seq[(i + r) % n]).collect();
            let reversed: Vec<u32> = seq.iter().rev().copied().collect();
            let c = canonical_cyclic_form(&seq);
            prop_assert_eq!(&c, &canonical_cyclic_form(&rotated));
            prop_assert_eq!(&c, &canonical_cyclic_form(&reversed));
            prop_assert_eq!(c.0, brute_canonical(&seq));
        }

        #[test]
        fn cycle_validation_is_rotation_invariant(seq in prop::collection::vec(1u32..4, 3..9), r in 0usize..9) {
            let n = seq.len();
            let rotated: Vec<u32> = (0..n).map(|i| seq[(i + r) % n]).collect();
            let a = validate_cycle_spec(&GraphSpec::circle(&seq, 2)).is_ok();
            let b = validate_cycle_spec(&GraphSpec::circle(&rotated, 2)).is_ok();
            prop_assert_eq!(a, b);
        }
    }
}
