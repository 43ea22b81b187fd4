//! Morse, Euler-characteristic and fiber-count certificates of a swept arrangement.

use serde::{Deserialize, Serialize};

use crate::graph_model::{EdgeId, Mode};
use crate::layout::{numeric_tangency_turns, tangency_events, CircleArrangement, CircleGeometry, Position};
use crate::numeric::{trig, Interval};

use super::{connected_sum_word, handle_bands, sweep, SweepError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MorseError {
    #[error("no singular point at vertex {0}")]
    MissingSingularAngle(u32),
    #[error("saddle count {found} differs from the expected {expected}")]
    SaddleMismatch { expected: u32, found: u32 },
    #[error("tangency of {0} is not a nondegenerate fold of the angle function")]
    Degenerate(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSingularities {
    pub position: Position,
    pub tangencies: u32,
    pub removed_tangencies: u32,
    pub folds: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCertificate {
    pub saddle_count: u32,
    pub expected_saddles: u32,
    pub handle_tangencies: u32,
    pub folds: u32,
    pub per_vertex: Vec<VertexSingularities>,
    /// Every tangency position is exactly one of the vertex positions.
    pub tangencies_on_vertex_positions: bool,
    /// Largest deviation, in turns, of a floating-point tangency solve from
    /// the structural angle.
    pub numeric_tangency_deviation: f64,
    pub origin_outside_all_circles: bool,
    pub pass: bool,
}

/// Checks that every vertex position carries a singular point and that the
/// removed-disk tangencies number `2 Σ(a_j - 1)`.
pub fn verify_morse(arr: &CircleArrangement, prec: u32) -> Result<SweepCertificate, MorseError> {
    let events = tangency_events(arr, prec);
    let vertex_positions = arr.vertex_positions();
    let fold_count = if arr.mode == Mode::Line { 2 } else { 0 };

    // d > r for polar circles: sin(pi/k) < 1 certified.
    let origin_outside = if arr.mode == Mode::Circle && arr.k >= 3 {
        let s = trig::sin_half_sector(arr.k, prec);
        let ok = s.certainly_lt(&Interval::one(prec));
        if !ok {
            if let Some(c) = arr.circles.first() {
                return Err(MorseError::Degenerate(c.label()));
            }
        }
        ok
    } else {
        true
    };

    let mut per_vertex = Vec::new();
    for (idx, pos) in vertex_positions.iter().enumerate() {
        let at: Vec<_> = events.iter().filter(|e| &e.position == pos).collect();
        let folds = if arr.mode == Mode::Line && (idx == 0 || idx + 1 == vertex_positions.len()) { 1 } else { 0 };
        let entry = VertexSingularities {
            position: pos.clone(),
            tangencies: at.len() as u32,
            removed_tangencies: at.iter().filter(|e| e.removed).count() as u32,
            folds,
        };
        if entry.tangencies + entry.folds == 0 {
            return Err(MorseError::MissingSingularAngle(idx as u32 + 1));
        }
        per_vertex.push(entry);
    }

    let on_vertices = events.iter().all(|e| vertex_positions.contains(&e.position));
    let mut deviation: f64 = 0.0;
    for c in &arr.circles {
        if let (Some((lo, hi)), CircleGeometry::Polar { .. }) = (numeric_tangency_turns(arr, c), &c.geometry) {
            let (p, q) = arr.tangency_positions(c);
            for (num, exact) in [(lo, p), (hi, q)] {
                let diff = (num - exact.to_f64()).rem_euclid(1.0);
                deviation = deviation.max(diff.min(1.0 - diff));
            }
        }
    }

    let saddle_count = events.iter().filter(|e| e.removed).count() as u32;
    let expected_saddles = 2 * arr.multiplicities.iter().map(|a| a.saturating_sub(1)).sum::<u32>();
    if saddle_count != expected_saddles {
        return Err(MorseError::SaddleMismatch { expected: expected_saddles, found: saddle_count });
    }
    Ok(SweepCertificate {
        saddle_count,
        expected_saddles,
        handle_tangencies: events.iter().filter(|e| !e.removed).count() as u32,
        folds: fold_count,
        per_vertex,
        tangencies_on_vertex_positions: on_vertices,
        numeric_tangency_deviation: deviation,
        origin_outside_all_circles: origin_outside,
        pass: on_vertices && origin_outside,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EulerError {
    #[error("Euler characteristic check needs a surface, got dimension {0}")]
    NotSurface(u32),
    #[error("Euler characteristics disagree: Morse count {morse}, doubled region {region}, closed form {formula}")]
    Mismatch { morse: i64, region: i64, formula: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerReport {
    /// `#extrema - #saddles` of the Morse function on the surface.
    pub from_critical_points: i64,
    /// `2 χ(region)`, from the region's cell structure.
    pub from_region: i64,
    /// `-2 Σ(a_j - 1)` (plus 2 in line mode).
    pub closed_form: i64,
    pub genus: Option<i64>,
}

/// Euler characteristic of the surface (dimension 2) by two independent counts.
pub fn euler_check(arr: &CircleArrangement, prec: u32) -> Result<EulerReport, EulerError> {
    if arr.dimension != 2 {
        return Err(EulerError::NotSurface(arr.dimension));
    }
    let events = tangency_events(arr, prec);
    let saddles = events.iter().filter(|e| e.removed).count() as i64;
    let holes = arr.removed().count() as i64;
    let sum: i64 = arr.multiplicities.iter().map(|&a| a as i64 - 1).sum();
    let (morse, region, formula) = match arr.mode {
        // The annulus has χ = 0 and each removed open disk lowers it by one.
        Mode::Circle => (-saddles, 2 * (0 - holes), -2 * sum),
        // A closed disk has χ = 1; the two folds are the extrema.
        Mode::Line => (2 - saddles, 2 * (1 - holes), 2 - 2 * sum),
    };
    if morse != region || region != formula {
        return Err(EulerError::Mismatch { morse, region, formula });
    }
    Ok(EulerReport {
        from_critical_points: morse,
        from_region: region,
        closed_form: formula,
        genus: if morse % 2 == 0 { Some((2 - morse) / 2) } else { None },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FiberError {
    #[error("channel {edge}: crossed handle counts {found:?}, prescribed {expected:?}")]
    CountMismatch { edge: EdgeId, expected: Vec<u32>, found: Vec<u32> },
    #[error(transparent)]
    Sweep(#[from] SweepError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberRow {
    pub channel: [u32; 2],
    pub sample: Position,
    pub counts: Vec<u32>,
    pub expected: Vec<u32>,
    pub word: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberTable {
    pub dimension: u32,
    pub rows: Vec<FiberRow>,
}

/// Fiber type of an edge with the given per-stage handle counts.
pub fn fiber_word(counts: &[u32], m: u32) -> String {
    connected_sum_word(counts, m)
}

/// Counts handle chords per channel band at a generic ray of every sector
/// and compares them with the prescribed sequences.
pub fn fiber_counts_check(arr: &CircleArrangement, prec: u32) -> Result<FiberTable, FiberError> {
    let mut rows = Vec::new();
    if arr.mode == Mode::Circle && arr.k >= 3 {
        let outcome = sweep(arr, prec)?;
        for gap in &outcome.trace.gaps {
            let bands = handle_bands(arr, &gap.position, prec)?;
            for (i, counts) in bands.iter().enumerate() {
                let edge = EdgeId { sector: gap.sector, channel: i as u32 + 1 };
                let expected = arr.handle_sequence(edge);
                if *counts != expected {
                    return Err(FiberError::CountMismatch { edge, expected, found: counts.clone() });
                }
                rows.push(FiberRow {
                    channel: [edge.sector, edge.channel],
                    sample: gap.position.clone(),
                    counts: counts.clone(),
                    expected,
                    word: fiber_word(counts, arr.dimension),
                });
            }
        }
    }
    rows.sort_by_key(|r| r.channel);
    Ok(FiberTable { dimension: arr.dimension, rows })
}
