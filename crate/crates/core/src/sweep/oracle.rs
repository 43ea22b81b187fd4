//! Independent raster oracle: the region is sampled on a polar (or
//! Cartesian) grid, per-slice runs are linked by overlap and the links are
//! contracted into a multigraph.

use num_rational::BigRational;

use crate::graph_model::{canonical_cyclic_form, canonical_path_form, Mode};
use crate::layout::{CircleArrangement, CircleGeometry, Position};
use crate::numeric::{ratio_to_f64, StructuredAngle};

use super::uf::UnionFind;
use super::{ReebEdge, ReebGraphResult, ReebVertex};

/// Junctions joined by a chain of at most this many slices are one vertex.
const CONTRACT_SLICES: usize = 2;
const MIN_RESOLUTION: usize = 64;
const RETRIES: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
}

struct Disk {
    x: f64,
    y: f64,
    r2: f64,
}

fn disks(arr: &CircleArrangement) -> Vec<Disk> {
    let s = if arr.k >= 3 { (std::f64::consts::PI / arr.k as f64).sin() } else { 0.0 };
    arr.removed()
        .map(|(_, c)| match &c.geometry {
            CircleGeometry::Polar { d, center_angle } => {
                let d = ratio_to_f64(d);
                let t = center_angle.to_radians();
                Disk { x: d * t.cos(), y: d * t.sin(), r2: (d * s) * (d * s) }
            }
            CircleGeometry::Cartesian { center_x, center_y, radius } => {
                let r = ratio_to_f64(radius);
                Disk { x: ratio_to_f64(center_x), y: ratio_to_f64(center_y), r2: r * r }
            }
        })
        .collect()
}

type Run = (u32, u32);

struct Raster {
    runs: Vec<Vec<Run>>,
    cyclic: bool,
}

fn runs_of(inside: impl Iterator<Item = bool>) -> Vec<Run> {
    let mut out = Vec::new();
    let mut start = None;
    let mut last = 0u32;
    for (i, v) in inside.enumerate() {
        let i = i as u32;
        match (v, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
        last = i;
    }
    if let Some(s) = start {
        out.push((s, last));
    }
    out
}

fn rasterize_polar(arr: &CircleArrangement, radial: usize, angular: usize) -> Raster {
    let a = ratio_to_f64(&arr.halfwidth());
    let (inner, ratio) = (1.0 - a, (1.0 + a) / (1.0 - a));
    let radii: Vec<f64> = (0..radial).map(|i| inner * ratio.powf((i as f64 + 0.5) / radial as f64)).collect();
    let disks = disks(arr);
    let runs = (0..angular)
        .map(|s| {
            let t = std::f64::consts::TAU * (s as f64 + 0.5) / angular as f64;
            let (c, sn) = (t.cos(), t.sin());
            runs_of(radii.iter().map(|&r| {
                let (x, y) = (r * c, r * sn);
                !disks.iter().any(|d| (x - d.x).powi(2) + (y - d.y).powi(2) < d.r2)
            }))
        })
        .collect();
    Raster { runs, cyclic: true }
}

fn rasterize_line(arr: &CircleArrangement, vertical: usize, horizontal: usize) -> Raster {
    let el = arr.ellipse.as_ref().expect("line arrangement has an ellipse");
    let (cx, ea, eb) = (ratio_to_f64(&el.center_x), ratio_to_f64(&el.semi_x), ratio_to_f64(&el.semi_y));
    let disks = disks(arr);
    let runs = (0..horizontal)
        .map(|s| {
            let x = cx - ea + 2.0 * ea * (s as f64 + 0.5) / horizontal as f64;
            runs_of((0..vertical).map(|i| {
                let y = -eb + 2.0 * eb * (i as f64 + 0.5) / vertical as f64;
                let u = (x - cx) / ea;
                let v = y / eb;
                u * u + v * v < 1.0 && !disks.iter().any(|d| (x - d.x).powi(2) + (y - d.y).powi(2) < d.r2)
            }))
        })
        .collect();
    Raster { runs, cyclic: false }
}

struct Contracted {
    /// per vertex: the slice boundary index (slice s to s+1 is boundary s+1)
    vertex_slices: Vec<Vec<usize>>,
    /// (from vertex, to vertex, chain length, first slice, run rank in that slice)
    edges: Vec<(usize, usize, usize, usize, usize)>,
    loops: usize,
}

/// Links runs of adjacent slices, contracts regular links into chains and
/// short chains into junction groups.
fn contract(r: &Raster) -> Contracted {
    let n_slices = r.runs.len();
    let mut offset = Vec::with_capacity(n_slices + 1);
    let mut total = 0;
    for s in &r.runs {
        offset.push(total);
        total += s.len();
    }
    offset.push(total);
    let id = |s: usize, i: usize| offset[s] + i;

    let mut chains = UnionFind::new(total);
    // For each run: junction on its left and right side, if any.
    let mut left_j: Vec<Option<usize>> = vec![None; total];
    let mut right_j: Vec<Option<usize>> = vec![None; total];
    let mut junction_slice: Vec<usize> = Vec::new();

    let pairs = if r.cyclic { n_slices } else { n_slices.saturating_sub(1) };
    for s in 0..pairs {
        let t = (s + 1) % n_slices;
        let (a, b) = (&r.runs[s], &r.runs[t]);
        let mut local = UnionFind::new(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i].0 <= b[j].1 && b[j].0 <= a[i].1 {
                local.union(i, a.len() + j);
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        let (labels, n) = local.labels();
        let mut left_count = vec![0; n];
        let mut right_count = vec![0; n];
        for i in 0..a.len() {
            left_count[labels[i]] += 1;
        }
        for j in 0..b.len() {
            right_count[labels[a.len() + j]] += 1;
        }
        let mut junction_of = vec![None; n];
        for c in 0..n {
            if left_count[c] != 1 || right_count[c] != 1 {
                junction_of[c] = Some(junction_slice.len());
                junction_slice.push(s + 1);
            }
        }
        for i in 0..a.len() {
            let c = labels[i];
            match junction_of[c] {
                Some(jn) => right_j[id(s, i)] = Some(jn),
                None => {
                    let j = (0..b.len()).find(|&j| labels[a.len() + j] == c).expect("regular link has a partner");
                    chains.union(id(s, i), id(t, j));
                }
            }
        }
        for j in 0..b.len() {
            if let Some(jn) = junction_of[labels[a.len() + j]] {
                left_j[id(t, j)] = Some(jn);
            }
        }
    }
    if !r.cyclic {
        // Runs of the first and last slice open and close at the ends of the domain.
        for i in 0..r.runs.first().map_or(0, |v| v.len()) {
            left_j[id(0, i)] = Some(junction_slice.len());
            junction_slice.push(0);
        }
        for i in 0..r.runs.last().map_or(0, |v| v.len()) {
            right_j[id(n_slices - 1, i)] = Some(junction_slice.len());
            junction_slice.push(n_slices);
        }
    }

    // Chain summaries.
    let (labels, n_chains) = chains.labels();
    let mut len = vec![0usize; n_chains];
    let mut from: Vec<Option<usize>> = vec![None; n_chains];
    let mut to: Vec<Option<usize>> = vec![None; n_chains];
    let mut first: Vec<Option<(usize, usize)>> = vec![None; n_chains];
    for s in 0..n_slices {
        for i in 0..r.runs[s].len() {
            let c = labels[id(s, i)];
            len[c] += 1;
            if let Some(j) = left_j[id(s, i)] {
                from[c] = Some(j);
                first[c] = Some((s, i));
            }
            if let Some(j) = right_j[id(s, i)] {
                to[c] = Some(j);
            }
        }
    }

    let mut groups = UnionFind::new(junction_slice.len());
    for c in 0..n_chains {
        if let (Some(f), Some(t)) = (from[c], to[c]) {
            if len[c] <= CONTRACT_SLICES {
                groups.union(f, t);
            }
        }
    }
    // Junction groups become vertices; order them by their first slice.
    let (glabels, n_groups) = groups.labels();
    let mut vertex_slices = vec![Vec::new(); n_groups];
    for (jn, &s) in junction_slice.iter().enumerate() {
        vertex_slices[glabels[jn]].push(s);
    }
    let mut edges = Vec::new();
    let mut loops = 0;
    for c in 0..n_chains {
        match (from[c], to[c]) {
            (Some(f), Some(t)) => {
                if len[c] > CONTRACT_SLICES {
                    let (s, i) = first[c].expect("chain with a left junction has a first run");
                    edges.push((glabels[f], glabels[t], len[c], s, i));
                }
            }
            (None, None) => loops += 1,
            _ => {}
        }
    }
    Contracted { vertex_slices, edges, loops }
}

/// Circular mean of slice boundaries, rounded to the boundary grid.
fn mean_boundary(slices: &[usize], n: usize, cyclic: bool) -> f64 {
    if !cyclic {
        return slices.iter().sum::<usize>() as f64 / slices.len() as f64;
    }
    let (mut sx, mut sy) = (0.0, 0.0);
    for &s in slices {
        let t = std::f64::consts::TAU * s as f64 / n as f64;
        sx += t.cos();
        sy += t.sin();
    }
    let turns = sy.atan2(sx).rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU;
    turns * n as f64
}

fn build_result(arr: &CircleArrangement, raster: &Raster, c: &Contracted) -> Result<ReebGraphResult, OracleError> {
    let n = raster.runs.len();
    let cyclic = raster.cyclic;
    let boundaries: Vec<f64> = c.vertex_slices.iter().map(|v| mean_boundary(v, n, cyclic)).collect();
    let mut order: Vec<usize> = (0..boundaries.len()).collect();
    let key = |b: f64| if cyclic && b < 0.5 { b + n as f64 } else { b };
    order.sort_by(|&x, &y| key(boundaries[x]).total_cmp(&key(boundaries[y])));
    let mut rank = vec![0; order.len()];
    for (r, &g) in order.iter().enumerate() {
        rank[g] = r;
    }

    let position = |b: f64| -> Position {
        // boundary index on a grid of 2n steps
        let steps = (b * 2.0).round() as i64;
        match arr.mode {
            Mode::Circle => Position::Angle(StructuredAngle::new(steps, 2 * n as i64).normalized_positive()),
            Mode::Line => {
                let el = arr.ellipse.as_ref().expect("line arrangement has an ellipse");
                let frac = BigRational::new(steps.into(), (2 * n as i64).into());
                Position::Abscissa(&el.center_x - &el.semi_x + frac * BigRational::from_integer(2.into()) * &el.semi_x)
            }
        }
    };
    let mut vertices: Vec<ReebVertex> =
        order.iter().map(|&g| ReebVertex { position: position(boundaries[g]), degree: 0, left: 0, right: 0 }).collect();

    let mut edges = Vec::new();
    for &(f, t, len, s, i) in &c.edges {
        if len <= 4 * CONTRACT_SLICES {
            return Err(OracleError::ResolutionTooCoarse(format!("edge of only {len} slices")));
        }
        let sector = match arr.mode {
            Mode::Circle if arr.k > 0 => {
                let mid = (s + len / 2) % n;
                let turns = (mid as f64 + 0.5) / n as f64;
                let j = (turns * arr.k as f64).floor() as u32;
                if j == 0 {
                    arr.k
                } else {
                    j
                }
            }
            Mode::Circle => 0,
            Mode::Line => rank[f] as u32 + 1,
        };
        edges.push(ReebEdge {
            channel: [sector, i as u32 + 1],
            from: rank[f],
            to: rank[t],
            fiber: String::new(),
            handle_counts: Vec::new(),
        });
    }
    edges.sort_by_key(|e| (e.from, e.to, e.channel));
    for e in &edges {
        vertices[e.from].right += 1;
        vertices[e.to].left += 1;
    }
    for v in &mut vertices {
        v.degree = v.left + v.right;
    }
    Ok(ReebGraphResult { no_vertex_circle: vertices.is_empty() && c.loops == 1, vertices, edges })
}

/// Raster Reeb graph at `radial_res × angular_res` (rows × slices in line
/// mode). Doubles the slice count up to three times when vertices are not
/// resolved.
pub fn brute_oracle_reeb(arr: &CircleArrangement, radial_res: usize, angular_res: usize) -> Result<ReebGraphResult, OracleError> {
    if radial_res < MIN_RESOLUTION || angular_res < MIN_RESOLUTION {
        return Err(OracleError::ResolutionTooCoarse(format!("{radial_res}x{angular_res} is below {MIN_RESOLUTION}")));
    }
    let mut slices = angular_res;
    let mut last = None;
    for _ in 0..=RETRIES {
        let raster = match arr.mode {
            Mode::Circle => rasterize_polar(arr, radial_res, slices),
            Mode::Line => rasterize_line(arr, radial_res, slices),
        };
        match build_result(arr, &raster, &contract(&raster)) {
            Ok(g) => return Ok(g),
            Err(e) => last = Some(e),
        }
        slices *= 2;
    }
    Err(last.expect("at least one attempt"))
}

/// Same graph up to the cyclic (or path) structure, with vertex positions
/// agreeing within `tolerance` (turns or abscissa units).
pub fn oracle_equivalent(a: &ReebGraphResult, b: &ReebGraphResult, mode: Mode, tolerance: f64) -> bool {
    if a.no_vertex_circle != b.no_vertex_circle || a.vertices.len() != b.vertices.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    if a.vertices.is_empty() {
        return true;
    }
    let same_shape = match mode {
        Mode::Circle => match (a.cyclic_multiplicities(), b.cyclic_multiplicities()) {
            (Some(x), Some(y)) => canonical_cyclic_form(&x) == canonical_cyclic_form(&y),
            _ => false,
        },
        Mode::Line => match (a.path_multiplicities(), b.path_multiplicities()) {
            (Some(x), Some(y)) => canonical_path_form(&x) == canonical_path_form(&y),
            _ => false,
        },
    };
    let close = a.vertices.iter().zip(&b.vertices).all(|(u, v)| {
        let d = (u.position.to_f64() - v.position.to_f64()).abs();
        match mode {
            Mode::Circle => d.min(1.0 - d) <= tolerance,
            Mode::Line => d <= tolerance,
        }
    });
    same_shape && close
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_model::{validate, GraphSpec};
    use crate::layout::build_arrangement;
    use crate::sweep::sweep_reeb;

    fn check(spec: GraphSpec) {
        let arr = build_arrangement(&validate(&spec).unwrap(), 96).unwrap();
        let exact = sweep_reeb(&arr, 96).unwrap();
        let raster = brute_oracle_reeb(&arr, 2048, 512).unwrap();
        let tol = match spec.mode {
            Mode::Circle => 4.0 / 512.0,
            Mode::Line => 0.05 * arr.k as f64,
        };
        assert!(oracle_equivalent(&exact, &raster, spec.mode, tol), "{spec:?}\n{exact:?}\n{raster:?}");
    }

    #[test]
    fn coarse_resolution_is_rejected() {
        let arr = build_arrangement(&validate(&GraphSpec::circle(&[2, 2, 2], 2)).unwrap(), 64).unwrap();
        assert!(matches!(brute_oracle_reeb(&arr, 32, 512), Err(OracleError::ResolutionTooCoarse(_))));
    }

    #[test]
    fn empty_annulus() {
        let arr = build_arrangement(&validate(&GraphSpec::circle(&[], 2)).unwrap(), 64).unwrap();
        let g = brute_oracle_reeb(&arr, 256, 128).unwrap();
        assert!(g.no_vertex_circle);
    }

    #[test]
    fn agrees_with_sweep() {
        check(GraphSpec::circle(&[2, 2, 2], 2));
        check(GraphSpec::circle(&[2, 1, 2], 2));
        check(GraphSpec::circle(&[3, 2, 4, 1, 2], 2));
    }

    #[test]
    fn agrees_in_line_mode() {
        check(GraphSpec::line(&[1, 3, 2, 1], 2));
    }

    #[test]
    fn deterministic() {
        let arr = build_arrangement(&validate(&GraphSpec::circle(&[2, 2, 1], 2)).unwrap(), 64).unwrap();
        assert_eq!(brute_oracle_reeb(&arr, 512, 256).unwrap(), brute_oracle_reeb(&arr, 512, 256).unwrap());
    }
}
