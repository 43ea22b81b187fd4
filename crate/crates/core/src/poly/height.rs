//! Certified heights for ellipsoid factors by interval branch-and-bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_rational::BigRational;

use super::{circle_params, Compiled, FactoredPolynomial, PolyError};
use crate::layout::CircleGeometry;
use crate::numeric::{Dyadic, Interval, Round};

/// Working precision for the box evaluations; results stay certified.
const BOX_PREC: u32 = 64;

#[derive(Clone, Copy, Debug)]
pub struct HeightOptions {
    /// Stop once `upper - lower <= rel_tol * upper`.
    pub rel_tol: f64,
    pub max_boxes: usize,
    /// Halvings of `h` allowed when verification fails.
    pub retries: u32,
}

impl Default for HeightOptions {
    fn default() -> Self {
        HeightOptions { rel_tol: 0.05, max_boxes: 4000, retries: 8 }
    }
}

struct Disk {
    cx: Interval,
    cy: Interval,
    r2: Interval,
    fx: f64,
    fy: f64,
    fr: f64,
}

#[derive(Clone)]
struct Cell {
    x: Interval,
    y: Interval,
    lb: f64,
    lb_exact: Dyadic,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.lb == o.lb
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    // min-heap on the lower bound
    fn cmp(&self, o: &Self) -> Ordering {
        o.lb.partial_cmp(&self.lb).unwrap_or(Ordering::Equal)
    }
}

fn span(lo: f64, hi: f64) -> Interval {
    Interval::new(Dyadic::from_f64(lo), Dyadic::from_f64(hi), BOX_PREC)
}

/// Box certainly disjoint from the closed disk.
fn outside(d: &Disk, x: &Interval, y: &Interval) -> bool {
    // squared distance from the centre to the nearest point of the box
    let gap = |c: &Interval, v: &Interval| {
        let lo = v.sub(c);
        if lo.is_positive() || lo.is_negative() {
            lo.abs().lo().clone()
        } else {
            Dyadic::zero()
        }
    };
    let gx = Interval::point(gap(&d.cx, x), BOX_PREC);
    let gy = Interval::point(gap(&d.cy, y), BOX_PREC);
    d.r2.certainly_lt(&gx.sqr().add(&gy.sqr()))
}

fn planar_point(n: usize, x: Interval, y: Interval, rest: &[Interval]) -> Vec<Interval> {
    let mut p = Vec::with_capacity(n);
    p.push(x);
    p.push(y);
    p.extend_from_slice(rest);
    p.truncate(n);
    p
}

fn split(c: &Cell) -> [(Interval, Interval); 2] {
    let (wx, wy) = (c.x.width().to_f64(), c.y.width().to_f64());
    if wx >= wy {
        let m = c.x.mid();
        [(Interval::new(c.x.lo().clone(), m.clone(), BOX_PREC), c.y.clone()), (Interval::new(m, c.x.hi().clone(), BOX_PREC), c.y.clone())]
    } else {
        let m = c.y.mid();
        [(c.x.clone(), Interval::new(c.y.lo().clone(), m.clone(), BOX_PREC)), (c.x.clone(), Interval::new(m, c.y.hi().clone(), BOX_PREC))]
    }
}

fn disk_of(geometry: &CircleGeometry, k: u32) -> Disk {
    let (cx, cy, r) = circle_params(geometry, k, BOX_PREC);
    Disk { fx: cx.mid_f64(), fy: cy.mid_f64(), fr: r.hi_f64(), r2: r.sqr(), cx, cy }
}

/// Certified lower bound of `F(x, 0)` over the closed disk.
pub fn disk_lower_bound(f: &FactoredPolynomial, geometry: &CircleGeometry, k: u32, opts: &HeightOptions) -> Dyadic {
    let c = f.compile_interval(BOX_PREC);
    let d = disk_of(geometry, k);
    let zeros = vec![Interval::zero(BOX_PREC); f.n_vars.saturating_sub(2)];
    let eval = |x: &Interval, y: &Interval| c.eval(&planar_point(f.n_vars, x.clone(), y.clone(), &zeros));
    let pad = d.fr * 1e-9;
    let root_x = span(d.fx - d.fr - pad, d.fx + d.fr + pad);
    let root_y = span(d.fy - d.fr - pad, d.fy + d.fr + pad);
    let v = eval(&root_x, &root_y);
    let mut heap = BinaryHeap::new();
    heap.push(Cell { lb: v.lo_f64(), lb_exact: v.lo().clone(), x: root_x, y: root_y });
    let mut upper = f64::INFINITY;
    let mut boxes = 1;
    while let Some(cell) = heap.pop() {
        if upper.is_finite() && upper - cell.lb <= opts.rel_tol * upper.abs() || boxes >= opts.max_boxes {
            return cell.lb_exact;
        }
        for (x, y) in split(&cell) {
            if outside(&d, &x, &y) {
                continue;
            }
            let (mx, my) = (x.mid_f64(), y.mid_f64());
            if (mx - d.fx).hypot(my - d.fy) <= d.fr {
                let pm = eval(&Interval::point(x.mid(), BOX_PREC), &Interval::point(y.mid(), BOX_PREC));
                upper = upper.min(pm.hi_f64());
            }
            let v = eval(&x, &y);
            boxes += 1;
            heap.push(Cell { lb: v.lo_f64(), lb_exact: v.lo().clone(), x, y });
        }
    }
    // every box was discarded: the disk is empty at this resolution
    Dyadic::zero()
}

/// Checks `F > 0` on the disk times `[-h, h]` in every transverse variable,
/// which contains the ellipsoid over the disk of height `h`.
fn verify_cylinder(f: &Compiled<Interval>, n_vars: usize, d: &Disk, h: &Dyadic, opts: &HeightOptions) -> bool {
    let band = Interval::new(h.neg(), h.clone(), BOX_PREC);
    let rest = vec![band; n_vars.saturating_sub(2)];
    let pad = d.fr * 1e-9;
    let mut stack = vec![(span(d.fx - d.fr - pad, d.fx + d.fr + pad), span(d.fy - d.fr - pad, d.fy + d.fr + pad), 0u32)];
    let mut boxes = 0;
    let min_width = d.fr * 2f64.powi(-14);
    while let Some((x, y, depth)) = stack.pop() {
        boxes += 1;
        if boxes > 20 * opts.max_boxes {
            return false;
        }
        if outside(d, &x, &y) {
            continue;
        }
        if f.eval(&planar_point(n_vars, x.clone(), y.clone(), &rest)).is_positive() {
            continue;
        }
        if x.width().to_f64().max(y.width().to_f64()) < min_width {
            return false;
        }
        let cell = Cell { x, y, lb: 0.0, lb_exact: Dyadic::zero() };
        for (x, y) in split(&cell) {
            stack.push((x, y, depth + 1));
        }
    }
    true
}

/// `h = ½ √L` rounded down, certified against the cylinder over the disk.
pub fn ellipsoid_height(f: &FactoredPolynomial, geometry: &CircleGeometry, k: u32, _prec: u32) -> Result<BigRational, PolyError> {
    ellipsoid_height_with(f, geometry, k, &HeightOptions::default())
}

pub fn ellipsoid_height_with(
    f: &FactoredPolynomial,
    geometry: &CircleGeometry,
    k: u32,
    opts: &HeightOptions,
) -> Result<BigRational, PolyError> {
    let label = || format!("{geometry:?}");
    let l = disk_lower_bound(f, geometry, k, opts);
    if !l.is_positive() {
        return Err(PolyError::HeightFailure(label()));
    }
    let mut h = l.sqrt(32, Round::Down).mul(&Dyadic::pow2(-1), 32, Round::Down);
    let compiled = f.compile_interval(BOX_PREC);
    let d = disk_of(geometry, k);
    for _ in 0..=opts.retries {
        if verify_cylinder(&compiled, f.n_vars, &d, &h, opts) {
            return Ok(h.to_ratio());
        }
        h = h.mul(&Dyadic::pow2(-1), 32, Round::Down);
    }
    Err(PolyError::HeightFailure(label()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{ratio, ratio_to_f64};
    use crate::poly::{centred_disk, unit_disk, us_construct};

    fn tight() -> HeightOptions {
        HeightOptions { rel_tol: 1e-3, max_boxes: 20000, retries: 8 }
    }

    #[test]
    fn unit_disk_lower_bound_near_15_16() {
        let l = disk_lower_bound(&unit_disk(), &centred_disk(&ratio(1, 4)), 0, &tight()).to_f64();
        assert!((15.0 / 16.0 - 1e-3..=15.0 / 16.0).contains(&l), "{l}");
    }

    #[test]
    fn height_of_unit_disk_example() {
        let h = ratio_to_f64(&ellipsoid_height_with(&unit_disk(), &centred_disk(&ratio(1, 4)), 0, &tight()).unwrap());
        let ideal = 0.5 * (15.0f64 / 16.0).sqrt();
        assert!(h <= ideal && h > ideal * 0.999, "{h}");
    }

    #[test]
    fn smaller_disk_never_lowers_height() {
        let f = us_construct(&unit_disk(), 1);
        let h = |r| ratio_to_f64(&ellipsoid_height_with(&f, &centred_disk(&ratio(1, r)), 0, &tight()).unwrap());
        assert!(h(8) >= h(4));
        assert!(h(16) >= h(8));
    }

    #[test]
    fn disk_crossing_the_zero_set_fails() {
        let g = CircleGeometry::Cartesian { center_x: ratio(1, 1), center_y: ratio(0, 1), radius: ratio(1, 4) };
        assert!(matches!(ellipsoid_height(&unit_disk(), &g, 0, 64), Err(PolyError::HeightFailure(_))));
    }
}
