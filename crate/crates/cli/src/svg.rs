//! Two-panel SVG: the planar arrangement on the left, the swept Reeb graph
//! on the right. Coordinates are printed with fixed decimals so the output
//! is byte-stable.

use std::fmt::Write;

use reebforge_core::certificate::circle_center_f64;
use reebforge_core::layout::{tangency_events, CircleArrangement, Role};
use reebforge_core::numeric::ratio_to_f64;
use reebforge_core::sweep::ReebGraphResult;
use reebforge_core::Mode;

#[derive(Clone, Debug)]
pub struct PlotOptions {
    pub size: u32,
    pub labels: bool,
}

fn f(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// World-to-panel map: uniform scale, y up.
struct View {
    ox: f64,
    oy: f64,
    scale: f64,
}

impl View {
    fn x(&self, x: f64) -> String {
        f(self.ox + x * self.scale)
    }
    fn y(&self, y: f64) -> String {
        f(self.oy - y * self.scale)
    }
    fn len(&self, r: f64) -> String {
        f(r * self.scale)
    }
}

pub fn render_svg(arr: &CircleArrangement, graph: Option<&ReebGraphResult>, opts: &PlotOptions, prec: u32) -> String {
    let size = opts.size as f64;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = 2 * opts.size,
        h = opts.size
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, 2 * opts.size, opts.size).unwrap();
    match arr.mode {
        Mode::Circle => draw_annulus(&mut s, arr, opts, prec),
        Mode::Line => draw_strips(&mut s, arr, opts, prec),
    }
    if let Some(g) = graph {
        draw_graph(&mut s, arr, g, opts, size);
    }
    s.push_str("</svg>\n");
    s
}

fn draw_circles(s: &mut String, arr: &CircleArrangement, v: &View, opts: &PlotOptions, prec: u32) {
    for c in &arr.circles {
        let (cx, cy, r) = circle_center_f64(&c.geometry, arr.k);
        let style = match c.role {
            Role::RemovedDisk { .. } => r##"fill="white" stroke="#b03a2e" stroke-width="1.5""##,
            Role::Handle { .. } => r##"fill="none" stroke="#1f618d" stroke-width="1.2" stroke-dasharray="4 3""##,
        };
        writeln!(s, r#"<circle cx="{}" cy="{}" r="{}" {style}/>"#, v.x(cx), v.y(cy), v.len(r)).unwrap();
        if opts.labels {
            writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">{}</text>"#, v.x(cx), v.y(cy), c.label()).unwrap();
        }
    }
    for e in tangency_events(arr, prec) {
        let px: f64 = e.point[0].parse().unwrap_or(0.0);
        let py: f64 = e.point[1].parse().unwrap_or(0.0);
        writeln!(s, r#"<circle cx="{}" cy="{}" r="2" fill="black"/>"#, v.x(px), v.y(py)).unwrap();
    }
}

fn draw_annulus(s: &mut String, arr: &CircleArrangement, opts: &PlotOptions, prec: u32) {
    let size = opts.size as f64;
    let a = ratio_to_f64(&arr.halfwidth());
    let outer = 1.0 + a;
    let v = View { ox: size / 2.0, oy: size / 2.0, scale: 0.45 * size / outer };
    writeln!(
        s,
        r##"<path d="M {x0} {cy} A {ro} {ro} 0 1 0 {x1} {cy} A {ro} {ro} 0 1 0 {x0} {cy} Z M {i0} {cy} A {ri} {ri} 0 1 1 {i1} {cy} A {ri} {ri} 0 1 1 {i0} {cy} Z" fill="#eaf2f8" fill-rule="evenodd" stroke="black"/>"##,
        x0 = v.x(-outer),
        x1 = v.x(outer),
        cy = v.y(0.0),
        ro = v.len(outer),
        i0 = v.x(-(1.0 - a)),
        i1 = v.x(1.0 - a),
        ri = v.len(1.0 - a),
    )
    .unwrap();
    for (j, p) in arr.vertex_positions().iter().enumerate() {
        let t = p.to_f64() * std::f64::consts::TAU;
        let (c, sn) = (t.cos(), t.sin());
        writeln!(
            s,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#7f8c8d" stroke-width="0.8"/>"##,
            v.x(0.0),
            v.y(0.0),
            v.x(outer * c),
            v.y(outer * sn)
        )
        .unwrap();
        if opts.labels {
            writeln!(s, r#"<text x="{}" y="{}" font-size="12">v{}</text>"#, v.x(1.05 * outer * c), v.y(1.05 * outer * sn), j + 1).unwrap();
        }
    }
    draw_circles(s, arr, &v, opts, prec);
}

fn draw_strips(s: &mut String, arr: &CircleArrangement, opts: &PlotOptions, prec: u32) {
    let size = opts.size as f64;
    let e = arr.ellipse.as_ref().expect("line arrangement has an ellipse");
    let (cx, ax, by) = (ratio_to_f64(&e.center_x), ratio_to_f64(&e.semi_x), ratio_to_f64(&e.semi_y));
    let scale = 0.9 * size / (2.0 * ax.max(by));
    let v = View { ox: size / 2.0 - cx * scale, oy: size / 2.0, scale };
    writeln!(s, r##"<ellipse cx="{}" cy="{}" rx="{}" ry="{}" fill="#eaf2f8" stroke="black"/>"##, v.x(cx), v.y(0.0), v.len(ax), v.len(by))
        .unwrap();
    for (j, p) in arr.vertex_positions().iter().enumerate() {
        let x = p.to_f64();
        let u = ((x - cx) / ax).clamp(-1.0, 1.0);
        let h = by * (1.0 - u * u).max(0.0).sqrt();
        writeln!(s, r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#7f8c8d" stroke-width="0.8"/>"##, v.x(x), v.y(-h), v.x(x), v.y(h))
            .unwrap();
        if opts.labels {
            writeln!(s, r#"<text x="{}" y="{}" font-size="12">v{}</text>"#, v.x(x), v.y(h), j + 1).unwrap();
        }
    }
    draw_circles(s, arr, &v, opts, prec);
}

fn draw_graph(s: &mut String, arr: &CircleArrangement, g: &ReebGraphResult, opts: &PlotOptions, size: f64) {
    let (ox, oy) = (1.5 * size, size / 2.0);
    let style = r##"fill="none" stroke="#2c3e50" stroke-width="1.5""##;
    if g.no_vertex_circle {
        writeln!(s, r#"<circle cx="{}" cy="{}" r="{}" {style}/>"#, f(ox), f(oy), f(0.35 * size)).unwrap();
        return;
    }
    let pos: Vec<(f64, f64)> = match arr.mode {
        Mode::Circle => g
            .vertices
            .iter()
            .map(|v| {
                let t = v.position.to_f64() * std::f64::consts::TAU;
                (ox + 0.35 * size * t.cos(), oy - 0.35 * size * t.sin())
            })
            .collect(),
        Mode::Line => {
            let n = g.vertices.len().max(2) as f64;
            (0..g.vertices.len()).map(|i| (size + size * (0.1 + 0.8 * i as f64 / (n - 1.0)), oy)).collect()
        }
    };
    // Parallel edges between the same pair fan out by channel.
    for e in &g.edges {
        let (p, q) = (pos[e.from], pos[e.to]);
        let parallel = g.edges.iter().filter(|o| o.from == e.from && o.to == e.to).count() as f64;
        let offset = (e.channel[1] as f64 - (parallel + 1.0) / 2.0) * 0.06 * size;
        let (mx, my) = ((p.0 + q.0) / 2.0, (p.1 + q.1) / 2.0);
        let (ctrl_x, ctrl_y) = match arr.mode {
            Mode::Circle => {
                let (dx, dy) = (mx - ox, my - oy);
                let len = dx.hypot(dy);
                let (ux, uy) = if len > 1e-9 { (dx / len, dy / len) } else { (-(q.1 - p.1), q.0 - p.0) };
                let bulge = 0.2 * size + offset;
                (ox + ux * (len + bulge), oy + uy * (len + bulge))
            }
            Mode::Line => (mx, my + 2.0 * offset),
        };
        writeln!(s, r#"<path d="M {} {} Q {} {} {} {}" {style}/>"#, f(p.0), f(p.1), f(ctrl_x), f(ctrl_y), f(q.0), f(q.1)).unwrap();
    }
    for (i, (x, y)) in pos.iter().enumerate() {
        writeln!(s, r#"<circle cx="{}" cy="{}" r="4" fill="black"/>"#, f(*x), f(*y)).unwrap();
        if opts.labels {
            writeln!(s, r#"<text x="{}" y="{}" font-size="12">v{} (deg {})</text>"#, f(x + 6.0), f(y - 6.0), i + 1, g.vertices[i].degree)
                .unwrap();
        }
    }
}
