//! SVG picture of one period of the lower-layer flow.
//!
//! Interface solid, separatrix thick, critical curves dashed, streamlines
//! thin with one arrowhead each in the direction of the relative velocity.

use std::fmt::Write as _;

use stratawave_core::flowfield::StreamFunction;

use crate::commands::FlowPicture;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 450.0;
const MARGIN: f64 = 30.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        let u = MARGIN + (p[0] - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN);
        let v = HEIGHT - MARGIN - (p[1] - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN);
        (u, v)
    }

    /// Polyline with `x` wrapped into the frame; a new subpath starts at
    /// every wrap.
    fn path(&self, pts: &[[f64; 2]], style: &str) -> String {
        let period = self.x1 - self.x0;
        let mut d = String::new();
        let mut prev: Option<f64> = None;
        for p in pts {
            let x = self.x0 + (p[0] - self.x0).rem_euclid(period);
            // endpoints of a full period stay where they are
            let x = if (p[0] - self.x1).abs() < 1e-12 { self.x1 } else { x };
            let jump = prev.is_none_or(|q| (x - q).abs() > 0.5 * period);
            let (u, v) = self.px([x, p[1]]);
            let _ = write!(d, "{}{u:.2},{v:.2} ", if jump { "M" } else { "L" });
            prev = Some(x);
        }
        format!("<path d=\"{}\" {style}/>\n", d.trim_end())
    }
}

/// Arrowhead on the point nearest mid-frame, pointing along `(ψ_y, -ψ_x)`.
fn arrow(frame: &Frame, field: &dyn StreamFunction, pts: &[[f64; 2]]) -> Option<String> {
    let period = frame.x1 - frame.x0;
    let centre = frame.x0 + 0.5 * period;
    let wrap = |x: f64| frame.x0 + (x - frame.x0).rem_euclid(period);
    let mid = pts
        .iter()
        .map(|p| [wrap(p[0]), p[1]])
        .min_by(|a, b| (a[0] - centre).abs().total_cmp(&(b[0] - centre).abs()))?;
    let d = field.physical(mid[0], mid[1]);
    let (u, v) = (d.y, -d.x);
    let (a, b) = frame.px(mid);
    let (c, e) = frame.px([mid[0] + u, mid[1] + v]);
    let (dx, dy) = (c - a, e - b);
    let len = dx.hypot(dy);
    if !(len > 0.0) {
        return None;
    }
    let (tx, ty) = (dx / len, dy / len);
    let size = 6.0;
    let tip = (a + tx * size, b + ty * size);
    let left = (a - tx * size - ty * size * 0.6, b - ty * size + tx * size * 0.6);
    let right = (a - tx * size + ty * size * 0.6, b - ty * size - tx * size * 0.6);
    Some(format!(
        "<polygon points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"#1f4e79\"/>\n",
        tip.0, tip.1, left.0, left.1, right.0, right.1
    ))
}

pub fn render(pic: &FlowPicture) -> String {
    let profile = &pic.point.profile;
    let period = profile.period();
    let surface: Vec<[f64; 2]> = (0..=400)
        .map(|j| {
            let x = period * j as f64 / 400.0;
            [x, profile.eval(x)]
        })
        .collect();
    let top = surface.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame {
        x0: 0.0,
        x1: period,
        y0: -1.0,
        y1: top + 0.1,
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&frame.path(&[[0.0, -1.0], [period, -1.0]], "stroke=\"black\" stroke-width=\"2\" fill=\"none\""));
    for line in pic.layer.closed_streamlines.iter().chain(&pic.layer.open_streamlines) {
        svg.push_str(&frame.path(&line.points, "stroke=\"#1f4e79\" stroke-width=\"0.8\" fill=\"none\""));
        if let Some(a) = arrow(&frame, &pic.lower, &line.points) {
            svg.push_str(&a);
        }
    }
    let dashed = "stroke=\"#b03a2e\" stroke-width=\"1.2\" stroke-dasharray=\"6 4\" fill=\"none\"";
    for curve in [&pic.curves.y_zeta, &pic.curves.xi, &pic.curves.xi_bar] {
        if curve.len() > 1 {
            svg.push_str(&frame.path(curve, dashed));
        }
    }
    svg.push_str(&frame.path(&pic.layer.separatrix.points, "stroke=\"black\" stroke-width=\"3\" fill=\"none\""));
    svg.push_str(&frame.path(&surface, "stroke=\"#117a65\" stroke-width=\"2\" fill=\"none\""));
    for p in &pic.report.points {
        let (u, v) = frame.px([p.x, p.y]);
        let _ = writeln!(svg, "<circle cx=\"{u:.2}\" cy=\"{v:.2}\" r=\"3.5\" fill=\"black\"/>");
    }
    svg.push_str("</svg>\n");
    svg
}
