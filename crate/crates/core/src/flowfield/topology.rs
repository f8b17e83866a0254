//! Stagnation points, critical curves and the critical layer.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::contour::{marching_squares, polygon_area, Polyline};
use super::streamline::{trace_streamline, winding_number, Streamline};
use super::StreamFunction;
use crate::error::{Error, Result};
use crate::model::Layer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StagnationKind {
    Surface,
    InteriorCenter,
    InteriorSaddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagnationPoint {
    pub x: f64,
    pub y: f64,
    pub kind: StagnationKind,
}

/// Sampled curve as `[x, y]` pairs.
pub type Curve = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagnationReport {
    pub layer: Layer,
    pub points: Vec<StagnationPoint>,
    /// Surface stagnation abscissa in `(0, π/k)`.
    pub zeta: Option<f64>,
    pub y_zeta_curve: Curve,
    pub xi_curve: Curve,
    pub xi_bar_curve: Curve,
    pub separatrix: Curve,
    pub critical_layer_area: f64,
    pub warnings: Vec<String>,
}

impl StagnationReport {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn surface_points(&self) -> Vec<StagnationPoint> {
        self.points
            .iter()
            .copied()
            .filter(|p| p.kind == StagnationKind::Surface)
            .collect()
    }

    pub fn centers(&self) -> Vec<StagnationPoint> {
        self.points
            .iter()
            .copied()
            .filter(|p| p.kind == StagnationKind::InteriorCenter)
            .collect()
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// All sign changes of `f` on a uniform scan of `[a, b]` with `n` intervals,
/// refined by bisection.
fn roots(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    let mut out = Vec::new();
    let mut prev = f(a);
    if prev == 0.0 {
        out.push(a);
    }
    for i in 1..=n {
        let x = a + h * i as f64;
        let v = f(x);
        if v == 0.0 {
            out.push(x);
        } else if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            out.push(bisect(&f, x - h, x));
        }
        prev = v;
    }
    out
}

fn half_period(field: &dyn StreamFunction) -> f64 {
    PI / field.profile().k() as f64
}

/// The interface sits at `Y = 0` in both layers.
fn surface_y(_field: &dyn StreamFunction) -> f64 {
    0.0
}

/// Zeros of `ψ_y` along the interface over one period.
fn surface_roots(field: &dyn StreamFunction) -> Vec<f64> {
    let period = 2.0 * half_period(field);
    let y0 = surface_y(field);
    roots(|x| field.transformed(x, y0).y, 0.0, period, 2048)
        .into_iter()
        .filter(|x| *x < period - 1e-12)
        .collect()
}

fn classify(field: &dyn StreamFunction, x: f64, y: f64) -> StagnationKind {
    let d = field.physical(x, y);
    if d.xx * d.yy - d.xy * d.xy > 0.0 {
        StagnationKind::InteriorCenter
    } else {
        StagnationKind::InteriorSaddle
    }
}

fn newton_gradient(field: &dyn StreamFunction, mut x: f64, mut y: f64) -> Option<(f64, f64)> {
    for _ in 0..60 {
        if !field.contains(x, y) {
            return None;
        }
        let d = field.physical(x, y);
        let det = d.xx * d.yy - d.xy * d.xy;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = (d.yy * d.x - d.xy * d.y) / det;
        let dy = (-d.xy * d.x + d.xx * d.y) / det;
        x -= dx;
        y -= dy;
        if dx.hypot(dy) < 1e-14 {
            return field.contains(x, y).then_some((x, y));
        }
    }
    None
}

/// Stagnation points of one period, found by scanning `ψ_y` along the
/// interface, along the symmetry lines `x = 0, π/k` (where `ψ_x = 0`), and a
/// two-dimensional sign-change scan refined by Newton's method.
pub fn find_stagnation_points(field: &dyn StreamFunction) -> Result<StagnationReport> {
    let profile = field.profile();
    if profile.is_flat() {
        return Err(Error::DegenerateInput(
            "flat interface: every interface point is stagnant".into(),
        ));
    }
    let layer = field.layer();
    let (a, b) = layer.interval();
    let half = half_period(field);
    let period = 2.0 * half;
    const SCAN_NY: usize = 256;
    let cell = (b - a) / SCAN_NY as f64;
    let mut found: Vec<StagnationPoint> = Vec::new();
    let push = |p: StagnationPoint, found: &mut Vec<StagnationPoint>| {
        let dup = found
            .iter_mut()
            .find(|q| (q.x - p.x).hypot(q.y - p.y) < 1e-7 || ((q.x - p.x).abs() - period).abs() < 1e-7 && (q.y - p.y).abs() < 1e-7);
        match dup {
            Some(q) => {
                if p.kind == StagnationKind::Surface {
                    q.kind = StagnationKind::Surface;
                }
            }
            None => found.push(p),
        }
    };
    for x in surface_roots(field) {
        let p = StagnationPoint {
            x,
            y: profile.eval(x),
            kind: StagnationKind::Surface,
        };
        push(p, &mut found);
    }
    let y0 = surface_y(field);
    let classify_point = |x: f64, yt: f64| {
        let y = layer.to_physical(yt, profile.eval(x));
        let kind = if yt.abs() < 0.5 * cell {
            StagnationKind::Surface
        } else {
            classify(field, x, y)
        };
        StagnationPoint { x, y, kind }
    };
    // symmetry lines
    for x in [0.0, half] {
        let (lo, hi) = if layer == Layer::Lower { (a, y0) } else { (y0, b) };
        let inner = |yt: f64| field.transformed(x, yt).y;
        for yt in roots(inner, lo + 1e-9, hi - 1e-9, 2 * SCAN_NY) {
            push(classify_point(x, yt), &mut found);
        }
    }
    // off-axis scan in (0, π/k), mirrored
    const SCAN_NX: usize = 256;
    let xs: Vec<f64> = (1..SCAN_NX).map(|i| half * i as f64 / SCAN_NX as f64).collect();
    let yts: Vec<f64> = (1..SCAN_NY).map(|j| a + cell * j as f64).collect();
    let mut grad = Vec::with_capacity(xs.len());
    for &x in &xs {
        let col = field.transformed_column(x, &yts);
        grad.push(
            yts.iter()
                .zip(col)
                .map(|(&yt, w)| {
                    let d = super::to_physical(layer, profile, x, yt, w);
                    (d.x, d.y)
                })
                .collect::<Vec<_>>(),
        );
    }
    let changes = |v: [f64; 4]| {
        let pos = v.iter().filter(|t| **t > 0.0).count();
        pos > 0 && pos < 4
    };
    for i in 0..xs.len() - 1 {
        for j in 0..yts.len() - 1 {
            let g = [grad[i][j], grad[i + 1][j], grad[i][j + 1], grad[i + 1][j + 1]];
            if changes(g.map(|t| t.0)) && changes(g.map(|t| t.1)) {
                let xc = 0.5 * (xs[i] + xs[i + 1]);
                let ytc = 0.5 * (yts[j] + yts[j + 1]);
                let yc = layer.to_physical(ytc, profile.eval(xc));
                if let Some((x, y)) = newton_gradient(field, xc, yc) {
                    let x = x.rem_euclid(period);
                    let yt = layer.to_transformed(y, profile.eval(x));
                    let on_axis = x.abs() < 1e-9 || (x - half).abs() < 1e-9 || (x - period).abs() < 1e-9;
                    let p = classify_point(x, yt);
                    push(p, &mut found);
                    if !on_axis {
                        push(StagnationPoint { x: period - x, ..p }, &mut found);
                    }
                }
            }
        }
    }
    found.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)));
    let zeta = found
        .iter()
        .filter(|p| p.kind == StagnationKind::Surface && p.x > 0.0 && p.x < half)
        .map(|p| p.x)
        .next();
    let mut warnings = Vec::new();
    if layer == Layer::Lower && found.len() != 3 {
        warnings.push(format!("unexpected topology: {} stagnation points per period", found.len()));
    }
    Ok(StagnationReport {
        layer,
        points: found,
        zeta,
        y_zeta_curve: Vec::new(),
        xi_curve: Vec::new(),
        xi_bar_curve: Vec::new(),
        separatrix: Vec::new(),
        critical_layer_area: 0.0,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCurves {
    pub zeta: f64,
    /// `ψ_y(x, y_ζ(x)) = 0` for `x ∈ [ζ, 2π/k - ζ]`.
    pub y_zeta: Curve,
    /// `ψ_xy(ξ(y), y) = 0`, `x ∈ (0, π/k)`, up to where it meets the interface.
    pub xi: Curve,
    /// `ψ_x(ξ̄(y), y) = 0`, `x ∈ (0, π/k)`, up to the surface stagnation point.
    pub xi_bar: Curve,
    /// Height where `ξ` meets the interface.
    pub y_b: f64,
    /// Height where `ξ̄` meets the interface, `η(ζ)`.
    pub y_bar_b: f64,
    pub warnings: Vec<String>,
}

/// Physical `y` where `ψ_y` vanishes on the vertical line through `x`, for
/// lower-layer fields.
pub fn y_zeta_at(field: &dyn StreamFunction, x: f64) -> Option<f64> {
    let profile = field.profile();
    let eta = profile.eval(x);
    let f = |yt: f64| field.transformed(x, yt).y;
    let top = f(0.0);
    if top.abs() < 1e-13 {
        return Some(eta);
    }
    let bottom = f(-1.0);
    if (top > 0.0) == (bottom > 0.0) {
        return None;
    }
    let yt = bisect(f, -1.0, 0.0);
    Some(Layer::Lower.to_physical(yt, eta))
}

/// Abscissa in `(0, π/k)` of the interface point `x` with `η(x) = y`
/// (`η` is increasing there for the waves considered).
fn surface_abscissa(field: &dyn StreamFunction, y: f64) -> f64 {
    let profile = field.profile();
    let half = half_period(field);
    if y <= profile.eval(0.0) {
        return 0.0;
    }
    if y >= profile.eval(half) {
        return half;
    }
    bisect(|x| profile.eval(x) - y, 0.0, half)
}

/// Root of `g(x, y)` along the row `y`, inside the lower domain and
/// `(0, π/k)`, closest to `π/(2k)`.
fn row_root(field: &dyn StreamFunction, y: f64, g: &dyn Fn(f64, f64) -> f64) -> Option<f64> {
    let half = half_period(field);
    let lo = surface_abscissa(field, y).max(half * 1e-6) + 1e-12;
    let hi = half * (1.0 - 1e-6);
    if hi <= lo {
        return None;
    }
    let target = 0.5 * half;
    roots(|x| g(x, y), lo, hi, 400)
        .into_iter()
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
}

pub fn critical_curves(field: &dyn StreamFunction) -> Result<CriticalCurves> {
    if field.layer() != Layer::Lower {
        return Err(Error::invalid("critical curves are defined for the lower layer"));
    }
    let profile = field.profile();
    if profile.is_flat() {
        return Err(Error::DegenerateInput("flat interface".into()));
    }
    let half = half_period(field);
    let period = 2.0 * half;
    let mut warnings = Vec::new();
    let zeta = surface_roots(field)
        .into_iter()
        .filter(|x| *x > 0.0 && *x < half)
        .min_by(|a, b| (a - 0.5 * half).abs().total_cmp(&(b - 0.5 * half).abs()))
        .ok_or_else(|| Error::DegenerateInput("no surface stagnation point in (0, π/k)".into()))?;
    const COLUMNS: usize = 256;
    let mut y_zeta = Vec::with_capacity(COLUMNS + 1);
    for i in 0..=COLUMNS {
        let x = zeta + (period - 2.0 * zeta) * i as f64 / COLUMNS as f64;
        match y_zeta_at(field, x) {
            Some(y) => y_zeta.push([x, y]),
            None => warnings.push(format!("no zero of psi_y on column x = {x}")),
        }
    }
    let psi_x = |x: f64, y: f64| field.physical(x, y).x;
    let psi_xy = |x: f64, y: f64| field.physical(x, y).xy;
    // ξ meets the interface where ψ_xy(x, η(x)) = 0
    let along = |x: f64| field.physical_at(x, 0.0).xy;
    let x_b = roots(along, half * 1e-3, half * (1.0 - 1e-3), 800)
        .into_iter()
        .min_by(|a, b| (a - 0.5 * half).abs().total_cmp(&(b - 0.5 * half).abs()));
    let y_b = match x_b {
        Some(x) => profile.eval(x),
        None => {
            warnings.push("xi curve does not reach the interface".into());
            f64::NAN
        }
    };
    let y_bar_b = profile.eval(zeta);
    const ROWS: usize = 200;
    let bottom = -1.0 + 1e-6;
    let mut xi = Vec::new();
    let top = if y_b.is_finite() { y_b } else { profile.eval(half) };
    for j in 0..ROWS {
        let y = bottom + (top - bottom) * j as f64 / ROWS as f64;
        if let Some(x) = row_root(field, y, &psi_xy) {
            xi.push([x, y]);
        }
    }
    if let Some(x) = x_b {
        xi.push([x, y_b]);
    }
    let mut xi_bar = Vec::new();
    for j in 0..ROWS {
        let y = bottom + (y_bar_b - bottom) * j as f64 / ROWS as f64;
        if let Some(x) = row_root(field, y, &psi_x) {
            xi_bar.push([x, y]);
        }
    }
    xi_bar.push([zeta, y_bar_b]);
    Ok(CriticalCurves {
        zeta,
        y_zeta,
        xi,
        xi_bar,
        y_b,
        y_bar_b,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalLayer {
    /// From `(ζ, η(ζ))` to `(2π/k - ζ, η)`, below the interface.
    pub separatrix: Polyline,
    /// Separatrix followed by the interface back to the start.
    pub polygon: Vec<[f64; 2]>,
    pub area: f64,
    pub center: [f64; 2],
    /// Depth of the separatrix under the center.
    pub separatrix_bottom: f64,
    pub closed_streamlines: Vec<Streamline>,
    pub open_streamlines: Vec<Streamline>,
    /// Winding numbers of `closed_streamlines` around the center.
    pub windings: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Contour grid used for the separatrix.
const CONTOUR_NX: usize = 512;
const CONTOUR_NY: usize = 256;

/// The zero level set below the interface, the enclosed critical layer and
/// sample streamlines inside and outside it.
pub fn separatrix_and_layer(field: &dyn StreamFunction, report: &StagnationReport) -> Result<CriticalLayer> {
    if field.layer() != Layer::Lower {
        return Err(Error::invalid("the critical layer is computed for the lower layer"));
    }
    let profile = field.profile();
    let half = half_period(field);
    let period = 2.0 * half;
    let mut warnings = Vec::new();
    let zeta = report
        .zeta
        .ok_or_else(|| Error::DegenerateInput("no surface stagnation point".into()))?;
    let center = report
        .centers()
        .into_iter()
        .find(|p| (p.x - half).abs() < 1e-6)
        .ok_or_else(|| Error::DegenerateInput("no center under the crest".into()))?;
    let xs: Vec<f64> = (0..=CONTOUR_NX).map(|i| period * i as f64 / CONTOUR_NX as f64).collect();
    let yts: Vec<f64> = (0..=CONTOUR_NY).map(|j| -1.0 + j as f64 / CONTOUR_NY as f64).collect();
    let mut values = Vec::with_capacity(xs.len() * yts.len());
    for &x in &xs {
        let col = field.transformed_column(x, &yts);
        // w vanishes on the interface too; w / Y removes that factor and its
        // limit w_Y at Y = 0 vanishes only at the surface stagnation points
        values.extend(yts.iter().zip(col).map(|(&yt, d)| if yt < 0.0 { d.v / yt } else { d.y }));
    }
    let lines = marching_squares(&xs, &yts, &values, 0.0, |_, _| false);
    let to_phys = |p: [f64; 2]| [p[0], Layer::Lower.to_physical(p[1], profile.eval(p[0]))];
    let best = lines
        .into_iter()
        .filter(|l| !l.closed)
        .max_by(|a, b| a.length().total_cmp(&b.length()));
    let Some(mut line) = best else {
        return Err(Error::DegenerateInput("no zero level set below the interface".into()));
    };
    line.points = line.points.into_iter().map(to_phys).collect();
    if line.points.first().map(|p| p[0]) > line.points.last().map(|p| p[0]) {
        line.points.reverse();
    }
    let (lo, hi) = line.x_range();
    let tol = 2.0 * period / CONTOUR_NX as f64;
    if (lo - zeta).abs() > tol || (hi - (period - zeta)).abs() > tol {
        warnings.push(format!(
            "separatrix spans [{lo}, {hi}], expected [{zeta}, {}]",
            period - zeta
        ));
    }
    let mut pts = vec![[zeta, profile.eval(zeta)]];
    pts.extend(line.points.iter().copied());
    pts.push([period - zeta, profile.eval(period - zeta)]);
    let separatrix = Polyline {
        points: pts.clone(),
        closed: false,
    };
    let mut polygon = pts;
    const SURFACE: usize = 512;
    for i in 1..SURFACE {
        let x = (period - zeta) - (period - 2.0 * zeta) * i as f64 / SURFACE as f64;
        polygon.push([x, profile.eval(x)]);
    }
    let area = polygon_area(&polygon);
    // separatrix depth under the crest: second zero of ψ below the center
    let psi_col = |y: f64| field.physical(half, y).v;
    let separatrix_bottom = bisect(psi_col, -1.0 + 1e-9, center.y);
    // streamlines on evenly spaced levels between the center and the separatrix
    let psi_c = field.physical(half, center.y).v;
    let height = center.y - separatrix_bottom;
    let step = (height / 50.0).max(1e-5);
    let max_len = 4.0 * period;
    let mut closed_streamlines = Vec::new();
    let mut windings = Vec::new();
    let mut seeds = vec![0.5 * (center.y + separatrix_bottom)];
    for frac in [0.25, 0.75] {
        let level = psi_c * (1.0 - frac);
        seeds.push(bisect(|y| psi_col(y) - level, separatrix_bottom, center.y));
    }
    for y in seeds {
        let line = trace_streamline(field, [half, y], step, max_len)?;
        windings.push(winding_number(&line.points, [center.x, center.y]));
        if !line.is_closed() {
            warnings.push(format!("streamline seeded at y = {y} inside the layer did not close"));
        }
        closed_streamlines.push(line);
    }
    let mut open_streamlines = Vec::new();
    for frac in [0.3, 0.7] {
        let y = -1.0 + frac * (separatrix_bottom + 1.0);
        let line = trace_streamline(field, [half, y], (1.0_f64 / 400.0).min(step * 4.0), 2.0 * period)?;
        open_streamlines.push(line);
    }
    Ok(CriticalLayer {
        separatrix,
        polygon,
        area,
        center: [center.x, center.y],
        separatrix_bottom,
        closed_streamlines,
        open_streamlines,
        windings,
        warnings,
    })
}

/// Outcome of grid-sampled sign checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPatternReport {
    pub checked: usize,
    pub skipped: usize,
    /// Violations of the `ψ_y` pattern around `y_ζ` (lower layer).
    pub psi_y_violations: usize,
    /// Violations of the `ψ_x` pattern around `ξ̄` (lower layer).
    pub psi_x_violations: usize,
    /// Upper layer: `ψ̄_y` of one strict sign and `ψ̄_x` of the opposite sign
    /// on `(0, π/k)`.
    pub upper_violations: usize,
}

impl SignPatternReport {
    pub fn violations(&self) -> usize {
        self.psi_y_violations + self.psi_x_violations + self.upper_violations
    }
}

/// Checks the sign structure of the velocity on an `nx × ny` grid of
/// physical points; values smaller than `margin` are not judged.
pub fn sign_patterns(
    lower: &dyn StreamFunction,
    upper: Option<&dyn StreamFunction>,
    curves: &CriticalCurves,
    nx: usize,
    ny: usize,
    margin: f64,
) -> Result<SignPatternReport> {
    if lower.layer() != Layer::Lower {
        return Err(Error::invalid("first field must be the lower layer"));
    }
    let profile = lower.profile();
    let half = half_period(lower);
    let period = 2.0 * half;
    let omega_sign = lower.transformed(0.0, -1.0).yy.signum();
    let zeta = curves.zeta;
    let mut report = SignPatternReport {
        checked: 0,
        skipped: 0,
        psi_y_violations: 0,
        psi_x_violations: 0,
        upper_violations: 0,
    };
    let top = profile.eval(half);
    let rows: Vec<f64> = (0..ny).map(|j| -1.0 + (top + 1.0) * (j as f64 + 0.5) / ny as f64).collect();
    // ξ̄ on every sampled row below ȳ_b
    let psi_x = |x: f64, y: f64| lower.physical(x, y).x;
    let xi_bar: Vec<Option<f64>> = rows
        .iter()
        .map(|&y| if y < curves.y_bar_b { row_root(lower, y, &psi_x) } else { None })
        .collect();
    for i in 0..nx {
        let x = period * (i as f64 + 0.5) / nx as f64;
        let eta = profile.eval(x);
        let inside: Vec<(usize, f64)> = rows
            .iter()
            .enumerate()
            .filter(|(_, &y)| y < eta)
            .map(|(j, &y)| (j, Layer::Lower.to_transformed(y, eta)))
            .collect();
        let yts: Vec<f64> = inside.iter().map(|t| t.1).collect();
        let col = lower.transformed_column(x, &yts);
        let in_band = x > zeta && x < period - zeta;
        let y_z = if in_band { y_zeta_at(lower, x) } else { None };
        // mirror abscissa into (0, π/k) for the ψ_x pattern
        let (xm, flip) = if x <= half { (x, 1.0) } else { (period - x, -1.0) };
        for ((j, yt), w) in inside.iter().zip(col) {
            let y = rows[*j];
            let d = super::to_physical(Layer::Lower, profile, x, *yt, w);
            let uy = omega_sign * d.y;
            if uy.abs() <= margin {
                report.skipped += 1;
            } else {
                report.checked += 1;
                let expect_positive = matches!(y_z, Some(yz) if y > yz);
                if (uy > 0.0) != expect_positive {
                    report.psi_y_violations += 1;
                }
            }
            if let Some(xb) = xi_bar[*j] {
                let ux = omega_sign * d.x * flip;
                if ux.abs() <= margin {
                    report.skipped += 1;
                } else {
                    report.checked += 1;
                    let expect_positive = xm < xb;
                    if (ux > 0.0) != expect_positive {
                        report.psi_x_violations += 1;
                    }
                }
            }
        }
    }
    if let Some(up) = upper {
        if up.layer() != Layer::Upper {
            return Err(Error::invalid("second field must be the upper layer"));
        }
        let sign_y = up.transformed(0.0, 0.5).y.signum();
        let yts: Vec<f64> = (0..ny).map(|j| (j as f64 + 0.5) / ny as f64).collect();
        for i in 0..nx {
            let x = period * (i as f64 + 0.5) / nx as f64;
            let col = up.transformed_column(x, &yts);
            for (yt, w) in yts.iter().zip(col) {
                let d = super::to_physical(Layer::Upper, up.profile(), x, *yt, w);
                report.checked += 1;
                if d.y * sign_y <= margin {
                    report.upper_violations += 1;
                }
                let expect = if x < half { -sign_y } else { sign_y };
                if d.x.abs() <= margin {
                    report.skipped += 1;
                } else {
                    report.checked += 1;
                    if d.x.signum() != expect {
                        report.upper_violations += 1;
                    }
                }
            }
        }
    }
    Ok(report)
}
