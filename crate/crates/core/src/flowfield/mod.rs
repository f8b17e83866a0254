//! Streamlines, stagnation points and the critical layer of a computed wave.
//!
//! Fields are evaluated in the straightened coordinates `(x, Y)` and pushed
//! forward to the physical domain through `y = Y + (1 ± Y) η(x)`.

mod contour;
mod streamline;
mod topology;

use serde::{Deserialize, Serialize};

pub use contour::{marching_squares, polygon_area, Polyline};
pub use streamline::{trace_streamline, winding_number, Streamline, StreamlineEnd};
pub use topology::{
    critical_curves, find_stagnation_points, separatrix_and_layer, sign_patterns, CriticalCurves, CriticalLayer,
    SignPatternReport, StagnationKind, StagnationPoint, StagnationReport, y_zeta_at,
};

use crate::elliptic::LayerField;
use crate::error::{Error, Result};
use crate::model::{Derivs, FieldGrid, Layer, WaveProfile};

/// A stream function on one layer, known in straightened coordinates.
pub trait StreamFunction {
    fn layer(&self) -> Layer;

    fn profile(&self) -> &WaveProfile;

    /// `w` and its derivatives at `(x, Y)`.
    fn transformed(&self, x: f64, yt: f64) -> Derivs;

    /// Derivatives at several `Y` on the same vertical line.
    fn transformed_column(&self, x: f64, yts: &[f64]) -> Vec<Derivs> {
        yts.iter().map(|&yt| self.transformed(x, yt)).collect()
    }

    /// Physical derivatives of `ψ` at the image of `(x, Y)`.
    fn physical_at(&self, x: f64, yt: f64) -> Derivs {
        to_physical(self.layer(), self.profile(), x, yt, self.transformed(x, yt))
    }

    /// Physical derivatives of `ψ` at `(x, y)`.
    fn physical(&self, x: f64, y: f64) -> Derivs {
        let yt = self.layer().to_transformed(y, self.profile().eval(x));
        self.physical_at(x, yt)
    }

    /// Whether the physical point lies in the closed layer domain.
    fn contains(&self, x: f64, y: f64) -> bool {
        let yt = self.layer().to_transformed(y, self.profile().eval(x));
        let (a, b) = self.layer().interval();
        yt >= a && yt <= b
    }
}

/// Chain rule from straightened to physical coordinates.
pub fn to_physical(layer: Layer, profile: &WaveProfile, x: f64, yt: f64, w: Derivs) -> Derivs {
    let s = layer.sign();
    let jet = profile.jet(x);
    let d = 1.0 + s * jet.eta;
    let p = 1.0 + s * yt;
    let y_y = 1.0 / d;
    let y_x = -jet.d1 * p / d;
    let y_xy = -s * jet.d1 / (d * d);
    let y_xx = -p * (jet.d2 * d - 2.0 * s * jet.d1 * jet.d1) / (d * d);
    Derivs {
        v: w.v,
        x: w.x + w.y * y_x,
        y: w.y * y_y,
        xx: w.xx + 2.0 * w.xy * y_x + w.yy * y_x * y_x + w.y * y_xx,
        xy: w.xy * y_y + w.yy * y_x * y_y + w.y * y_xy,
        yy: w.yy * y_y * y_y,
    }
}

impl StreamFunction for LayerField {
    fn layer(&self) -> Layer {
        self.layer
    }

    fn profile(&self) -> &WaveProfile {
        &self.profile
    }

    fn transformed(&self, x: f64, yt: f64) -> Derivs {
        self.derivs(x, yt)
    }

    fn transformed_column(&self, x: f64, yts: &[f64]) -> Vec<Derivs> {
        let col = self.column(x);
        yts.iter().map(|&yt| col.at(yt)).collect()
    }
}

/// Uniform sampling: `nx` nodes over one period (from `x = 0`) and `ny`
/// nodes spanning the layer's straightened interval, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub nx: usize,
    pub ny: usize,
}

impl SampleSpec {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || !nx.is_multiple_of(2) {
            return Err(Error::invalid(format!("nx must be even and positive, got {nx}")));
        }
        if ny < 2 {
            return Err(Error::invalid(format!("ny must be at least 2, got {ny}")));
        }
        Ok(SampleSpec { nx, ny })
    }

    pub fn x_nodes(&self, k: u32) -> Vec<f64> {
        let period = 2.0 * std::f64::consts::PI / k as f64;
        (0..self.nx).map(|i| period * i as f64 / self.nx as f64).collect()
    }

    pub fn y_nodes(&self, layer: Layer) -> Vec<f64> {
        crate::model::uniform_nodes(layer.interval(), self.ny)
    }
}

/// Samples `w` on the straightened rectangle, flagged for pushforward.
pub fn sample_field(field: &dyn StreamFunction, spec: &SampleSpec) -> Result<FieldGrid> {
    SampleSpec::new(spec.nx, spec.ny)?;
    let layer = field.layer();
    let k = field.profile().k();
    let x = spec.x_nodes(k);
    let y = spec.y_nodes(layer);
    let mut values = Vec::with_capacity(x.len() * y.len());
    for &xi in &x {
        values.extend(field.transformed_column(xi, &y).iter().map(|d| d.v));
    }
    Ok(FieldGrid {
        layer,
        k,
        x,
        y,
        values,
        pushforward: Some(field.profile().clone()),
    })
}

/// Relative velocity `(u - c, v) = (ψ_y, -ψ_x)` at the pushed-forward nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocitySamples {
    pub layer: Layer,
    pub nx: usize,
    pub ny: usize,
    /// Row-major in `(x, Y)`, like [`FieldGrid::values`].
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub psi: Vec<f64>,
    pub u_rel: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn velocity(field: &dyn StreamFunction, spec: &SampleSpec) -> Result<VelocitySamples> {
    SampleSpec::new(spec.nx, spec.ny)?;
    let layer = field.layer();
    let profile = field.profile();
    let xs = spec.x_nodes(profile.k());
    let yts = spec.y_nodes(layer);
    let n = xs.len() * yts.len();
    let mut out = VelocitySamples {
        layer,
        nx: xs.len(),
        ny: yts.len(),
        x: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
        psi: Vec::with_capacity(n),
        u_rel: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
    };
    for &x in &xs {
        let eta = profile.eval(x);
        let col = field.transformed_column(x, &yts);
        for (&yt, w) in yts.iter().zip(col) {
            let d = to_physical(layer, profile, x, yt, w);
            out.x.push(x);
            out.y.push(layer.to_physical(yt, eta));
            out.psi.push(d.v);
            out.u_rel.push(d.y);
            out.v.push(-d.x);
        }
    }
    Ok(out)
}

/// Centered-difference divergence of `(ψ_y, -ψ_x)` at a physical point.
pub fn divergence_defect(field: &dyn StreamFunction, x: f64, y: f64, h: f64) -> f64 {
    let u = |x: f64, y: f64| field.physical(x, y).y;
    let v = |x: f64, y: f64| -field.physical(x, y).x;
    (u(x + h, y) - u(x - h, y)) / (2.0 * h) + (v(x, y + h) - v(x, y - h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{second_order_coefficients, AkVariant, AsymptoticLowerField};
    use crate::elliptic::{solve_lower, solve_upper, GridSpec};
    use crate::model::FluidParams;

    #[test]
    fn laminar_velocities() {
        let p = FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.5, 0.5).unwrap();
        let flat = WaveProfile::zero(1, 2);
        let grid = GridSpec::new(16, 12).unwrap();
        let spec = SampleSpec::new(8, 5).unwrap();
        let lower = solve_lower(&flat, &p, &grid).unwrap();
        let vel = velocity(&lower, &spec).unwrap();
        for i in 0..vel.u_rel.len() {
            assert!((vel.u_rel[i] - 1.5 * vel.y[i]).abs() < 1e-12);
            assert!(vel.v[i].abs() < 1e-12);
        }
        let upper = solve_upper(-0.7, &flat, &p, &grid).unwrap();
        let vel = velocity(&upper, &spec).unwrap();
        for i in 0..vel.u_rel.len() {
            assert!((vel.u_rel[i] - (0.5 * vel.y[i] - 0.7)).abs() < 1e-12);
            assert!(vel.v[i].abs() < 1e-12);
        }
    }

    #[test]
    fn chain_rule_matches_differences() {
        let p = FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.0, 0.0).unwrap();
        let c = second_order_coefficients(1, 1, &p, AkVariant::default()).unwrap();
        let f = AsymptoticLowerField::new(&c, &p, 0.1).unwrap();
        let h = 1e-5;
        for (x, y) in [(0.4, -0.5), (2.0, -0.2), (4.5, -0.8)] {
            let d = f.physical(x, y);
            let v = |x: f64, y: f64| f.physical(x, y).v;
            let gx = |x: f64, y: f64| f.physical(x, y).x;
            assert!((d.x - (v(x + h, y) - v(x - h, y)) / (2.0 * h)).abs() < 1e-8);
            assert!((d.y - (v(x, y + h) - v(x, y - h)) / (2.0 * h)).abs() < 1e-8);
            assert!((d.xx - (gx(x + h, y) - gx(x - h, y)) / (2.0 * h)).abs() < 1e-7);
            assert!((d.xy - (gx(x, y + h) - gx(x, y - h)) / (2.0 * h)).abs() < 1e-7);
            let gy = |x: f64, y: f64| f.physical(x, y).y;
            assert!((d.yy - (gy(x, y + h) - gy(x, y - h)) / (2.0 * h)).abs() < 1e-7);
            assert!(divergence_defect(&f, x, y, 1e-4) < 1e-7);
        }
    }

    #[test]
    fn velocity_parity() {
        let p = FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.0, 0.0).unwrap();
        let prof = WaveProfile::new(1, vec![-0.05, 0.004]).unwrap();
        let lower = solve_lower(&prof, &p, &GridSpec::new(32, 20).unwrap()).unwrap();
        let spec = SampleSpec::new(16, 6).unwrap();
        let vel = velocity(&lower, &spec).unwrap();
        let ny = vel.ny;
        for i in 1..vel.nx {
            let m = vel.nx - i;
            for j in 0..ny {
                assert!((vel.u_rel[i * ny + j] - vel.u_rel[m * ny + j]).abs() < 1e-12);
                assert!((vel.v[i * ny + j] + vel.v[m * ny + j]).abs() < 1e-12);
            }
        }
        assert!(SampleSpec::new(7, 4).is_err());
    }
}
