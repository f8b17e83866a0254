//! Coefficients of the Laplacian pulled back to the fixed layer rectangles.
//!
//! With `P = 1 + sY`, `D = 1 + sη` (`s = +1` lower, `-1` upper) the map
//! `y = Y + P η(x)` turns `Δψ` into
//! `w_xx + c_xy w_xY + c_yy w_YY + c_y w_Y` with
//! `c_xy = -2Pη'/D`, `c_yy = (P²η'² + 1)/D²`, `c_y = -P(Dη'' - 2sη'²)/D²`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{Layer, SurfaceJet, WaveProfile};

/// Variable coefficients at one point (the `w_xx` coefficient is always 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub xy: f64,
    pub yy: f64,
    pub y: f64,
}

pub fn coefficients_at(layer: Layer, jet: SurfaceJet, yt: f64) -> Coefficients {
    let s = layer.sign();
    let p = 1.0 + s * yt;
    let d = 1.0 + s * jet.eta;
    Coefficients {
        xy: -2.0 * p * jet.d1 / d,
        yy: (p * p * jet.d1 * jet.d1 + 1.0) / (d * d),
        y: -p * (d * jet.d2 - 2.0 * s * jet.d1 * jet.d1) / (d * d),
    }
}

/// The transformed operator sampled on a grid of `x` and `Y` nodes. Matrices
/// are indexed `(x node, Y node)`.
#[derive(Debug, Clone)]
pub struct TransformedOperator {
    pub layer: Layer,
    pub profile: WaveProfile,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub xy: DMatrix<f64>,
    pub yy: DMatrix<f64>,
    pub dy: DMatrix<f64>,
}

impl TransformedOperator {
    pub fn assemble(layer: Layer, profile: &WaveProfile, x: &[f64], y: &[f64]) -> Result<Self> {
        let jets: Vec<SurfaceJet> = x.iter().map(|&xi| profile.jet(xi)).collect();
        if let Some(j) = jets.iter().find(|j| j.eta.abs() >= 1.0 || !j.eta.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "profile value {} leaves the strip |eta| < 1",
                j.eta
            )));
        }
        let mut xy = DMatrix::zeros(x.len(), y.len());
        let mut yy = DMatrix::zeros(x.len(), y.len());
        let mut dy = DMatrix::zeros(x.len(), y.len());
        for (i, jet) in jets.iter().enumerate() {
            for (j, &yt) in y.iter().enumerate() {
                let c = coefficients_at(layer, *jet, yt);
                xy[(i, j)] = c.xy;
                yy[(i, j)] = c.yy;
                dy[(i, j)] = c.y;
            }
        }
        Ok(TransformedOperator {
            layer,
            profile: profile.clone(),
            x: x.to_vec(),
            y: y.to_vec(),
            xy,
            yy,
            dy,
        })
    }

    /// True when the operator is the plain Laplacian.
    pub fn is_laplacian(&self) -> bool {
        self.xy.iter().all(|v| *v == 0.0)
            && self.yy.iter().all(|v| *v == 1.0)
            && self.dy.iter().all(|v| *v == 0.0)
    }
}
