//! Streamline integration in the wave frame.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::StreamFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamlineEnd {
    /// Came back to the seed.
    Closed,
    /// Travelled a full period horizontally without returning.
    SpansPeriod,
    /// Left the layer domain.
    ExitedDomain,
    /// Hit the length limit.
    MaxLength,
    /// The velocity vanished.
    Stagnated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Streamline {
    pub points: Vec<[f64; 2]>,
    pub end: StreamlineEnd,
    pub length: f64,
    /// `max |ψ - ψ(seed)|` along the path.
    pub psi_drift: f64,
    pub psi_level: f64,
}

impl Streamline {
    pub fn is_closed(&self) -> bool {
        self.end == StreamlineEnd::Closed
    }
}

/// Integrates `(ψ_y, -ψ_x)` from `seed` with arclength-normalised RK4 steps
/// of length `step`.
pub fn trace_streamline(field: &dyn StreamFunction, seed: [f64; 2], step: f64, max_len: f64) -> Result<Streamline> {
    if !(step > 0.0) || !(max_len > step) {
        return Err(Error::invalid("step must be positive and below max_len"));
    }
    if !field.contains(seed[0], seed[1]) {
        return Err(Error::invalid(format!(
            "seed ({}, {}) is outside the {} layer",
            seed[0],
            seed[1],
            field.layer().name()
        )));
    }
    let period = 2.0 * PI / field.profile().k() as f64;
    let direction = |p: [f64; 2]| -> Option<[f64; 2]> {
        if !field.contains(p[0], p[1]) {
            return None;
        }
        let d = field.physical(p[0], p[1]);
        let (u, v) = (d.y, -d.x);
        let speed = u.hypot(v);
        if speed < 1e-300 {
            return None;
        }
        Some([u / speed, v / speed])
    };
    let psi0 = field.physical(seed[0], seed[1]).v;
    let mut points = vec![seed];
    let mut p = seed;
    let mut length = 0.0;
    let mut drift: f64 = 0.0;
    let mut end = StreamlineEnd::MaxLength;
    while length < max_len {
        let stage = |p: [f64; 2], k: [f64; 2], h: f64| [p[0] + h * k[0], p[1] + h * k[1]];
        let Some(k1) = direction(p) else {
            end = StreamlineEnd::Stagnated;
            break;
        };
        let next = direction(stage(p, k1, 0.5 * step))
            .and_then(|k2| direction(stage(p, k2, 0.5 * step)).map(|k3| (k2, k3)))
            .and_then(|(k2, k3)| direction(stage(p, k3, step)).map(|k4| (k2, k3, k4)));
        let Some((k2, k3, k4)) = next else {
            end = StreamlineEnd::ExitedDomain;
            break;
        };
        let q = [
            p[0] + step / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            p[1] + step / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        if !field.contains(q[0], q[1]) {
            end = StreamlineEnd::ExitedDomain;
            break;
        }
        length += step;
        drift = drift.max((field.physical(q[0], q[1]).v - psi0).abs());
        points.push(q);
        p = q;
        // back at the seed after leaving its neighbourhood
        if length > 4.0 * step && (p[0] - seed[0]).hypot(p[1] - seed[1]) < 0.75 * step {
            end = StreamlineEnd::Closed;
            break;
        }
        if (p[0] - seed[0]).abs() >= period {
            end = StreamlineEnd::SpansPeriod;
            break;
        }
    }
    Ok(Streamline {
        points,
        end,
        length,
        psi_drift: drift,
        psi_level: psi0,
    })
}

/// Number of turns the closed polyline makes around `center`.
pub fn winding_number(points: &[[f64; 2]], center: [f64; 2]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let ta = (a[1] - center[1]).atan2(a[0] - center[0]);
        let tb = (b[1] - center[1]).atan2(b[0] - center[0]);
        let mut d = tb - ta;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        total += d;
    }
    total / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{solve_lower, GridSpec};
    use crate::model::{FluidParams, WaveProfile};

    #[test]
    fn laminar_streamline_is_horizontal() {
        let p = FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.0, 0.0).unwrap();
        let field = solve_lower(&WaveProfile::zero(1, 2), &p, &GridSpec::new(16, 12).unwrap()).unwrap();
        let line = trace_streamline(&field, [0.0, -0.5], 0.01, 10.0).unwrap();
        assert_eq!(line.end, StreamlineEnd::SpansPeriod);
        assert!(line.points.iter().all(|q| (q[1] + 0.5).abs() < 1e-12));
        assert!(line.psi_drift < 1e-12);
        assert!(trace_streamline(&field, [0.0, 0.5], 0.01, 10.0).is_err());
    }

    #[test]
    fn winding_of_square() {
        let sq = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
        assert!((winding_number(&sq, [0.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!(winding_number(&sq, [3.0, 0.0]).abs() < 1e-12);
    }
}
