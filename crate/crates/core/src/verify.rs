//! Acceptance checks AC-1 .. AC-9, each against an oracle that does not
//! share code with the quantity under test where that is possible.
//!
//! Every check returns a [`Criterion`] with a pass flag, a one-line summary
//! and a JSON blob of the measured numbers.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::{
    a_k_value, branch_expansion, c_prime_zero_closed, d_prime_zero_closed, second_order_coefficients,
    upper_second_order_profiles, AkVariant, AsymptoticLowerField, AsymptoticUpperField,
};
use crate::continuation::{trace_branch_at, Branch, NewtonOptions, TraceOptions};
use crate::dispersion::{bifurcation_points, linear_vertical_profile, mu, symbol_scale};
use crate::elliptic::{GridSpec, PsiOperator};
use crate::error::Result;
use crate::flowfield::{
    critical_curves, find_stagnation_points, separatrix_and_layer, sign_patterns, y_zeta_at, SampleSpec,
    StreamFunction,
};
use crate::model::{BranchPoint, FluidParams, Layer, WaveProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    pub passed: bool,
    pub summary: String,
    pub details: Value,
}

impl Criterion {
    fn new(id: &str, passed: bool, summary: String, details: Value) -> Self {
        Criterion {
            id: id.to_string(),
            passed,
            summary,
            details,
        }
    }

    fn failed(id: &str, err: impl std::fmt::Display) -> Self {
        Criterion::new(id, false, format!("error: {err}"), Value::Null)
    }

    /// `AC-n PASS|FAIL summary`.
    pub fn line(&self) -> String {
        format!("{} {} {}", self.id, if self.passed { "PASS" } else { "FAIL" }, self.summary)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceOptions {
    /// Seed for the randomly drawn parameter sets and profiles.
    pub seed: u64,
    /// Newton tolerance on `sup |Ψ|` along the reference branch.
    pub branch_tol: f64,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        AcceptanceOptions {
            seed: 0x5eed_2a7e,
            branch_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub criteria: Vec<Criterion>,
    pub all_passed: bool,
}

/// The parameters of the reference branch `(k, i) = (1, 1)`.
pub fn reference_params() -> FluidParams {
    FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.0, 0.0).expect("valid reference parameters")
}

fn random_params(rng: &mut ChaCha8Rng) -> FluidParams {
    let rho = rng.gen_range(1.05..5.0);
    let rho_bar = rng.gen_range(0.05..0.95) * rho;
    let g = rng.gen_range(1.0..20.0);
    let sigma = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..2.0) };
    let omega = rng.gen_range(-3.0..3.0);
    let omega_bar = rng.gen_range(-5.0..5.0);
    FluidParams::new(rho, rho_bar, g, sigma, omega, omega_bar).expect("drawn parameters are valid")
}

/// AC-1: the closed-form roots annihilate the symbol.
pub fn ac1_symbol_roots(opts: &AcceptanceOptions) -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst: f64 = 0.0;
    let mut run = || -> Result<f64> {
        for _ in 0..20 {
            let p = random_params(&mut rng);
            for k in 1..=8u32 {
                let (l1, l2) = bifurcation_points(k, &p)?;
                for lam in [l1, l2] {
                    let rel = mu(k, lam, &p)?.abs() / symbol_scale(k as f64, lam, &p);
                    worst = worst.max(rel);
                }
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => Criterion::new(
            "AC-1",
            w < 1e-11,
            format!("max |mu_k(Lambda)|/scale = {w:.2e} over 20 sets, k = 1..8 (bound 1e-11)"),
            json!({ "max_relative": w }),
        ),
        Err(e) => Criterion::failed("AC-1", e),
    }
}

/// AC-2: finite-difference linearisation at the flat interface is the
/// multiplier `mu_pk` on `cos(pkx)`.
pub fn ac2_linearization(opts: &AcceptanceOptions) -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xa2);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut run = || -> Result<()> {
        // 256 Chebyshev rows cannot reach the default 1e-13 GMRES target
        let grid = GridSpec::new(256, 256)?.with_rtol(1e-11);
        for _ in 0..5 {
            let p = random_params(&mut rng);
            let k = rng.gen_range(1..=2u32);
            let lam = rng.gen_range(-4.0..4.0);
            let op = PsiOperator::new(p, k, grid)?;
            let flat = WaveProfile::zero(k, 4);
            for pm in 1..=4usize {
                let dir = WaveProfile::unit_mode(k, pm, 4)?;
                let d = op.frechet(lam, &flat, &dir)?;
                let got = d.coefficients[pm];
                let want = mu(pm as u32 * k, lam, &p)?;
                let rel = (got - want).abs() / want.abs().max(1e-3 * symbol_scale((pm as u32 * k) as f64, lam, &p));
                worst = worst.max(rel);
                rows.push(json!({ "k": k, "p": pm, "lambda": lam, "frechet": got, "mu": want, "rel": rel }));
            }
        }
        Ok(())
    };
    match run() {
        Ok(()) => Criterion::new(
            "AC-2",
            worst < 1e-5,
            format!("max relative mismatch {worst:.2e} on 256x256, p = 1..4, 5 sets (bound 1e-5)"),
            json!({ "max_relative": worst, "rows": rows }),
        ),
        Err(e) => Criterion::failed("AC-2", e),
    }
}

/// AC-3: the linear vertical profile solves its ODE; the boundary-value
/// solves reproduce the closed-form endpoint slopes.
pub fn ac3_vertical_profiles(_opts: &AcceptanceOptions) -> Criterion {
    let run = || -> Result<(f64, f64, f64, Vec<Value>)> {
        let mut ode: f64 = 0.0;
        let mut c_rel: f64 = 0.0;
        let mut d_rel: f64 = 0.0;
        let mut rows = Vec::new();
        for (k, lam, omb) in [(1u32, -2.7319631638, 0.0), (1, 1.3, 0.7), (2, -0.8, 2.0), (3, 2.2, -1.5)] {
            let w = linear_vertical_profile(k, lam, omb)?;
            let kf = k as f64;
            let n = 2048;
            let h = 1.0 / (n - 1) as f64;
            for j in 0..n {
                let y = j as f64 * h;
                let (v, _, d2) = w.eval3(y);
                let b = -2.0 * omb - (1.0 - y) * (omb * y + lam) * kf * kf;
                let scale = 1.0 + lam.abs() * kf * kf + omb.abs();
                ode = ode.max((d2 - kf * kf * v - b).abs() / scale);
            }
            let up = upper_second_order_profiles(k, lam, omb)?;
            let cc = c_prime_zero_closed(k, lam, omb);
            let dc = d_prime_zero_closed(k, lam, omb);
            let cr = (up.c_prime_zero - cc).abs() / cc.abs().max(1e-12);
            let dr = (up.d_prime_zero - dc).abs() / dc.abs().max(1e-12);
            c_rel = c_rel.max(cr);
            d_rel = d_rel.max(dr);
            rows.push(json!({
                "k": k, "Lambda": lam, "omega_bar": omb,
                "c_prime_bvp": up.c_prime_zero, "c_prime_closed": cc,
                "d_prime_bvp": up.d_prime_zero, "d_prime_closed": dc,
            }));
        }
        Ok((ode, c_rel, d_rel, rows))
    };
    match run() {
        Ok((ode, c, d, rows)) => Criterion::new(
            "AC-3",
            ode < 1e-9 && c < 1e-5 && d < 1e-5,
            format!("ODE residual {ode:.1e} (bound 1e-9); c'(0) rel {c:.1e}, d'(0) rel {d:.1e} (bound 1e-5)"),
            json!({ "ode_residual": ode, "c_prime_rel": c, "d_prime_rel": d, "rows": rows }),
        ),
        Err(e) => Criterion::failed("AC-3", e),
    }
}

/// Parameter sets for AC-4; `ρ̄ ≠ 1` so the two forms are distinguishable.
fn adjudication_sets() -> Vec<(FluidParams, u32, u8)> {
    let p = |a, b, s, o, ob| FluidParams::new(a, b, 9.8, s, o, ob).expect("valid");
    vec![
        (p(2.0, 0.5, 0.0, 1.0, 0.0), 1, 1),
        (p(3.0, 1.7, 0.0, 0.5, 1.0), 1, 2),
        (p(1.5, 0.8, 0.3, -1.0, 0.7), 2, 1),
        (p(2.5, 0.3, 0.0, 2.0, -0.5), 1, 1),
        (p(4.0, 2.5, 0.1, 0.8, 0.4), 1, 2),
    ]
}

/// AC-4: the second difference of `Ψ` along `cos(kx)` picks one form of `A_k`.
pub fn ac4_ak_adjudication(_opts: &AcceptanceOptions) -> Criterion {
    let run = || -> Result<(bool, Vec<Value>)> {
        let mut ok = true;
        let mut rows = Vec::new();
        for (p, k, i) in adjudication_sets() {
            let c = second_order_coefficients(k, i, &p, AkVariant::default())?;
            let op = PsiOperator::new(p, k, GridSpec::new(64, 40)?)?;
            let hess = op.directional_hessian(c.lambda, 1e-3, 4)?;
            let h2 = hess.coeffs[1];
            let printed = a_k_value(k, c.lambda, &p, AkVariant::AsPrinted);
            let weighted = a_k_value(k, c.lambda, &p, AkVariant::RhoBarWeighted);
            let rp = (h2 - printed).abs() / printed.abs();
            let rw = (h2 - weighted).abs() / weighted.abs();
            // exactly one match, and it is the shipped default
            ok &= rw < 0.01 && rp >= 0.01 && AkVariant::default() == AkVariant::RhoBarWeighted;
            rows.push(json!({
                "k": k, "i": i, "hessian_cos2k": h2, "as_printed": printed, "rho_bar_weighted": weighted,
                "rel_as_printed": rp, "rel_rho_bar_weighted": rw, "cos_k_component": hess.coeffs[0],
            }));
        }
        Ok((ok, rows))
    };
    match run() {
        Ok((ok, rows)) => Criterion::new(
            "AC-4",
            ok,
            "rho_bar_weighted matches the Hessian within 1% on 5 sets, as_printed does not; default pinned".into(),
            json!({ "default": AkVariant::default(), "rows": rows }),
        ),
        Err(e) => Criterion::failed("AC-4", e),
    }
}

/// Amplitudes of the reference branch: a geometric ladder over
/// `[1e-3, 5e-2]` that contains `0.01, 0.02, 0.04`.
pub fn reference_amplitudes() -> Vec<f64> {
    let mut s: Vec<f64> = vec![1e-3, 1.25e-3, 2.5e-3, 5e-3, 1e-2, 2e-2, 3e-2, 4e-2, 5e-2];
    s.sort_by(f64::total_cmp);
    s
}

/// Reference branch `(1, 1)` traced through [`reference_amplitudes`].
pub fn reference_branch(opts: &AcceptanceOptions) -> Result<Branch> {
    let options = TraceOptions {
        newton: NewtonOptions {
            tol: opts.branch_tol,
            ..NewtonOptions::default()
        },
        ..TraceOptions::default()
    };
    trace_branch_at(1, 1, &reference_params(), &reference_amplitudes(), &options)
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

fn sup_difference(a: &WaveProfile, b: &WaveProfile) -> f64 {
    (0..1024)
        .map(|j| {
            let x = a.period() * j as f64 / 1024.0;
            (a.eval(x) - b.eval(x)).abs()
        })
        .fold(0.0, f64::max)
}

/// AC-5: `λ(s) - Λ ~ s²`, `a_2/s² → α`, and the profile expansion error is `O(s³)`.
pub fn ac5_branch_asymptotics(branch: &Branch) -> Criterion {
    let c = &branch.coefficients;
    let pts: Vec<&BranchPoint> = branch.points.iter().filter(|p| p.s >= 1e-3 && p.s <= 5e-2 + 1e-15).collect();
    let run = || -> Result<Value> {
        let xs: Vec<f64> = pts.iter().map(|p| p.s.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|p| (p.lambda - c.lambda).abs().ln()).collect();
        let (slope, _, _) = least_squares(&xs, &ys);
        let smallest = pts.first().ok_or_else(|| crate::Error::invalid("empty branch"))?;
        let ratio_a2 = smallest.profile.harmonic(2) / (smallest.s * smallest.s);
        let a2_rel = (ratio_a2 - c.alpha_k).abs() / c.alpha_k.abs();
        let err = |s: f64| -> Result<f64> {
            let p = branch
                .point_at(s)
                .ok_or_else(|| crate::Error::invalid(format!("branch lacks s = {s}")))?;
            let e = branch_expansion(c, s, p.profile.harmonics())?;
            Ok(sup_difference(&p.profile, &e.profile))
        };
        let (e4, e2, e1) = (err(0.04)?, err(0.02)?, err(0.01)?);
        Ok(json!({
            "slope": slope,
            "a2_over_s2": ratio_a2,
            "alpha_k": c.alpha_k,
            "a2_rel": a2_rel,
            "profile_errors": [e1, e2, e4],
            "richardson": [e4 / e2, e2 / e1],
        }))
    };
    match run() {
        Ok(v) => {
            let slope = v["slope"].as_f64().unwrap_or(f64::NAN);
            let a2 = v["a2_rel"].as_f64().unwrap_or(f64::NAN);
            let r = v["richardson"][0].as_f64().unwrap_or(f64::NAN);
            let pass = (slope - 2.0).abs() <= 0.2 && a2 < 0.02 && (6.0..=10.0).contains(&r);
            Criterion::new(
                "AC-5",
                pass,
                format!("slope {slope:.4} (2 +- 0.2); a2/s^2 vs alpha rel {a2:.1e} (< 2%); Richardson {r:.3} ([6, 10])"),
                v,
            )
        }
        Err(e) => Criterion::failed("AC-5", e),
    }
}

fn field_difference(a: &dyn StreamFunction, b: &dyn StreamFunction, spec: &SampleSpec) -> f64 {
    let layer = a.layer();
    let xs = spec.x_nodes(a.profile().k());
    let ys = spec.y_nodes(layer);
    let mut worst: f64 = 0.0;
    for &x in &xs {
        let ca = a.transformed_column(x, &ys);
        let cb = b.transformed_column(x, &ys);
        for (u, v) in ca.iter().zip(&cb) {
            worst = worst.max((u.v - v.v).abs());
        }
    }
    worst
}

fn wall_defect(f: &dyn StreamFunction, top: f64, bottom: f64) -> f64 {
    let (a, b) = f.layer().interval();
    (0..64)
        .map(|i| {
            let x = f.profile().period() * i as f64 / 64.0;
            (f.transformed(x, a).v - bottom).abs().max((f.transformed(x, b).v - top).abs())
        })
        .fold(0.0, f64::max)
}

/// Parameters for the field comparison: the reference set with upper vorticity.
pub fn field_params() -> FluidParams {
    FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.0, 0.5).expect("valid")
}

/// AC-6: second-order fields against corrected elliptic solutions.
pub fn ac6_field_expansion(opts: &AcceptanceOptions) -> Criterion {
    let run = || -> Result<Value> {
        let p = field_params();
        let options = TraceOptions {
            newton: NewtonOptions {
                tol: opts.branch_tol,
                ..NewtonOptions::default()
            },
            ..TraceOptions::default()
        };
        let amps = [0.01, 0.02, 0.04];
        let branch = trace_branch_at(1, 1, &p, &amps, &options)?;
        let grid = options.newton.grid();
        let op = PsiOperator::new(p, 1, grid)?;
        let spec = SampleSpec::new(64, 33)?;
        let c = &branch.coefficients;
        let mut lower_err = Vec::new();
        let mut upper_err = Vec::new();
        let mut walls: f64 = 0.0;
        for &s in &amps {
            let pt = branch
                .point_at(s)
                .ok_or_else(|| crate::Error::invalid("missing branch point"))?;
            let lower = op.solve_lower(&pt.profile)?;
            let upper = op.solve_upper(pt.lambda, &pt.profile)?;
            let al = AsymptoticLowerField::new(c, &p, s)?;
            let au = AsymptoticUpperField::new(c, &p, s, pt.lambda)?;
            lower_err.push(field_difference(&lower, &al, &spec));
            upper_err.push(field_difference(&upper, &au, &spec));
            walls = walls
                .max(wall_defect(&lower, 0.0, p.omega / 2.0))
                .max(wall_defect(&al, 0.0, p.omega / 2.0))
                .max(wall_defect(&upper, pt.lambda + p.omega_bar / 2.0, 0.0))
                .max(wall_defect(&au, pt.lambda + p.omega_bar / 2.0, 0.0));
        }
        Ok(json!({
            "amplitudes": amps,
            "lower_errors": lower_err,
            "upper_errors": upper_err,
            "lower_richardson": [lower_err[2] / lower_err[1], lower_err[1] / lower_err[0]],
            "upper_richardson": [upper_err[2] / upper_err[1], upper_err[1] / upper_err[0]],
            "wall_defect": walls,
        }))
    };
    match run() {
        Ok(v) => {
            let rl = v["lower_richardson"][0].as_f64().unwrap_or(f64::NAN);
            let ru = v["upper_richardson"][0].as_f64().unwrap_or(f64::NAN);
            let walls = v["wall_defect"].as_f64().unwrap_or(f64::NAN);
            let pass = (6.0..=10.0).contains(&rl) && (6.0..=10.0).contains(&ru) && walls < 1e-13;
            Criterion::new(
                "AC-6",
                pass,
                format!("Richardson lower {rl:.3}, upper {ru:.3} ([6, 10]); wall defect {walls:.1e}"),
                v,
            )
        }
        Err(e) => Criterion::failed("AC-6", e),
    }
}

/// Topology measurements for one corrected branch point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyCheck {
    pub s: f64,
    pub count: usize,
    pub surface_mirror_defect: f64,
    pub center_offset: f64,
    pub zeta_offset: f64,
    pub y_zeta_increasing: bool,
    pub y_b_below: bool,
    pub xi_bar_end_defect: f64,
    pub separatrix_defect: f64,
    pub separatrix_psi: f64,
    pub area: f64,
    pub windings: Vec<f64>,
    pub closed: bool,
    pub open_span: bool,
    pub min_at_center: bool,
    pub sign_violations: usize,
    pub sign_checked: usize,
    pub upper_stagnation: usize,
    pub warnings: Vec<String>,
}

impl TopologyCheck {
    pub fn passed(&self) -> bool {
        self.count == 3
            && self.surface_mirror_defect < 1e-9
            && self.center_offset < 1e-9
            && self.y_zeta_increasing
            && self.y_b_below
            && self.xi_bar_end_defect < 1e-9
            && self.separatrix_defect < 1e-9
            && self.separatrix_psi < 1e-6
            && self.area > 0.0
            && self.closed
            && self.windings.iter().all(|w| (w.abs() - 1.0).abs() < 1e-6)
            && self.open_span
            && self.min_at_center
            && self.sign_violations == 0
            && self.upper_stagnation == 0
    }
}

/// Runs every topological check on the elliptic fields of `point`.
pub fn topology_check(point: &BranchPoint, params: &FluidParams, grid: GridSpec) -> Result<TopologyCheck> {
    let k = point.profile.k();
    let op = PsiOperator::new(*params, k, grid)?;
    let lower = op.solve_lower(&point.profile)?;
    let upper = op.solve_upper(point.lambda, &point.profile)?;
    let half = PI / k as f64;
    let period = 2.0 * half;
    let report = find_stagnation_points(&lower)?;
    let surf = report.surface_points();
    let surface_mirror_defect = if surf.len() == 2 {
        (surf[0].x + surf[1].x - period).abs().max((surf[0].y - surf[1].y).abs())
    } else {
        f64::INFINITY
    };
    let centers = report.centers();
    let center_offset = if centers.len() == 1 {
        (centers[0].x - half).abs()
    } else {
        f64::INFINITY
    };
    let zeta = report.zeta.unwrap_or(f64::NAN);
    let curves = critical_curves(&lower)?;
    let upto: Vec<&[f64; 2]> = curves.y_zeta.iter().filter(|p| p[0] <= half + 1e-12).collect();
    let y_zeta_increasing = upto.len() > 2 && upto.windows(2).all(|w| w[1][1] > w[0][1]);
    let y_zeta_at_zeta = y_zeta_at(&lower, zeta).unwrap_or(f64::NAN);
    let y_b_below = curves.y_b < y_zeta_at_zeta;
    let end = curves.xi_bar.last().copied().unwrap_or([f64::NAN; 2]);
    let xi_bar_end_defect = (end[0] - zeta).abs().max((end[1] - y_zeta_at_zeta).abs());
    let layer = separatrix_and_layer(&lower, &report)?;
    let sep = &layer.separatrix.points;
    // interior contour points against column bisection below y_ζ
    let inner = &sep[1..sep.len() - 1];
    let (lo, hi) = (inner[0][0], inner[inner.len() - 1][0]);
    let separatrix_defect = (sep[0][0] - zeta)
        .abs()
        .max((sep[sep.len() - 1][0] - (period - zeta)).abs())
        .max(if (lo - zeta).abs() < 2.0 * period / 512.0 && (hi - period + zeta).abs() < 2.0 * period / 512.0 {
            0.0
        } else {
            1.0
        });
    let psi_scale = lower.transformed(0.0, -1.0).v.abs().max(1e-300);
    let separatrix_psi = inner
        .iter()
        .map(|p| lower.physical(p[0], p[1]).v.abs())
        .fold(0.0, f64::max)
        / psi_scale;
    let windings = layer.windings.clone();
    let closed = layer.closed_streamlines.iter().all(|l| l.is_closed());
    let open_span = layer
        .open_streamlines
        .iter()
        .all(|l| l.end == crate::flowfield::StreamlineEnd::SpansPeriod);
    // min of ωψ over a dense grid versus the center value
    let omega_sign = params.omega.signum();
    let center_val = omega_sign * lower.physical(half, centers.first().map(|c| c.y).unwrap_or(0.0)).v;
    let spec = SampleSpec::new(256, 129)?;
    let mut grid_min = f64::INFINITY;
    for x in spec.x_nodes(k) {
        for d in lower.transformed_column(x, &spec.y_nodes(Layer::Lower)) {
            grid_min = grid_min.min(omega_sign * d.v);
        }
    }
    let min_at_center = grid_min >= center_val - 1e-12 * psi_scale;
    let signs = sign_patterns(&lower, Some(&upper), &curves, 512, 256, 1e-8)?;
    let upper_report = find_stagnation_points(&upper)?;
    let mut warnings = report.warnings.clone();
    warnings.extend(curves.warnings.iter().cloned());
    warnings.extend(layer.warnings.iter().cloned());
    Ok(TopologyCheck {
        s: point.s,
        count: report.count(),
        surface_mirror_defect,
        center_offset,
        zeta_offset: zeta - half / 2.0,
        y_zeta_increasing,
        y_b_below,
        xi_bar_end_defect,
        separatrix_defect,
        separatrix_psi,
        area: layer.area,
        windings,
        closed,
        open_span,
        min_at_center,
        sign_violations: signs.violations(),
        sign_checked: signs.checked,
        upper_stagnation: upper_report.count(),
        warnings,
    })
}

/// AC-7: streamline topology at `s = 0.01, 0.02, 0.04` on the reference branch.
pub fn ac7_topology(branch: &Branch) -> Criterion {
    let run = || -> Result<(bool, Vec<TopologyCheck>, [f64; 2])> {
        let grid = NewtonOptions::default().grid();
        let mut checks = Vec::new();
        for s in [0.01, 0.02, 0.04] {
            let pt = branch
                .point_at(s)
                .ok_or_else(|| crate::Error::invalid(format!("branch lacks s = {s}")))?;
            checks.push(topology_check(pt, &reference_params(), grid)?);
        }
        let ratios = [
            checks[2].zeta_offset / checks[1].zeta_offset,
            checks[1].zeta_offset / checks[0].zeta_offset,
        ];
        let halves = ratios.iter().all(|r| (r - 2.0).abs() < 0.2);
        let ok = halves && checks.iter().all(TopologyCheck::passed);
        Ok((ok, checks, ratios))
    };
    match run() {
        Ok((ok, checks, ratios)) => {
            let counts: Vec<usize> = checks.iter().map(|c| c.count).collect();
            let viol: usize = checks.iter().map(|c| c.sign_violations).sum();
            Criterion::new(
                "AC-7",
                ok,
                format!(
                    "stagnation counts {counts:?}; zeta offset ratios {:.3}, {:.3}; sign violations {viol}",
                    ratios[0], ratios[1]
                ),
                json!({ "checks": checks, "zeta_ratios": ratios }),
            )
        }
        Err(e) => Criterion::failed("AC-7", e),
    }
}

/// Geometric-decay fit of one profile: `(r, R²)` over harmonics above the
/// noise floor, or `None` with fewer than three of them.
pub fn decay_fit(profile: &WaveProfile, floor: f64) -> Option<(f64, f64, usize)> {
    let pts: Vec<(f64, f64)> = profile
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.abs() > floor)
        .map(|(j, a)| ((j + 1) as f64, a.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    // stop at the first gap: isolated noise above the floor is not signal
    let mut run = vec![pts[0]];
    for w in pts.windows(2) {
        if w[1].0 - w[0].0 > 1.0 {
            break;
        }
        run.push(w[1]);
    }
    if run.len() < 3 {
        return None;
    }
    let xs: Vec<f64> = run.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = run.iter().map(|p| p.1).collect();
    let (slope, _, r2) = least_squares(&xs, &ys);
    Some((slope.exp(), r2, run.len()))
}

/// AC-8: exponential decay of the profile coefficients along the branch.
pub fn ac8_analyticity(branch: &Branch) -> Criterion {
    let mut rows = Vec::new();
    let mut ok = true;
    let mut fitted = 0;
    for p in branch.points.iter().filter(|p| p.s > 0.0) {
        match decay_fit(&p.profile, 1e-13) {
            Some((r, r2, n)) => {
                fitted += 1;
                ok &= r < 0.9 && r2 > 0.99;
                rows.push(json!({ "s": p.s, "r": r, "r2": r2, "harmonics_fitted": n }));
            }
            None => rows.push(json!({ "s": p.s, "r": null, "note": "fewer than three harmonics above 1e-13" })),
        }
    }
    ok &= fitted > 0;
    let worst_r = rows.iter().filter_map(|r| r["r"].as_f64()).fold(0.0, f64::max);
    let worst_r2 = rows.iter().filter_map(|r| r["r2"].as_f64()).fold(1.0, f64::min);
    Criterion::new(
        "AC-8",
        ok,
        format!("{fitted} profiles fitted; max r {worst_r:.3} (< 0.9), min R^2 {worst_r2:.5} (> 0.99)"),
        json!({ "rows": rows }),
    )
}

/// AC-9: `Ψ` of random even mean-zero profiles is mean-zero, even and has
/// the period of the profile.
pub fn ac9_symmetry(opts: &AcceptanceOptions) -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xa9);
    let mut run = || -> Result<(f64, f64, f64)> {
        let mut mean: f64 = 0.0;
        let mut even: f64 = 0.0;
        let mut alias: f64 = 0.0;
        for _ in 0..6 {
            let p = random_params(&mut rng);
            let k = rng.gen_range(1..=3u32);
            let coeffs: Vec<f64> = (1..=6).map(|j| rng.gen_range(-0.08..0.08) / (j * j) as f64).collect();
            let profile = WaveProfile::new(k, coeffs)?;
            let lam = rng.gen_range(-3.0..3.0);
            let op = PsiOperator::new(p, k, GridSpec::new(64, 32)?)?;
            let out = op.psi(lam, &profile)?;
            let scale = out.max_abs().max(1e-300);
            mean = mean.max(out.mean().abs());
            even = even.max(out.evenness_defect() / scale);
            // the same profile written over wavenumber 1: Ψ must contain only
            // multiples of k
            let wide = PsiOperator::new(p, 1, GridSpec::new(64 * k.next_power_of_two() as usize, 32)?)?;
            let eval = wide.evaluate(lam, &profile.rebased(1)?)?;
            let h = eval.harmonics(32 * k as usize);
            for (j, c) in h.iter().enumerate() {
                if (j + 1) % k as usize != 0 {
                    alias = alias.max(c.abs() / scale);
                }
            }
        }
        Ok((mean, even, alias))
    };
    match run() {
        Ok((mean, even, alias)) => Criterion::new(
            "AC-9",
            mean < 1e-12 && even < 1e-12 && alias < 1e-10,
            format!("max |mean| {mean:.1e} (< 1e-12); evenness {even:.1e}; off-period content {alias:.1e}"),
            json!({ "mean": mean, "evenness": even, "off_period": alias }),
        ),
        Err(e) => Criterion::failed("AC-9", e),
    }
}

/// Runs all nine criteria. The reference branch is traced once and shared by
/// AC-5, AC-7 and AC-8.
pub fn run_acceptance(opts: &AcceptanceOptions) -> AcceptanceReport {
    let mut criteria = vec![
        ac1_symbol_roots(opts),
        ac2_linearization(opts),
        ac3_vertical_profiles(opts),
        ac4_ak_adjudication(opts),
    ];
    match reference_branch(opts) {
        Ok(branch) => {
            criteria.push(ac5_branch_asymptotics(&branch));
            criteria.push(ac6_field_expansion(opts));
            criteria.push(ac7_topology(&branch));
            criteria.push(ac8_analyticity(&branch));
        }
        Err(e) => {
            criteria.push(Criterion::failed("AC-5", &e));
            criteria.push(ac6_field_expansion(opts));
            criteria.push(Criterion::failed("AC-7", &e));
            criteria.push(Criterion::failed("AC-8", &e));
        }
    }
    criteria.push(ac9_symmetry(opts));
    let all_passed = criteria.iter().all(|c| c.passed);
    AcceptanceReport { criteria, all_passed }
}
