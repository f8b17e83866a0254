//! Linear theory at the flat interface: the multiplier symbol of the
//! linearised operator, its roots, kernel simplicity and the linearised
//! upper stream function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClosedForm, FluidParams, VerticalDomain, VerticalProfile};

/// `m / tanh(m)` for `m > 0`, without forming `cosh`/`sinh` (no overflow for
/// large `m`). Tends to 1 as `m -> 0`.
pub fn k_coth(m: f64) -> f64 {
    if m == 0.0 {
        return 1.0;
    }
    let e = (-2.0 * m.abs()).exp();
    // coth m = 1 + 2 e^{-2m} / (1 - e^{-2m})
    m.abs() * (1.0 + 2.0 * e / -(-2.0 * m.abs()).exp_m1())
}

/// `sinh(a) / sinh(b)` for `0 <= a <= b`, stable for large arguments.
pub(crate) fn sinh_ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 1.0;
    }
    if b < 20.0 {
        return a.sinh() / b.sinh();
    }
    (a - b).exp() * (-(-2.0 * a).exp_m1()) / (-(-2.0 * b).exp_m1())
}

/// `cosh(a) / sinh(b)` for `0 <= a <= b`, `b > 0`.
pub(crate) fn cosh_sinh_ratio(a: f64, b: f64) -> f64 {
    if b < 20.0 {
        return a.cosh() / b.sinh();
    }
    (a - b).exp() * (1.0 + (-2.0 * a).exp()) / (-(-2.0 * b).exp_m1())
}

/// Coefficients `(c0, c1, c2)` with `mu_m(λ) = c0 + c1 λ + c2 λ²` at real
/// wavenumber `m`.
pub fn symbol_coefficients(m: f64, params: &FluidParams) -> (f64, f64, f64) {
    let c0 = 2.0 * (params.g * (params.rho_bar - params.rho) - params.sigma * m * m);
    let c1 = 2.0 * params.omega_bar * params.rho_bar;
    let c2 = 2.0 * params.rho_bar * k_coth(m);
    (c0, c1, c2)
}

pub(crate) fn mu_real(m: f64, lambda: f64, params: &FluidParams) -> f64 {
    let (c0, c1, c2) = symbol_coefficients(m, params);
    c0 + lambda * (c1 + lambda * c2)
}

/// Largest magnitude among the terms of `mu_m(λ)`; the reference scale for
/// "is this symbol value zero".
pub fn symbol_scale(m: f64, lambda: f64, params: &FluidParams) -> f64 {
    let (c0, c1, c2) = symbol_coefficients(m, params);
    let g_term = 2.0 * params.g * (params.rho - params.rho_bar);
    let s_term = 2.0 * params.sigma * m * m;
    g_term
        .max(s_term)
        .max(c0.abs())
        .max((c1 * lambda).abs())
        .max(c2 * lambda * lambda)
}

/// The multiplier `mu_k(λ)` acting on `cos(kx)`.
pub fn mu(k: u32, lambda: f64, params: &FluidParams) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("the symbol is defined for k >= 1"));
    }
    Ok(mu_real(k as f64, lambda, params))
}

/// Both roots `(Λ_1, Λ_2)` of `mu_k`, with `Λ_1 < Λ_2`.
pub fn bifurcation_points(k: u32, params: &FluidParams) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if params.rho <= params.rho_bar {
        return Err(Error::Domain(format!(
            "rho = {} must exceed rho_bar = {}",
            params.rho, params.rho_bar
        )));
    }
    let (c0, c1, c2) = symbol_coefficients(k as f64, params);
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if !(disc > 0.0) {
        return Err(Error::Domain(format!("symbol discriminant {disc} is not positive")));
    }
    // cancellation-free quadratic roots
    let root = disc.sqrt();
    let q = -0.5 * (c1 + c1.signum() * root);
    let (a, b) = if c1 == 0.0 {
        (-0.5 * root / c2, 0.5 * root / c2)
    } else {
        (q / c2, c0 / q)
    };
    Ok((a.min(b), a.max(b)))
}

/// The root selected by branch index `i` (1 or 2).
pub fn bifurcation_point(k: u32, i: u8, params: &FluidParams) -> Result<f64> {
    let (l1, l2) = bifurcation_points(k, params)?;
    match i {
        1 => Ok(l1),
        2 => Ok(l2),
        _ => Err(Error::invalid(format!("branch index must be 1 or 2, got {i}"))),
    }
}

const SIMPLE_KERNEL_RTOL: f64 = 1e-10;

/// Whether `cos(kx)` spans the kernel at `Λ_k^i`: no multiple `jk` with
/// `j >= 2` is also a root of the symbol.
///
/// Harmonics `2..=j_max` are checked directly. Beyond that the loop keeps
/// going until the dominant term of `mu_{jk}` certifies a fixed sign for all
/// larger `j`: `-σ(jk)²` once `jk > ρ̄Λ²/(2σ)` (where the symbol is
/// decreasing), or the increasing `ρ̄Λ² jk coth(jk)` term when `σ = 0`.
pub fn kernel_is_simple(k: u32, i: u8, params: &FluidParams, j_max: u32) -> Result<bool> {
    if j_max < 2 {
        return Err(Error::invalid("j_max must be at least 2"));
    }
    let lambda = bifurcation_point(k, i, params)?;
    let kf = k as f64;
    let rb = params.rho_bar;
    let decreasing_from = if params.sigma > 0.0 {
        rb * lambda * lambda / (2.0 * params.sigma)
    } else {
        f64::INFINITY
    };
    let mut j: u64 = 2;
    loop {
        let m = j as f64 * kf;
        let value = mu_real(m, lambda, params);
        if value.abs() <= SIMPLE_KERNEL_RTOL * symbol_scale(m, lambda, params) {
            return Ok(false);
        }
        if j >= j_max as u64 {
            let certified = if params.sigma > 0.0 {
                value < 0.0 && m > decreasing_from
            } else {
                value > 0.0 || lambda == 0.0
            };
            if certified {
                return Ok(true);
            }
        }
        if j > 100_000_000 {
            return Err(Error::numerical(
                "kernel_is_simple",
                "no sign certificate for large harmonics",
            ));
        }
        j += 1;
    }
}

/// Observed ordering of `(Λ_k^i)_{k=1..k_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    NotMonotone,
}

pub fn lambda_trend(i: u8, params: &FluidParams, k_max: u32) -> Result<Trend> {
    let values = (1..=k_max)
        .map(|k| bifurcation_point(k, i, params))
        .collect::<Result<Vec<_>>>()?;
    let up = values.windows(2).all(|w| w[1] > w[0]);
    let down = values.windows(2).all(|w| w[1] < w[0]);
    Ok(match (up, down) {
        (true, _) => Trend::Increasing,
        (_, true) => Trend::Decreasing,
        _ => Trend::NotMonotone,
    })
}

fn both_monotone(params: &FluidParams, k_max: u32) -> Result<bool> {
    Ok(lambda_trend(1, params, k_max)? != Trend::NotMonotone
        && lambda_trend(2, params, k_max)? != Trend::NotMonotone)
}

/// Smallest `σ_0 >= 0` (to 1e-6) such that both root sequences are strictly
/// monotone on `k = 1..=k_max` for every `σ > σ_0`.
///
/// Beyond `k_max` the `σk²` term dominates and sends `Λ_k^1 -> -∞`,
/// `Λ_k^2 -> +∞` monotonically, so only the finite range is examined. The
/// given `sigma` field is ignored. Gravity-capillary competition usually
/// breaks monotonicity for intermediate `σ`, so `σ_0` is typically positive
/// even when the `σ = 0` sequences are monotone.
pub fn sigma_threshold(params: &FluidParams, k_max: u32) -> Result<f64> {
    if k_max < 2 {
        return Err(Error::invalid("k_max must be at least 2"));
    }
    let at = |sigma: f64| both_monotone(&params.with_sigma(sigma), k_max);
    // Upper end where the capillary term has taken over.
    let scale = params.g * (params.rho - params.rho_bar) + params.omega_bar.powi(2) * params.rho_bar;
    let mut hi = scale.max(1e-12);
    let mut guard = 0;
    while !at(hi)? || !at(2.0 * hi)? {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::numerical("sigma_threshold", "no monotone regime found"));
        }
    }
    // Scan downward for the last failure.
    const SCAN: usize = 4000;
    let mut last_bad: Option<(f64, f64)> = None;
    for idx in (0..SCAN).rev() {
        let lo = hi * idx as f64 / SCAN as f64;
        if !at(lo)? {
            last_bad = Some((lo, hi * (idx + 1) as f64 / SCAN as f64));
            break;
        }
    }
    let Some((mut bad, mut good)) = last_bad else {
        return Ok(0.0);
    };
    while good - bad > 1e-7 * (1.0 + good) {
        let mid = 0.5 * (bad + good);
        if at(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

/// Linearised upper stream function `w̄_k` on `[0, 1]`.
pub fn linear_vertical_profile(k: u32, lambda: f64, omega_bar: f64) -> Result<VerticalProfile> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    Ok(VerticalProfile::Closed {
        domain: VerticalDomain::Upper,
        form: ClosedForm::LinearUpper {
            k: k as f64,
            lambda,
            omega_bar,
        },
    })
}

/// Value and first two derivatives of
/// `w̄_k(y) = (λ/tanh k) sinh(ky) - λ cosh(ky) + ω̄(y - y²) + λ(1 - y)`.
pub(crate) fn linear_profile_jet(k: f64, lambda: f64, omega_bar: f64, y: f64) -> (f64, f64, f64) {
    // sinh(ky)/tanh k - cosh(ky) = -sinh(k(1-y))/sinh k
    let s = -sinh_ratio(k * (1.0 - y), k);
    let c = cosh_sinh_ratio(k * (1.0 - y), k);
    let v = lambda * s + omega_bar * (y - y * y) + lambda * (1.0 - y);
    let d1 = lambda * k * c + omega_bar * (1.0 - 2.0 * y) - lambda;
    let d2 = lambda * k * k * s - 2.0 * omega_bar;
    (v, d1, d2)
}

/// Finite-range estimates of the three suprema in the multiplier criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierBounds {
    pub sup0: f64,
    pub sup1: f64,
    pub sup2: f64,
    /// Index `p` attaining each supremum.
    pub argmax: [usize; 3],
}

/// `sup p^{r-s}|M_p|`, `sup p^{r-s+1}|M_{p+1}-M_p|` and
/// `sup p^{r-s+2}|M_{p+2}-2M_{p+1}+M_p|` over the supplied range, where
/// `symbol[0]` is `M_1`.
pub fn multiplier_bound_estimate(symbol: &[f64], r: f64, s: f64) -> Result<MultiplierBounds> {
    if symbol.len() < 3 {
        return Err(Error::invalid("need at least three symbol values"));
    }
    if r.fract() == 0.0 || s.fract() == 0.0 || r <= 0.0 || s <= 0.0 {
        return Err(Error::invalid("r and s must be positive non-integers"));
    }
    let e = r - s;
    let sup = |len: usize, order: i32, term: &dyn Fn(usize) -> f64| {
        let mut best = (f64::NEG_INFINITY, 0);
        for idx in 0..len {
            let p = (idx + 1) as f64;
            let v = p.powf(e + order as f64) * term(idx).abs();
            if v > best.0 {
                best = (v, idx + 1);
            }
        }
        best
    };
    let n = symbol.len();
    let (sup0, p0) = sup(n, 0, &|i| symbol[i]);
    let (sup1, p1) = sup(n - 1, 1, &|i| symbol[i + 1] - symbol[i]);
    let (sup2, p2) = sup(n - 2, 2, &|i| symbol[i + 2] - 2.0 * symbol[i + 1] + symbol[i]);
    Ok(MultiplierBounds {
        sup0,
        sup1,
        sup2,
        argmax: [p0, p1, p2],
    })
}

/// One line of the dispersion table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub k: u32,
    pub lambda_1: f64,
    pub lambda_2: f64,
    /// `mu_{2k}` at `Λ_k^1` and `Λ_k^2`.
    pub mu_2k: [f64; 2],
    pub simple_kernel: [bool; 2],
}

pub fn dispersion_row(k: u32, params: &FluidParams, j_max: u32) -> Result<DispersionRow> {
    let (l1, l2) = bifurcation_points(k, params)?;
    Ok(DispersionRow {
        k,
        lambda_1: l1,
        lambda_2: l2,
        mu_2k: [mu(2 * k, l1, params)?, mu(2 * k, l2, params)?],
        simple_kernel: [
            kernel_is_simple(k, 1, params, j_max)?,
            kernel_is_simple(k, 2, params, j_max)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> FluidParams {
        FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.0, 0.0).unwrap()
    }

    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let fa = f(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(m) > 0.0) == (fa > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn gravity_term_only() {
        for k in [1, 5, 40] {
            assert!((mu(k, 0.0, &base()).unwrap() + 19.6).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_high_precision_value() {
        // 40-digit evaluation of the same expression
        let p = FluidParams::new(2.0, 1.0, 9.8, 0.5, 1.0, 2.0).unwrap();
        let v = mu(3, 1.0, &p).unwrap();
        assert!((v - -18.570181060117865).abs() < 1e-13);
    }

    #[test]
    fn zero_wavenumber_rejected() {
        assert!(matches!(mu(0, 1.0, &base()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn stable_coth_for_large_arguments() {
        for m in [0.5_f64, 1.0, 10.0, 19.9, 20.0, 35.0, 400.0, 5000.0] {
            let direct = m / m.tanh();
            assert!((k_coth(m) - direct).abs() < 1e-13 * direct, "m = {m}");
        }
        assert!(mu(2000, 1.0, &base()).unwrap().is_finite());
    }

    #[test]
    fn roots_match_bisection() {
        let p = base();
        let (l1, l2) = bifurcation_points(1, &p).unwrap();
        let f = |l: f64| mu(1, l, &p).unwrap();
        let b1 = bisect(f, -10.0, 0.0);
        let b2 = bisect(f, 0.0, 10.0);
        assert!((l1 - b1).abs() < 1e-12 && (l2 - b2).abs() < 1e-12);
        assert!((l1 - -2.731963163801169).abs() < 1e-12);
        assert!((l1 + l2).abs() < 1e-14);
        for k in 1..6 {
            let (a, b) = bifurcation_points(k, &p).unwrap();
            assert!(a < b);
            assert!(mu(k, a, &p).unwrap().abs() < 1e-12 * 20.0);
            assert!(mu(k, b, &p).unwrap().abs() < 1e-12 * 20.0);
        }
    }

    #[test]
    fn closed_form_roots() {
        let p = FluidParams::new(3.0, 1.5, 9.8, 0.2, 1.0, 0.7).unwrap();
        for k in 1..5u32 {
            let kf = k as f64;
            let t = kf.tanh() / kf;
            let g = p.g * (p.rho - p.rho_bar) + p.sigma * kf * kf;
            let root = (g / p.rho_bar * t + p.omega_bar.powi(2) / 4.0 * t * t).sqrt();
            let (l1, l2) = bifurcation_points(k, &p).unwrap();
            assert!((l1 - (-p.omega_bar / 2.0 * t - root)).abs() < 1e-13);
            assert!((l2 - (-p.omega_bar / 2.0 * t + root)).abs() < 1e-13);
        }
    }

    #[test]
    fn unstable_stratification_is_a_domain_error() {
        let mut p = base();
        p.rho = 0.5;
        assert!(matches!(bifurcation_points(1, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn generic_kernel_is_simple() {
        assert!(kernel_is_simple(1, 1, &base(), 16).unwrap());
        assert!(kernel_is_simple(1, 2, &base(), 16).unwrap());
        assert!(matches!(kernel_is_simple(1, 1, &base(), 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn resonant_kernel_detected() {
        // Tune σ so that mu_2 vanishes at Λ_1^1 as well.
        let p0 = base();
        let gap = |sigma: f64| {
            let p = p0.with_sigma(sigma);
            let l = bifurcation_point(1, 1, &p).unwrap();
            mu(2, l, &p).unwrap()
        };
        // mu_2(Λ_1) is positive at σ = 0 and negative for large σ
        assert!(gap(0.0) > 0.0 && gap(50.0) < 0.0);
        let sigma = bisect(gap, 0.0, 50.0);
        let p = p0.with_sigma(sigma);
        assert!(!kernel_is_simple(1, 1, &p, 16).unwrap());
        assert!(kernel_is_simple(1, 1, &p.with_sigma(sigma * 1.1), 16).unwrap());
    }

    #[test]
    fn zero_vorticity_roots_monotone_without_tension() {
        let p = base();
        assert_eq!(lambda_trend(1, &p, 64).unwrap(), Trend::Increasing);
        assert_eq!(lambda_trend(2, &p, 64).unwrap(), Trend::Decreasing);
    }

    fn monotone_on_scan(p: &FluidParams, k_max: u32) -> impl Fn(f64) -> bool + '_ {
        move |sigma| {
            let q = p.with_sigma(sigma);
            lambda_trend(1, &q, k_max).unwrap() != Trend::NotMonotone
                && lambda_trend(2, &q, k_max).unwrap() != Trend::NotMonotone
        }
    }

    #[test]
    fn sigma_threshold_agrees_with_dense_scan() {
        for omega_bar in [0.0, 1.5, -2.0] {
            let p = FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.0, omega_bar).unwrap();
            let k_max = 8;
            let s0 = sigma_threshold(&p, k_max).unwrap();
            let ok = monotone_on_scan(&p, k_max);
            // every σ above the threshold is monotone, and just below it fails
            for i in 1..=400 {
                let sigma = s0 * (1.0 + 1e-5) + i as f64 * s0.max(1.0) * 0.01;
                assert!(ok(sigma), "ω̄ = {omega_bar}, σ = {sigma}");
            }
            if s0 > 0.0 {
                assert!(!ok(s0 * (1.0 - 1e-4)));
            }
        }
        assert!(sigma_threshold(&base(), 1).is_err());
    }

    #[test]
    fn linear_profile_endpoints_and_ode() {
        let (k, lambda, ob) = (2u32, -1.3, 0.8);
        let prof = linear_vertical_profile(k, lambda, ob).unwrap();
        assert!(prof.eval(0.0).abs() < 1e-14);
        assert!(prof.eval(1.0).abs() < 1e-14);
        let kf = k as f64;
        let n = 2048;
        let h = 1.0 / n as f64;
        let mut worst: f64 = 0.0;
        for i in 1..n {
            let y = i as f64 * h;
            let d2 = (prof.eval(y + h) - 2.0 * prof.eval(y) + prof.eval(y - h)) / (h * h);
            let b = -2.0 * ob - (1.0 - y) * (ob * y + lambda) * kf * kf;
            worst = worst.max((d2 - kf * kf * prof.eval(y) - b).abs());
        }
        assert!(worst < 1e-5, "{worst}");
        let zero = linear_vertical_profile(3, 0.0, 0.0).unwrap();
        assert!((0..=10).all(|i| zero.eval(i as f64 / 10.0) == 0.0));
    }

    #[test]
    fn linear_profile_matches_printed_hyperbolic_form() {
        let (k, lambda, ob) = (3.0f64, 0.7, -0.4);
        for i in 0..=20 {
            let y = i as f64 / 20.0;
            let printed = lambda / k.tanh() * (k * y).sinh() - lambda * (k * y).cosh()
                + ob * (y - y * y)
                + lambda * (1.0 - y);
            assert!((linear_profile_jet(k, lambda, ob, y).0 - printed).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_bounds() {
        let ones = vec![1.0; 10];
        let b = multiplier_bound_estimate(&ones, 0.5, 1.5).unwrap();
        assert_eq!(b.sup0, 1.0);
        assert_eq!(b.argmax[0], 1);
        assert_eq!((b.sup1, b.sup2), (0.0, 0.0));

        let squares: Vec<f64> = (1..=20).map(|p| (p * p) as f64).collect();
        let b = multiplier_bound_estimate(&squares, 0.5, 2.5).unwrap();
        assert!((b.sup0 - 1.0).abs() < 1e-14);

        let p = base();
        let m: Vec<f64> = (1..=30).map(|q| mu(q, 1.0, &p).unwrap() / q as f64).collect();
        let (r, s) = (1.5, 0.5);
        let b = multiplier_bound_estimate(&m, r, s).unwrap();
        let mut direct = [0.0f64; 3];
        for q in 1..=30usize {
            let pf = q as f64;
            direct[0] = direct[0].max(pf.powf(r - s) * m[q - 1].abs());
            if q < 30 {
                direct[1] = direct[1].max(pf.powf(r - s + 1.0) * (m[q] - m[q - 1]).abs());
            }
            if q < 29 {
                direct[2] = direct[2].max(pf.powf(r - s + 2.0) * (m[q + 1] - 2.0 * m[q] + m[q - 1]).abs());
            }
        }
        assert_eq!([b.sup0, b.sup1, b.sup2], direct);
        assert!(multiplier_bound_estimate(&m, 1.0, 0.5).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn parabola_opens_upward(k in 1u32..50, big in 50.0f64..1e4, ob in -5.0f64..5.0, sigma in 0.0f64..2.0) {
                let p = FluidParams::new(2.0, 1.0, 9.8, sigma, 1.0, ob).unwrap();
                let bound = 2.0 * (9.8 + sigma * (k * k) as f64) + 10.0;
                let l = big.max(bound);
                prop_assert!(mu(k, l, &p).unwrap() > 0.0);
                prop_assert!(mu(k, -l, &p).unwrap() > 0.0);
            }
        }
    }
}
