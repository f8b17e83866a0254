//! Second-order small-amplitude theory near a bifurcation point: the
//! coefficient of the `cos(2kx)` correction to the profile, and the wave
//! fields in both layers to `O(s²)`.

use serde::{Deserialize, Serialize};

use crate::dispersion::{self, bifurcation_point, cosh_sinh_ratio, k_coth, mu, sinh_ratio};
use crate::error::{Error, Result};
use crate::flowfield::{sample_field, SampleSpec, StreamFunction};
use crate::model::{ClosedForm, Derivs, FieldGrid, FluidParams, Layer, VerticalDomain, VerticalProfile, WaveProfile};
use crate::numerics::{forward_derivative, numerov_bvp};

/// Which form of the `cos(2kx)` forcing coefficient to use. The two differ by
/// the factor `ρ̄` on the upper-layer bracket and agree when `ρ̄ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AkVariant {
    AsPrinted,
    /// Shipped default: matches the numerically differentiated operator.
    #[default]
    RhoBarWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub k: u32,
    pub i: u8,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(rename = "A_k")]
    pub a_k: f64,
    pub alpha_k: f64,
    pub transversality: f64,
    pub mu_2k: f64,
    pub variant: AkVariant,
}

/// Upper-layer bracket of `A_k` (without density factors).
fn a_k_bracket(k: f64, lambda: f64, omega_bar: f64) -> f64 {
    let kc = k_coth(k); // k / tanh k
    let kc2 = k_coth(2.0 * k); // 2k / tanh 2k
    let t1 = kc * lambda + omega_bar;
    // 4k²Λ²/(tanh k tanh 2k) = 2 (k/tanh k)(2k/tanh 2k) Λ²
    t1 * t1 + 2.0 * kc * kc2 * lambda * lambda + omega_bar * kc2 * lambda - 3.0 * k * k * lambda * lambda
}

pub fn a_k_value(k: u32, lambda: f64, params: &FluidParams, variant: AkVariant) -> f64 {
    let bracket = a_k_bracket(k as f64, lambda, params.omega_bar);
    let lower = params.rho * params.omega * params.omega;
    match variant {
        AkVariant::AsPrinted => bracket - lower,
        AkVariant::RhoBarWeighted => params.rho_bar * bracket - lower,
    }
}

/// `d mu_k / dλ` at `Λ_k^i`, written through the root:
/// `±4ρ̄ sqrt((g(ρ-ρ̄) + σk²)/ρ̄ · k/tanh k + ω̄²/4)`.
pub fn transversality(k: u32, i: u8, params: &FluidParams) -> Result<f64> {
    let kf = k as f64;
    let inner = (params.g * (params.rho - params.rho_bar) + params.sigma * kf * kf) / params.rho_bar * k_coth(kf)
        + params.omega_bar * params.omega_bar / 4.0;
    let sign = match i {
        1 => -1.0,
        2 => 1.0,
        _ => return Err(Error::invalid(format!("branch index must be 1 or 2, got {i}"))),
    };
    Ok(sign * 4.0 * params.rho_bar * inner.sqrt())
}

pub fn second_order_coefficients(
    k: u32,
    i: u8,
    params: &FluidParams,
    variant: AkVariant,
) -> Result<ExpansionCoefficients> {
    let lambda = bifurcation_point(k, i, params)?;
    let mu_2k = mu(2 * k, lambda, params)?;
    if mu_2k.abs() <= 1e-10 * dispersion::symbol_scale(2.0 * k as f64, lambda, params) {
        return Err(Error::DegenerateBranch(format!(
            "mu_2k vanishes at the bifurcation point (k = {k}, i = {i})"
        )));
    }
    let a_k = a_k_value(k, lambda, params, variant);
    Ok(ExpansionCoefficients {
        k,
        i,
        lambda,
        a_k,
        alpha_k: -a_k / (2.0 * mu_2k),
        transversality: transversality(k, i, params)?,
        mu_2k,
        variant,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchExpansion {
    pub lambda: f64,
    pub profile: WaveProfile,
}

/// `η(s) ≈ -s cos(kx) + α_k s² cos(2kx)` with `λ(s) ≈ Λ`.
pub fn branch_expansion(coeffs: &ExpansionCoefficients, s: f64, harmonics: usize) -> Result<BranchExpansion> {
    let n = harmonics.max(2);
    let mut c = vec![0.0; n];
    c[0] = -s;
    c[1] = coeffs.alpha_k * s * s;
    Ok(BranchExpansion {
        lambda: coeffs.lambda,
        profile: WaveProfile::new(coeffs.k, c)?,
    })
}

/// `β_k(y) = -½(sinh(2ky)/tanh 2k + cosh 2ky - (1+y)²)` on `[-1, 0]`.
pub fn beta_profile(k: u32) -> VerticalProfile {
    VerticalProfile::Closed {
        domain: VerticalDomain::Lower,
        form: ClosedForm::Beta { k: k as f64 },
    }
}

pub(crate) fn beta_jet(k: f64, y: f64) -> (f64, f64, f64) {
    // sinh(2ky)/tanh 2k + cosh 2ky = sinh(2k(1+y))/sinh 2k
    let big = 2.0 * k;
    let u = 1.0 + y;
    let s = sinh_ratio(big * u, big);
    let c = cosh_sinh_ratio(big * u, big);
    (-0.5 * (s - u * u), -0.5 * (big * c - 2.0 * u), -0.5 * (big * big * s - 2.0))
}

/// `f_k(y) = k sinh(2k(1+y)) / (2 sinh 2k)` on `[-1, 0]`.
pub fn fk_profile(k: u32) -> VerticalProfile {
    VerticalProfile::Closed {
        domain: VerticalDomain::Lower,
        form: ClosedForm::Fk { k: k as f64 },
    }
}

pub(crate) fn fk_jet(k: f64, y: f64) -> (f64, f64, f64) {
    let big = 2.0 * k;
    let u = 1.0 + y;
    let s = sinh_ratio(big * u, big);
    let c = cosh_sinh_ratio(big * u, big);
    (0.5 * k * s, k * k * c, 2.0 * k * k * k * s)
}

/// `(k/2)(sinh(2ky)/tanh 2k + cosh 2ky)`, the other closed form of `f_k`.
pub fn fk_hyperbolic(k: f64, y: f64) -> f64 {
    0.5 * k * ((2.0 * k * y).sinh() / (2.0 * k).tanh() + (2.0 * k * y).cosh())
}

fn hyperbolic_pair(k: f64, y: f64) -> (f64, f64) {
    // S = sinh(ky)/tanh k - cosh ky, C = cosh(ky)/tanh k - sinh ky
    (-sinh_ratio(k * (1.0 - y), k), cosh_sinh_ratio(k * (1.0 - y), k))
}

pub(crate) fn e0_jet(k: f64, lambda: f64, omega_bar: f64, y: f64) -> (f64, f64, f64) {
    let (s, c) = hyperbolic_pair(k, y);
    let (k2, k3) = (k * k, k * k * k);
    let v = -omega_bar + 2.0 * k2 * lambda * s - (1.0 - y) * k3 * lambda * c;
    let d1 = 3.0 * k3 * lambda * c - (1.0 - y) * k3 * k * lambda * s;
    let d2 = 4.0 * k2 * k2 * lambda * s - (1.0 - y) * k3 * k2 * lambda * c;
    (v, d1, d2)
}

pub(crate) fn e2k_jet(k: f64, lambda: f64, omega_bar: f64, y: f64) -> (f64, f64, f64) {
    let (s, c) = hyperbolic_pair(k, y);
    let (k2, k3) = (k * k, k * k * k);
    let v = -omega_bar + 2.0 * k2 * omega_bar * (1.0 - y).powi(2) + 2.0 * k2 * lambda * s
        + 3.0 * (1.0 - y) * k3 * lambda * c;
    let d1 = -4.0 * k2 * omega_bar * (1.0 - y) - k3 * lambda * c + 3.0 * (1.0 - y) * k3 * k * lambda * s;
    let d2 = 4.0 * k2 * omega_bar - 4.0 * k2 * k2 * lambda * s + 3.0 * (1.0 - y) * k3 * k2 * lambda * c;
    (v, d1, d2)
}

/// Second-order vertical profiles of the upper layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperSecondOrder {
    pub e0: VerticalProfile,
    pub e2k: VerticalProfile,
    /// Solves `c'' = -E_0`, `c(0) = c(1) = 0`.
    pub c_k: VerticalProfile,
    /// Solves `d'' - 4k²d = -E_2k`, `d(0) = d(1) = 0`.
    pub d_k: VerticalProfile,
    pub c_prime_zero: f64,
    pub d_prime_zero: f64,
}

/// Uniform intervals used by the fourth-order BVP solves.
pub const BVP_INTERVALS: usize = 1024;

pub fn upper_second_order_profiles(k: u32, big_lambda: f64, omega_bar: f64) -> Result<UpperSecondOrder> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let kf = k as f64;
    let n = BVP_INTERVALS;
    let h = 1.0 / n as f64;
    let ys: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let f0: Vec<f64> = ys.iter().map(|&y| -e0_jet(kf, big_lambda, omega_bar, y).0).collect();
    let f2: Vec<f64> = ys.iter().map(|&y| -e2k_jet(kf, big_lambda, omega_bar, y).0).collect();
    let c = numerov_bvp(0.0, &f0, h, 0.0, 0.0)?;
    let d = numerov_bvp(4.0 * kf * kf, &f2, h, 0.0, 0.0)?;
    if c.iter().chain(&d).any(|v| !v.is_finite()) {
        return Err(Error::numerical("upper second-order profiles", "non-finite BVP solution"));
    }
    let c_prime_zero = forward_derivative(&c, h);
    let d_prime_zero = forward_derivative(&d, h);
    let form = |f: fn(f64, f64, f64) -> ClosedForm| VerticalProfile::Closed {
        domain: VerticalDomain::Upper,
        form: f(kf, big_lambda, omega_bar),
    };
    Ok(UpperSecondOrder {
        e0: form(|k, lambda, omega_bar| ClosedForm::E0 { k, lambda, omega_bar }),
        e2k: form(|k, lambda, omega_bar| ClosedForm::E2k { k, lambda, omega_bar }),
        c_k: VerticalProfile::sampled(VerticalDomain::Upper, c)?,
        d_k: VerticalProfile::sampled(VerticalDomain::Upper, d)?,
        c_prime_zero,
        d_prime_zero,
    })
}

/// Closed form `c_k'(0) = -k²Λ - ω̄/2`.
pub fn c_prime_zero_closed(k: u32, big_lambda: f64, omega_bar: f64) -> f64 {
    let kf = k as f64;
    -kf * kf * big_lambda - omega_bar / 2.0
}

/// Closed form
/// `d_k'(0) = -k²Λ - kΛ/tanh k + 2k²Λ/(tanh k tanh 2k) - ω̄ + kω̄/tanh 2k`.
pub fn d_prime_zero_closed(k: u32, big_lambda: f64, omega_bar: f64) -> f64 {
    let kf = k as f64;
    let kc = k_coth(kf);
    let kc2 = k_coth(2.0 * kf);
    -kf * kf * big_lambda - kc * big_lambda + kc * kc2 * big_lambda - omega_bar + 0.5 * kc2 * omega_bar
}

/// Lower-layer field to second order, in the straightened coordinates:
/// `w/ω = Y²/2 - s(Y²+Y)cos kx + s²[(Y²+Y)/4 + (α(Y²+Y) + β_k/2) cos 2kx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticLowerField {
    pub k: u32,
    pub omega: f64,
    pub alpha: f64,
    pub s: f64,
    pub profile: WaveProfile,
}

impl AsymptoticLowerField {
    pub fn new(coeffs: &ExpansionCoefficients, params: &FluidParams, s: f64) -> Result<Self> {
        Ok(AsymptoticLowerField {
            k: coeffs.k,
            omega: params.omega,
            alpha: coeffs.alpha_k,
            s,
            profile: branch_expansion(coeffs, s, 2)?.profile,
        })
    }

    /// Same expansion pushed forward through a different profile (for
    /// comparison against a corrected branch point).
    pub fn with_profile(mut self, profile: WaveProfile) -> Self {
        self.profile = profile;
        self
    }

    /// `ψ_x / ω ≈ f_k(y) sin(2kx) s²` at a physical point.
    pub fn x_derivative_leading(&self, x: f64, y: f64) -> f64 {
        let k = self.k as f64;
        self.omega * fk_jet(k, y).0 * (2.0 * k * x).sin() * self.s * self.s
    }
}

impl StreamFunction for AsymptoticLowerField {
    fn layer(&self) -> Layer {
        Layer::Lower
    }

    fn profile(&self) -> &WaveProfile {
        &self.profile
    }

    fn transformed(&self, x: f64, yt: f64) -> Derivs {
        let k = self.k as f64;
        let s = self.s;
        let (s1, c1) = (k * x).sin_cos();
        let (s2, c2) = (2.0 * k * x).sin_cos();
        let (b, db, d2b) = beta_jet(k, yt);
        let q = yt * yt + yt;
        let dq = 2.0 * yt + 1.0;
        // coefficient profiles of 1, cos kx, cos 2kx
        let m0 = (0.5 * yt * yt + s * s * q / 4.0, yt + s * s * dq / 4.0, 1.0 + s * s / 2.0);
        let m1 = (-s * q, -s * dq, -2.0 * s);
        let m2 = (
            s * s * (self.alpha * q + 0.5 * b),
            s * s * (self.alpha * dq + 0.5 * db),
            s * s * (2.0 * self.alpha + 0.5 * d2b),
        );
        let w = self.omega;
        Derivs {
            v: w * (m0.0 + m1.0 * c1 + m2.0 * c2),
            x: w * (-k * m1.0 * s1 - 2.0 * k * m2.0 * s2),
            y: w * (m0.1 + m1.1 * c1 + m2.1 * c2),
            xx: w * (-k * k * m1.0 * c1 - 4.0 * k * k * m2.0 * c2),
            xy: w * (-k * m1.1 * s1 - 2.0 * k * m2.1 * s2),
            yy: w * (m0.2 + m1.2 * c1 + m2.2 * c2),
        }
    }
}

/// Upper-layer field to second order:
/// `w̄ = ω̄Y²/2 + λY - s w̄_k cos kx + s²[α w̄_2k cos 2kx + ½(c_k + d_k cos 2kx)]`,
/// with the linear profiles evaluated at `Λ`. `lambda` is the value used in
/// the lid data (pass the corrected `λ(s)` when one is known).
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticUpperField {
    pub k: u32,
    pub omega_bar: f64,
    pub big_lambda: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub s: f64,
    pub profile: WaveProfile,
    pub second: UpperSecondOrder,
}

impl AsymptoticUpperField {
    pub fn new(coeffs: &ExpansionCoefficients, params: &FluidParams, s: f64, lambda: f64) -> Result<Self> {
        Ok(AsymptoticUpperField {
            k: coeffs.k,
            omega_bar: params.omega_bar,
            big_lambda: coeffs.lambda,
            lambda,
            alpha: coeffs.alpha_k,
            s,
            profile: branch_expansion(coeffs, s, 2)?.profile,
            second: upper_second_order_profiles(coeffs.k, coeffs.lambda, params.omega_bar)?,
        })
    }

    pub fn with_profile(mut self, profile: WaveProfile) -> Self {
        self.profile = profile;
        self
    }
}

impl StreamFunction for AsymptoticUpperField {
    fn layer(&self) -> Layer {
        Layer::Upper
    }

    fn profile(&self) -> &WaveProfile {
        &self.profile
    }

    fn transformed(&self, x: f64, yt: f64) -> Derivs {
        let k = self.k as f64;
        let s = self.s;
        let ob = self.omega_bar;
        let (s1, c1) = (k * x).sin_cos();
        let (s2, c2) = (2.0 * k * x).sin_cos();
        let w1 = dispersion::linear_profile_jet(k, self.big_lambda, ob, yt);
        let w2 = dispersion::linear_profile_jet(2.0 * k, self.big_lambda, ob, yt);
        let c = self.second.c_k.eval3(yt);
        let d = self.second.d_k.eval3(yt);
        let m0 = (
            0.5 * ob * yt * yt + self.lambda * yt + 0.5 * s * s * c.0,
            ob * yt + self.lambda + 0.5 * s * s * c.1,
            ob + 0.5 * s * s * c.2,
        );
        let m1 = (-s * w1.0, -s * w1.1, -s * w1.2);
        let m2 = (
            s * s * (self.alpha * w2.0 + 0.5 * d.0),
            s * s * (self.alpha * w2.1 + 0.5 * d.1),
            s * s * (self.alpha * w2.2 + 0.5 * d.2),
        );
        Derivs {
            v: m0.0 + m1.0 * c1 + m2.0 * c2,
            x: -k * m1.0 * s1 - 2.0 * k * m2.0 * s2,
            y: m0.1 + m1.1 * c1 + m2.1 * c2,
            xx: -k * k * m1.0 * c1 - 4.0 * k * k * m2.0 * c2,
            xy: -k * m1.1 * s1 - 2.0 * k * m2.1 * s2,
            yy: m0.2 + m1.2 * c1 + m2.2 * c2,
        }
    }
}

/// Lower field `w` sampled on the straightened rectangle, flagged for
/// pushforward through the expansion profile.
pub fn lower_field_expansion(
    coeffs: &ExpansionCoefficients,
    params: &FluidParams,
    s: f64,
    spec: &SampleSpec,
) -> Result<FieldGrid> {
    sample_field(&AsymptoticLowerField::new(coeffs, params, s)?, spec)
}

/// Leading-order `ψ_x` sampled at the pushed-forward points of the lower grid.
pub fn lower_field_x_derivative_expansion(
    coeffs: &ExpansionCoefficients,
    params: &FluidParams,
    s: f64,
    spec: &SampleSpec,
) -> Result<FieldGrid> {
    let field = AsymptoticLowerField::new(coeffs, params, s)?;
    let mut grid = sample_field(&field, spec)?;
    let ny = grid.ny();
    for ix in 0..grid.nx() {
        for iy in 0..ny {
            let y = grid.physical_y(ix, iy);
            grid.values[ix * ny + iy] = field.x_derivative_leading(grid.x[ix], y);
        }
    }
    Ok(grid)
}

pub fn upper_field_expansion(
    coeffs: &ExpansionCoefficients,
    params: &FluidParams,
    s: f64,
    lambda: f64,
    spec: &SampleSpec,
) -> Result<FieldGrid> {
    sample_field(&AsymptoticUpperField::new(coeffs, params, s, lambda)?, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> FluidParams {
        FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn vorticity_free_reduction() {
        let p = FluidParams::new(2.0, 1.5, 9.8, 0.0, 0.0, 0.0).unwrap();
        for k in 1..4u32 {
            let c = second_order_coefficients(k, 1, &p, AkVariant::AsPrinted).unwrap();
            let kf = k as f64;
            let l = c.lambda;
            let reduced = l * l
                * (kf * kf / kf.tanh().powi(2) + 4.0 * kf * kf / (kf.tanh() * (2.0 * kf).tanh()) - 3.0 * kf * kf);
            assert!((c.a_k - reduced).abs() < 1e-12 * reduced.abs());
            let w = second_order_coefficients(k, 1, &p, AkVariant::RhoBarWeighted).unwrap();
            assert!((w.a_k - 1.5 * reduced).abs() < 1e-12 * reduced.abs());
        }
    }

    #[test]
    fn alpha_identity_and_transversality() {
        let p = FluidParams::new(2.5, 1.2, 9.8, 0.3, 0.7, 0.4).unwrap();
        for i in [1, 2] {
            let c = second_order_coefficients(2, i, &p, AkVariant::default()).unwrap();
            assert_eq!(c.alpha_k * (2.0 * c.mu_2k) + c.a_k, 0.0);
            // derivative of the symbol at the root
            let h = 1e-6;
            let fd = (mu(2, c.lambda + h, &p).unwrap() - mu(2, c.lambda - h, &p).unwrap()) / (2.0 * h);
            assert!((fd - c.transversality).abs() < 1e-6 * fd.abs());
            assert!(c.transversality != 0.0);
            assert_eq!(c.transversality.signum(), if i == 1 { -1.0 } else { 1.0 });
        }
    }

    #[test]
    fn expansion_profiles() {
        let c = second_order_coefficients(1, 1, &params(), AkVariant::default()).unwrap();
        let e = branch_expansion(&c, 0.0, 4).unwrap();
        assert!(e.profile.is_flat());
        assert_eq!(e.lambda, c.lambda);
        let e = branch_expansion(&c, 0.05, 4).unwrap();
        assert!((e.profile.eval(0.0) - (-0.05 + c.alpha_k * 0.0025)).abs() < 1e-15);
        // trough at 0, crest at π
        assert!(e.profile.eval(0.0) < e.profile.eval(std::f64::consts::PI));
        for i in 1..100 {
            let x = std::f64::consts::PI * i as f64 / 100.0;
            assert!(e.profile.jet(x).d1 > 0.0);
        }
        assert!(matches!(branch_expansion(&c, 1.5, 2), Err(Error::AmplitudeTooLarge { .. })));
    }

    #[test]
    fn beta_and_fk_closed_forms() {
        for k in [1u32, 2, 5] {
            let b = beta_profile(k);
            assert!(b.eval(0.0).abs() < 1e-14 && b.eval(-1.0).abs() < 1e-14);
            let f = fk_profile(k);
            let kf = k as f64;
            assert!(f.eval(-1.0).abs() < 1e-15);
            assert!((f.eval(0.0) - kf / 2.0).abs() < 1e-14);
            for i in 0..=50 {
                let y = -(i as f64) / 50.0;
                // the hyperbolic form cancels terms of size cosh(2ky)
                assert!((f.eval(y) - fk_hyperbolic(kf, y)).abs() < 1e-14 * kf * (2.0 * kf * y).cosh());
                let printed =
                    -0.5 * ((2.0 * kf * y).sinh() / (2.0 * kf).tanh() + (2.0 * kf * y).cosh() - (1.0 + y).powi(2));
                assert!((b.eval(y) - printed).abs() < 1e-14 * (2.0 * kf * y).cosh().max(10.0));
            }
        }
    }

    #[test]
    fn forcing_endpoint_values() {
        for (k, l, ob) in [(1u32, -2.732, 0.0), (2, 1.3, 0.7), (3, -0.4, -1.1)] {
            let up = upper_second_order_profiles(k, l, ob).unwrap();
            assert!((up.e0.eval(1.0) + ob).abs() < 1e-12);
            assert!((up.e2k.eval(1.0) + ob).abs() < 1e-12);
            for prof in [&up.c_k, &up.d_k] {
                assert_eq!(prof.eval(0.0), 0.0);
                assert_eq!(prof.eval(1.0), 0.0);
            }
        }
    }

    #[test]
    fn endpoint_derivatives_match_closed_forms() {
        let lambda = -2.7320;
        let up = upper_second_order_profiles(1, lambda, 0.0).unwrap();
        assert!((up.c_prime_zero - c_prime_zero_closed(1, lambda, 0.0)).abs() < 1e-6);
        for (k, l, ob) in [(1u32, -2.732, 0.0), (2, 1.3, 0.7), (3, -0.4, -1.1)] {
            let up = upper_second_order_profiles(k, l, ob).unwrap();
            let dc = d_prime_zero_closed(k, l, ob);
            assert!((up.d_prime_zero - dc).abs() < 1e-7 * dc.abs().max(1.0), "{} vs {}", up.d_prime_zero, dc);
        }
    }

    #[test]
    fn e_derivatives_match_differences() {
        let (k, l, ob) = (2.0, 0.9, -0.6);
        let h = 1e-5;
        for y in [0.1, 0.5, 0.8] {
            for jet in [e0_jet, e2k_jet] {
                let (_, d1, d2) = jet(k, l, ob, y);
                let fd1 = (jet(k, l, ob, y + h).0 - jet(k, l, ob, y - h).0) / (2.0 * h);
                let fd2 = (jet(k, l, ob, y + h).1 - jet(k, l, ob, y - h).1) / (2.0 * h);
                assert!((d1 - fd1).abs() < 1e-6 * d1.abs().max(1.0));
                assert!((d2 - fd2).abs() < 1e-6 * d2.abs().max(1.0));
            }
        }
    }

    #[test]
    fn laminar_limits_and_walls() {
        let p = FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.3, 0.5).unwrap();
        let c = second_order_coefficients(1, 1, &p, AkVariant::default()).unwrap();
        let lower = AsymptoticLowerField::new(&c, &p, 0.0).unwrap();
        let upper = AsymptoticUpperField::new(&c, &p, 0.0, c.lambda).unwrap();
        for x in [0.0, 1.0, 2.5] {
            for yt in [-1.0, -0.4, 0.0] {
                assert!((lower.transformed(x, yt).v - 0.65 * yt * yt).abs() < 1e-15);
            }
            for yt in [0.0, 0.3, 1.0] {
                assert!((upper.transformed(x, yt).v - (0.25 * yt * yt + c.lambda * yt)).abs() < 1e-14);
            }
        }
        let lower = AsymptoticLowerField::new(&c, &p, 0.04).unwrap();
        let upper = AsymptoticUpperField::new(&c, &p, 0.04, c.lambda + 1e-3).unwrap();
        for x in [0.0, 0.7, 2.0] {
            assert!(lower.transformed(x, 0.0).v.abs() < 1e-15);
            assert!((lower.transformed(x, -1.0).v - 0.65).abs() < 1e-15);
            assert!(upper.transformed(x, 0.0).v.abs() < 1e-15);
            assert!((upper.transformed(x, 1.0).v - (c.lambda + 1e-3 + 0.25)).abs() < 1e-12);
        }
    }
}
