//! Domain types shared by every module, and the periodic-function algebra
//! they are built on.
//!
//! Periodic integrals are normalised averages (the integral of 1 over a period
//! is 1), evaluated as arithmetic means over uniform grids. All reductions go
//! through [`pairwise_sum`] so results do not depend on thread count.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dispersion;
use crate::error::{Error, Result};

/// Fixed-order pairwise summation (blocks of 8 summed left to right).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Physical constants of the two-layer system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    pub rho: f64,
    pub rho_bar: f64,
    pub g: f64,
    pub sigma: f64,
    pub omega: f64,
    pub omega_bar: f64,
    /// Display-only; solutions are independent of the wave speed.
    #[serde(default = "default_wave_speed")]
    pub wave_speed: f64,
}

fn default_wave_speed() -> f64 {
    1.0
}

impl FluidParams {
    pub fn new(rho: f64, rho_bar: f64, g: f64, sigma: f64, omega: f64, omega_bar: f64) -> Result<Self> {
        let params = FluidParams {
            rho,
            rho_bar,
            g,
            sigma,
            omega,
            omega_bar,
            wave_speed: default_wave_speed(),
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks the structural invariants. The surface tension threshold is
    /// enforced where a branch is set up, see [`crate::continuation`].
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho", self.rho),
            ("rho_bar", self.rho_bar),
            ("g", self.g),
            ("sigma", self.sigma),
            ("omega", self.omega),
            ("omega_bar", self.omega_bar),
            ("wave_speed", self.wave_speed),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if self.rho_bar <= 0.0 {
            return Err(Error::invalid("rho_bar must be positive"));
        }
        if self.g <= 0.0 {
            return Err(Error::invalid("g must be positive"));
        }
        if self.sigma < 0.0 {
            return Err(Error::invalid("sigma must be nonnegative"));
        }
        if self.wave_speed <= 0.0 {
            return Err(Error::invalid("wave_speed must be positive"));
        }
        if self.rho <= self.rho_bar {
            return Err(Error::Domain(format!(
                "stable stratification requires rho > rho_bar (rho = {}, rho_bar = {})",
                self.rho, self.rho_bar
            )));
        }
        Ok(())
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }
}

/// Even, mean-zero cosine series `sum_j coeffs[j-1] cos(j k x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineSeries {
    pub k: u32,
    pub coeffs: Vec<f64>,
}

/// Odd series `sum_j coeffs[j-1] sin(j k x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineSeries {
    pub k: u32,
    pub coeffs: Vec<f64>,
}

impl CosineSeries {
    pub fn eval(&self, x: f64) -> f64 {
        let kx = self.k as f64 * x;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| a * ((j + 1) as f64 * kx).cos())
            .fold(0.0, |acc, v| acc + v)
    }

    /// Coefficient of `cos(j k x)`, zero beyond the stored range.
    pub fn harmonic(&self, j: usize) -> f64 {
        if j == 0 {
            return 0.0;
        }
        self.coeffs.get(j - 1).copied().unwrap_or(0.0)
    }
}

impl SineSeries {
    pub fn eval(&self, x: f64) -> f64 {
        let kx = self.k as f64 * x;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| a * ((j + 1) as f64 * kx).sin())
            .fold(0.0, |acc, v| acc + v)
    }
}

/// Surface elevation: an even, mean-zero, `2π/k`-periodic cosine series that
/// stays strictly inside the strip `|η| < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CosineSeries", into = "CosineSeries")]
pub struct WaveProfile {
    k: u32,
    coeffs: Vec<f64>,
}

impl TryFrom<CosineSeries> for WaveProfile {
    type Error = Error;
    fn try_from(series: CosineSeries) -> Result<Self> {
        WaveProfile::new(series.k, series.coeffs)
    }
}

impl From<WaveProfile> for CosineSeries {
    fn from(p: WaveProfile) -> Self {
        CosineSeries {
            k: p.k,
            coeffs: p.coeffs,
        }
    }
}

/// Surface values, slope and second derivative at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceJet {
    pub eta: f64,
    pub d1: f64,
    pub d2: f64,
}

impl WaveProfile {
    pub fn new(k: u32, coeffs: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("wavenumber k must be at least 1"));
        }
        if let Some(bad) = coeffs.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidProfile(format!("non-finite coefficient {bad}")));
        }
        let profile = WaveProfile { k, coeffs };
        let sup = profile.sup_norm();
        if sup >= 1.0 {
            return Err(Error::AmplitudeTooLarge { sup_norm: sup });
        }
        Ok(profile)
    }

    pub fn zero(k: u32, harmonics: usize) -> Self {
        WaveProfile {
            k: k.max(1),
            coeffs: vec![0.0; harmonics],
        }
    }

    /// A tangent direction with the given coefficients. Unlike [`WaveProfile::new`]
    /// the amplitude is not restricted, so the result need not describe an
    /// admissible interface; use it only as the second argument of
    /// [`WaveProfile::axpy`] or as a derivative direction.
    pub fn direction(k: u32, coeffs: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("wavenumber k must be at least 1"));
        }
        if let Some(bad) = coeffs.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidProfile(format!("non-finite coefficient {bad}")));
        }
        Ok(WaveProfile { k, coeffs })
    }

    /// `cos(j k x)` as a direction.
    pub fn unit_mode(k: u32, j: usize, harmonics: usize) -> Result<Self> {
        if j == 0 || j > harmonics {
            return Err(Error::invalid(format!("harmonic {j} outside 1..={harmonics}")));
        }
        let mut coeffs = vec![0.0; harmonics];
        coeffs[j - 1] = 1.0;
        WaveProfile::direction(k, coeffs)
    }

    /// `a cos(j k x)` alone.
    pub fn single_mode(k: u32, j: usize, amplitude: f64, harmonics: usize) -> Result<Self> {
        if j == 0 || j > harmonics {
            return Err(Error::invalid(format!("harmonic {j} outside 1..={harmonics}")));
        }
        let mut coeffs = vec![0.0; harmonics];
        coeffs[j - 1] = amplitude;
        WaveProfile::new(k, coeffs)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn harmonics(&self) -> usize {
        self.coeffs.len()
    }

    pub fn harmonic(&self, j: usize) -> f64 {
        if j == 0 {
            return 0.0;
        }
        self.coeffs.get(j - 1).copied().unwrap_or(0.0)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.k as f64
    }

    pub fn is_flat(&self) -> bool {
        self.coeffs.iter().all(|a| *a == 0.0)
    }

    /// Pads or truncates to `n` harmonics.
    pub fn resized(&self, n: usize) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n, 0.0);
        WaveProfile::new(self.k, coeffs)
    }

    /// `self + t * direction`, padded to the longer harmonic range.
    pub fn axpy(&self, t: f64, direction: &WaveProfile) -> Result<Self> {
        if direction.k != self.k {
            return Err(Error::invalid(format!(
                "wavenumber mismatch: profile k = {}, direction k = {}",
                self.k, direction.k
            )));
        }
        let n = self.coeffs.len().max(direction.coeffs.len());
        let coeffs = (1..=n)
            .map(|j| self.harmonic(j) + t * direction.harmonic(j))
            .collect();
        WaveProfile::new(self.k, coeffs)
    }

    /// The same function written over the base wavenumber `base`, which must
    /// divide `k`; harmonic `j` moves to index `j * k / base`.
    pub fn rebased(&self, base: u32) -> Result<Self> {
        if base == 0 || !self.k.is_multiple_of(base) {
            return Err(Error::invalid(format!("base {base} does not divide k = {}", self.k)));
        }
        let factor = (self.k / base) as usize;
        let mut coeffs = vec![0.0; self.coeffs.len() * factor];
        for (j, a) in self.coeffs.iter().enumerate() {
            coeffs[(j + 1) * factor - 1] = *a;
        }
        WaveProfile::new(base, coeffs)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x).eta
    }

    pub fn jet(&self, x: f64) -> SurfaceJet {
        let k = self.k as f64;
        let (s1, c1) = (k * x).sin_cos();
        let (mut s, mut c) = (s1, c1);
        let mut jet = SurfaceJet {
            eta: 0.0,
            d1: 0.0,
            d2: 0.0,
        };
        for (idx, a) in self.coeffs.iter().enumerate() {
            let jk = (idx + 1) as f64 * k;
            jet.eta += a * c;
            jet.d1 -= a * jk * s;
            jet.d2 -= a * jk * jk * c;
            // rotate (s, c) by k x
            let (sn, cn) = (s * c1 + c * s1, c * c1 - s * s1);
            s = sn;
            c = cn;
        }
        jet
    }

    pub fn derivative(&self) -> SineSeries {
        let k = self.k as f64;
        SineSeries {
            k: self.k,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, a)| -a * (j + 1) as f64 * k)
                .collect(),
        }
    }

    pub fn second_derivative(&self) -> CosineSeries {
        let k = self.k as f64;
        CosineSeries {
            k: self.k,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, a)| {
                    let jk = (j + 1) as f64 * k;
                    -a * jk * jk
                })
                .collect(),
        }
    }

    /// Sup norm over a dense half-period grid; exact when the coefficient
    /// bound already settles the question.
    pub fn sup_norm(&self) -> f64 {
        let bound: f64 = self.coeffs.iter().map(|a| a.abs()).sum();
        if bound < 0.5 {
            // Cheap path: the maximum over the grid is within the bound anyway.
            return self.grid_sup(256).max(0.0).min(bound);
        }
        self.grid_sup(2048)
    }

    fn grid_sup(&self, n: usize) -> f64 {
        let half = self.period() / 2.0;
        (0..=n)
            .map(|i| self.eval(half * i as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Samples over one full period on `n` uniform nodes starting at 0.
    pub fn samples(&self, n: usize) -> PeriodicSamples {
        let h = self.period() / n as f64;
        PeriodicSamples {
            period: self.period(),
            values: (0..n).map(|i| self.eval(h * i as f64)).collect(),
        }
    }

    /// `η''/(1+η'²)^{3/2}` sampled on `n` uniform nodes over one period.
    pub fn curvature(&self, n: usize) -> PeriodicSamples {
        let h = self.period() / n as f64;
        PeriodicSamples {
            period: self.period(),
            values: (0..n)
                .map(|i| {
                    let jet = self.jet(h * i as f64);
                    curvature_of(jet)
                })
                .collect(),
        }
    }
}

pub(crate) fn curvature_of(jet: SurfaceJet) -> f64 {
    jet.d2 / (1.0 + jet.d1 * jet.d1).powf(1.5)
}

/// Derived quantities of a profile used by the nonlocal operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineSeriesOps {
    pub derivative: SineSeries,
    pub second_derivative: CosineSeries,
    /// `η''/(1+η'²)^{3/2}`; the operator multiplies this by `2σ`.
    pub curvature_term: PeriodicSamples,
}

pub fn cosine_series_ops(profile: &WaveProfile, nx: usize) -> CosineSeriesOps {
    CosineSeriesOps {
        derivative: profile.derivative(),
        second_derivative: profile.second_derivative(),
        curvature_term: profile.curvature(nx),
    }
}

/// Uniform samples `values[j] = f(j * period / n)` of a periodic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSamples {
    pub period: f64,
    pub values: Vec<f64>,
}

impl PeriodicSamples {
    pub fn new(period: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("periodic samples must be nonempty"));
        }
        if !(period > 0.0) {
            return Err(Error::invalid("period must be positive"));
        }
        Ok(PeriodicSamples { period, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, j: usize) -> f64 {
        self.period * j as f64 / self.values.len() as f64
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_j |f(x_j) - f(-x_j)|`.
    pub fn evenness_defect(&self) -> f64 {
        let n = self.values.len();
        (1..n)
            .map(|j| (self.values[j] - self.values[n - j]).abs())
            .fold(0.0, f64::max)
    }

    /// Coefficients `c_0..c_n` of `c_0 + sum_j c_j cos(2π j x / period)` by
    /// the trapezoidal rule (exact for band-limited data).
    pub fn cosine_coefficients(&self, harmonics: usize) -> Vec<f64> {
        let n = self.values.len();
        let mut terms = vec![0.0; n];
        (0..=harmonics)
            .map(|j| {
                for (i, t) in terms.iter_mut().enumerate() {
                    let theta = 2.0 * PI * (j * i % n) as f64 / n as f64;
                    *t = self.values[i] * theta.cos();
                }
                let c = mean(&terms);
                if j == 0 || 2 * j == n {
                    c
                } else {
                    2.0 * c
                }
            })
            .collect()
    }

    pub fn project_mean_zero(&self) -> PeriodicSamples {
        let m = self.mean();
        PeriodicSamples {
            period: self.period,
            values: self.values.iter().map(|v| v - m).collect(),
        }
    }
}

/// Removes the average over one period.
pub fn project_mean_zero(f: &PeriodicSamples) -> Result<PeriodicSamples> {
    if f.values.is_empty() {
        return Err(Error::invalid("cannot project an empty sample set"));
    }
    Ok(f.project_mean_zero())
}

/// Which fluid layer a field belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Lower,
    Upper,
}

impl Layer {
    /// The fixed reference interval in the transformed vertical coordinate.
    pub fn interval(self) -> (f64, f64) {
        match self {
            Layer::Lower => (-1.0, 0.0),
            Layer::Upper => (0.0, 1.0),
        }
    }

    /// `+1` for the lower layer, `-1` for the upper one: the straightening map
    /// is `y = Y + (1 + sign·Y) η(x)`.
    pub fn sign(self) -> f64 {
        match self {
            Layer::Lower => 1.0,
            Layer::Upper => -1.0,
        }
    }

    pub fn to_physical(self, yt: f64, eta: f64) -> f64 {
        yt + (1.0 + self.sign() * yt) * eta
    }

    pub fn to_transformed(self, y: f64, eta: f64) -> f64 {
        (y - eta) / (1.0 + self.sign() * eta)
    }

    pub fn name(self) -> &'static str {
        match self {
            Layer::Lower => "lower",
            Layer::Upper => "upper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerticalDomain {
    /// `[-1, 0]`
    Lower,
    /// `[0, 1]`
    Upper,
}

impl VerticalDomain {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            VerticalDomain::Lower => (-1.0, 0.0),
            VerticalDomain::Upper => (0.0, 1.0),
        }
    }
}

/// Closed-form vertical profiles appearing in the linear and second-order theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedForm {
    /// Linearised upper stream function for `cos(kx)` forcing.
    LinearUpper { k: f64, lambda: f64, omega_bar: f64 },
    /// Right-hand side of the linearised upper problem.
    LinearUpperForcing { k: f64, lambda: f64, omega_bar: f64 },
    /// `cos(2kx)` part of the lower second derivative, divided by `ω`.
    Beta { k: f64 },
    /// Mean part of the upper second-order forcing.
    E0 { k: f64, lambda: f64, omega_bar: f64 },
    /// `cos(2kx)` part of the upper second-order forcing.
    E2k { k: f64, lambda: f64, omega_bar: f64 },
    /// Vertical factor of the leading `ψ_x` term.
    Fk { k: f64 },
}

/// A function of the vertical coordinate on `[-1,0]` or `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case")]
pub enum VerticalProfile {
    Closed {
        domain: VerticalDomain,
        form: ClosedForm,
    },
    /// Samples on a uniform grid spanning the domain, read back with
    /// four-point (cubic) Lagrange interpolation.
    Sampled {
        domain: VerticalDomain,
        values: Vec<f64>,
    },
}

impl VerticalProfile {
    pub fn domain(&self) -> VerticalDomain {
        match self {
            VerticalProfile::Closed { domain, .. } | VerticalProfile::Sampled { domain, .. } => *domain,
        }
    }

    pub fn sampled(domain: VerticalDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::invalid("sampled profile needs at least 4 nodes"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sampled profile has non-finite values"));
        }
        Ok(VerticalProfile::Sampled { domain, values })
    }

    /// Value, first and second derivative at `y`.
    pub fn eval3(&self, y: f64) -> (f64, f64, f64) {
        match self {
            VerticalProfile::Closed { form, .. } => eval_closed(form, y),
            VerticalProfile::Sampled { domain, values } => lagrange4(domain.bounds(), values, y),
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.eval3(y).0
    }

    pub fn derivative(&self, y: f64) -> f64 {
        self.eval3(y).1
    }

    /// Uniform nodes of a sampled profile (empty for closed forms).
    pub fn nodes(&self) -> Vec<f64> {
        match self {
            VerticalProfile::Closed { .. } => Vec::new(),
            VerticalProfile::Sampled { domain, values } => uniform_nodes(domain.bounds(), values.len()),
        }
    }
}

pub(crate) fn uniform_nodes((a, b): (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn eval_closed(form: &ClosedForm, y: f64) -> (f64, f64, f64) {
    match *form {
        ClosedForm::LinearUpper { k, lambda, omega_bar } => dispersion::linear_profile_jet(k, lambda, omega_bar, y),
        ClosedForm::LinearUpperForcing { k, lambda, omega_bar } => {
            // b_k(y) = -2ω̄ - (1-y)(ω̄y+λ)k²
            let v = -2.0 * omega_bar - (1.0 - y) * (omega_bar * y + lambda) * k * k;
            let d1 = -k * k * (-(omega_bar * y + lambda) + (1.0 - y) * omega_bar);
            let d2 = -k * k * (-2.0 * omega_bar);
            (v, d1, d2)
        }
        ClosedForm::Beta { k } => crate::asymptotics::beta_jet(k, y),
        ClosedForm::E0 { k, lambda, omega_bar } => crate::asymptotics::e0_jet(k, lambda, omega_bar, y),
        ClosedForm::E2k { k, lambda, omega_bar } => crate::asymptotics::e2k_jet(k, lambda, omega_bar, y),
        ClosedForm::Fk { k } => crate::asymptotics::fk_jet(k, y),
    }
}

/// Cubic Lagrange interpolation on the 4-node stencil nearest `y`.
fn lagrange4((a, b): (f64, f64), values: &[f64], y: f64) -> (f64, f64, f64) {
    let n = values.len();
    let h = (b - a) / (n - 1) as f64;
    let t = (y - a) / h;
    let base = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let xs: [f64; 4] = std::array::from_fn(|i| (base + i) as f64);
    let mut out = (0.0, 0.0, 0.0);
    for i in 0..4 {
        let (mut l, mut dl, mut d2l) = (1.0, 0.0, 0.0);
        let mut denom = 1.0;
        let others: Vec<f64> = (0..4).filter(|&j| j != i).map(|j| xs[j]).collect();
        for &xj in &others {
            denom *= xs[i] - xj;
        }
        // product of (t - x_j) over the three other nodes, and its derivatives
        let (p, q, r) = (t - others[0], t - others[1], t - others[2]);
        l *= p * q * r;
        dl += q * r + p * r + p * q;
        d2l += 2.0 * (p + q + r);
        let v = values[base + i] / denom;
        out.0 += v * l;
        out.1 += v * dl;
        out.2 += v * d2l;
    }
    (out.0, out.1 / h, out.2 / (h * h))
}

/// A value with its first and second partial derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Derivs {
    pub v: f64,
    pub x: f64,
    pub y: f64,
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

/// Samples of a stream function on the fixed rectangle of one layer.
///
/// `values[ix * ny + iy]` is the sample at `(x[ix], y[iy])`, where `x` covers
/// one full period uniformly and `y` is the transformed vertical coordinate.
/// When `pushforward` carries the profile, the same samples are read as the
/// physical stream function at `(x, Y + (1 ± Y) η(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub layer: Layer,
    pub k: u32,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
    pub pushforward: Option<WaveProfile>,
}

impl FieldGrid {
    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.y.len() + iy]
    }

    /// Physical vertical position of node `(ix, iy)`.
    pub fn physical_y(&self, ix: usize, iy: usize) -> f64 {
        match &self.pushforward {
            Some(p) => self.layer.to_physical(self.y[iy], p.eval(self.x[ix])),
            None => self.y[iy],
        }
    }

    /// `max |w(x, y) - w(-x, y)|` over the grid.
    pub fn mirror_defect(&self) -> f64 {
        let (nx, ny) = (self.nx(), self.ny());
        let mut worst: f64 = 0.0;
        for ix in 1..nx {
            for iy in 0..ny {
                worst = worst.max((self.get(ix, iy) - self.get(nx - ix, iy)).abs());
            }
        }
        worst
    }

    /// Row index of the interface `Y = 0`.
    pub fn surface_row(&self) -> usize {
        match self.layer {
            Layer::Lower => self.ny() - 1,
            Layer::Upper => 0,
        }
    }

    /// Row index of the bed or lid.
    pub fn wall_row(&self) -> usize {
        match self.layer {
            Layer::Lower => 0,
            Layer::Upper => self.ny() - 1,
        }
    }

    pub fn max_abs_difference(&self, other: &FieldGrid) -> Result<f64> {
        if self.values.len() != other.values.len() || self.layer != other.layer {
            return Err(Error::invalid("field grids do not match"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `(k, i)`: wavenumber and which root of the dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchId(pub u32, pub u8);

impl BranchId {
    pub fn new(k: u32, i: u8) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if i != 1 && i != 2 {
            return Err(Error::invalid(format!("branch index must be 1 or 2, got {i}")));
        }
        Ok(BranchId(k, i))
    }

    pub fn k(self) -> u32 {
        self.0
    }

    pub fn i(self) -> u8 {
        self.1
    }
}

/// One solution on a bifurcation branch, normalised so that `a_1 = -s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub s: f64,
    pub lambda: f64,
    pub profile: WaveProfile,
    pub residual: f64,
    pub branch_id: BranchId,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_curvature(p: &WaveProfile, x: f64, h: f64) -> f64 {
        let d1 = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
        let d2 = (p.eval(x + h) - 2.0 * p.eval(x) + p.eval(x - h)) / (h * h);
        d2 / (1.0 + d1 * d1).powf(1.5)
    }

    #[test]
    fn mean_removal() {
        let c = PeriodicSamples::new(2.0 * PI, vec![5.0; 16]).unwrap();
        assert!(project_mean_zero(&c).unwrap().values.iter().all(|v| *v == 0.0));

        let cosine = WaveProfile::new(1, vec![0.5]).unwrap().samples(64);
        let projected = project_mean_zero(&cosine).unwrap();
        for (a, b) in cosine.values.iter().zip(&projected.values) {
            assert!((a - b).abs() < 1e-15);
        }

        let n = 64;
        let h = 2.0 * PI / n as f64;
        let f = PeriodicSamples::new(2.0 * PI, (0..n).map(|i| 3.0 + 2.0 * (h * i as f64).cos()).collect()).unwrap();
        // direct average over the nodes
        let avg = f.values.iter().sum::<f64>() / n as f64;
        assert!((avg - 3.0).abs() < 1e-14);
        let g = project_mean_zero(&f).unwrap();
        for (i, v) in g.values.iter().enumerate() {
            assert!((v - 2.0 * (h * i as f64).cos()).abs() < 1e-14);
        }
        assert!(g.mean().abs() < 1e-15);
    }

    #[test]
    fn empty_samples_rejected() {
        assert!(PeriodicSamples::new(1.0, vec![]).is_err());
        let empty = PeriodicSamples { period: 1.0, values: vec![] };
        assert!(matches!(project_mean_zero(&empty), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn flat_profile_ops() {
        let p = WaveProfile::zero(2, 4);
        let ops = cosine_series_ops(&p, 32);
        assert!(ops.derivative.coeffs.iter().all(|a| *a == 0.0));
        assert!(ops.second_derivative.coeffs.iter().all(|a| *a == 0.0));
        assert_eq!(ops.curvature_term.max_abs(), 0.0);
    }

    #[test]
    fn termwise_second_derivative() {
        let p = WaveProfile::new(1, vec![0.3]).unwrap();
        let d2 = p.second_derivative();
        assert_eq!(d2.coeffs, vec![-0.3]);
        for x in [0.0, 0.4, 2.0] {
            assert!((d2.eval(x) + 0.3 * x.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn curvature_matches_finite_differences() {
        // η = 0.1 cos(2x) written as harmonic 2 of k = 1
        let p = WaveProfile::new(1, vec![0.0, 0.1]).unwrap();
        let n = 64;
        let curv = p.curvature(n);
        assert!((curv.values[0] + 0.4).abs() < 1e-15);
        for j in 0..n {
            let x = curv.node(j);
            let fd = fd_curvature(&p, x, 1e-4);
            assert!((curv.values[j] - fd).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn amplitude_guard() {
        assert!(matches!(
            WaveProfile::new(1, vec![0.7, 0.4]),
            Err(Error::AmplitudeTooLarge { .. })
        ));
        assert!(WaveProfile::new(1, vec![0.7, 0.2]).is_ok());
        assert!(WaveProfile::new(0, vec![0.1]).is_err());
    }

    #[test]
    fn rebased_profile_is_same_function() {
        let p = WaveProfile::new(3, vec![0.1, -0.02, 0.003]).unwrap();
        let q = p.rebased(1).unwrap();
        for i in 0..50 {
            let x = 0.13 * i as f64;
            assert!((p.eval(x) - q.eval(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn fluid_params_validation() {
        assert!(FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.0, 0.0).is_ok());
        assert!(matches!(FluidParams::new(1.0, 2.0, 9.8, 0.0, 1.0, 0.0), Err(Error::Domain(_))));
        assert!(FluidParams::new(2.0, 1.0, 9.8, -1.0, 1.0, 0.0).is_err());
        assert!(FluidParams::new(2.0, 1.0, f64::NAN, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn json_field_names() {
        let p = FluidParams::new(2.0, 1.0, 9.8, 0.5, 1.0, 0.25).unwrap();
        let v = serde_json::to_value(p).unwrap();
        for key in ["rho", "rho_bar", "g", "sigma", "omega", "omega_bar", "wave_speed"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let profile = WaveProfile::new(2, vec![-0.01, 0.001]).unwrap();
        let pv = serde_json::to_value(&profile).unwrap();
        assert_eq!(pv, serde_json::json!({"k": 2, "coeffs": [-0.01, 0.001]}));
        let point = BranchPoint {
            s: 0.01,
            lambda: -2.7,
            profile,
            residual: 1e-12,
            branch_id: BranchId(2, 1),
        };
        let bv = serde_json::to_value(&point).unwrap();
        assert_eq!(bv["branch_id"], serde_json::json!([2, 1]));
        let back: BranchPoint = serde_json::from_value(bv).unwrap();
        assert_eq!(back, point);
        // deserialisation enforces the strip constraint
        let bad = serde_json::json!({"k": 1, "coeffs": [1.5]});
        assert!(serde_json::from_value::<WaveProfile>(bad).is_err());
    }

    #[test]
    fn sampled_profile_interpolates_cubics_exactly() {
        let f = |y: f64| 1.0 + y - 2.0 * y * y + 0.5 * y * y * y;
        let nodes = uniform_nodes((0.0, 1.0), 11);
        let p = VerticalProfile::sampled(VerticalDomain::Upper, nodes.iter().map(|y| f(*y)).collect()).unwrap();
        for y in [0.0, 0.033, 0.5, 0.97, 1.0] {
            let (v, d1, d2) = p.eval3(y);
            assert!((v - f(y)).abs() < 1e-13);
            assert!((d1 - (1.0 - 4.0 * y + 1.5 * y * y)).abs() < 1e-11);
            assert!((d2 - (-4.0 + 3.0 * y)).abs() < 1e-9);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn profile() -> impl Strategy<Value = WaveProfile> {
            (1u32..5, prop::collection::vec(-0.1f64..0.1, 1..8))
                .prop_map(|(k, c)| WaveProfile::new(k, c).unwrap())
        }

        proptest! {
            #[test]
            fn profiles_are_even_and_mean_zero(p in profile(), x in -10.0f64..10.0) {
                prop_assert!((p.eval(x) - p.eval(-x)).abs() < 1e-14);
                prop_assert!(p.samples(4096).mean().abs() < 1e-12);
            }

            #[test]
            fn projection_is_idempotent(v in prop::collection::vec(-5.0f64..5.0, 1..64)) {
                let f = PeriodicSamples::new(1.0, v).unwrap();
                let once = project_mean_zero(&f).unwrap();
                let twice = project_mean_zero(&once).unwrap();
                for (a, b) in once.values.iter().zip(&twice.values) {
                    prop_assert!((a - b).abs() < 1e-14);
                }
            }

            #[test]
            fn derivatives_match_centered_differences(p in profile(), x in 0.0f64..6.0) {
                let h = 1e-5;
                let jet = p.jet(x);
                let d1 = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
                let d2 = (p.jet(x + h).d1 - p.jet(x - h).d1) / (2.0 * h);
                prop_assert!((jet.d1 - d1).abs() < 1e-6);
                prop_assert!((jet.d2 - d2).abs() < 1e-5);
                prop_assert!((p.derivative().eval(x) - jet.d1).abs() < 1e-12);
            }
        }
    }
}
