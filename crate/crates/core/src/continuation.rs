//! Newton continuation of `Ψ(λ, η) = 0` away from a bifurcation point.
//!
//! A branch is parametrised by the amplitude `s = -a_1`. For fixed `s` the
//! unknowns are `(λ, a_2, ..., a_N)` and the equations are the harmonics
//! `1..N` of `Ψ`, which makes the system square.

use nalgebra::{DMatrix, DVector, LU, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{branch_expansion, second_order_coefficients, AkVariant, ExpansionCoefficients};
use crate::dispersion::{kernel_is_simple, sigma_threshold};
use crate::elliptic::{GridSpec, PsiOperator};
use crate::error::{Error, Result};
use crate::model::{BranchId, BranchPoint, FluidParams, WaveProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Cosine harmonics carried by the profile.
    pub harmonics: usize,
    /// Bound on `sup |Ψ|` for acceptance.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest admissible correction (sup norm over `λ` and coefficients).
    /// A larger step means the guess is outside the local basin.
    pub trust_radius: f64,
    /// Harmonic count may double up to this when the tail is not resolved.
    pub max_harmonics: usize,
    /// Vertical collocation points; the horizontal size follows `harmonics`.
    pub ny: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            harmonics: 32,
            tol: 1e-9,
            max_iter: 25,
            trust_radius: 0.5,
            max_harmonics: 256,
            ny: 40,
        }
    }
}

impl NewtonOptions {
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            ny: self.ny,
            ..GridSpec::for_harmonics(self.harmonics)
        }
    }
}

/// Diagnostics of one corrector run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    /// Residual evaluations, including the final accepted one.
    pub iterations: usize,
    pub residual: f64,
    /// Sup norms of the applied corrections, in order.
    pub corrections: Vec<f64>,
    pub jacobian_evaluations: usize,
    pub harmonics: usize,
}

impl NewtonReport {
    /// Ratio of the last two corrections; small for quadratic convergence.
    pub fn final_ratio(&self) -> Option<f64> {
        let n = self.corrections.len();
        (n >= 2).then(|| self.corrections[n - 1] / self.corrections[n - 2])
    }
}

/// Factored Jacobian of the bordered system, reusable across nearby points.
#[derive(Clone)]
pub struct Jacobian {
    lu: LU<f64, Dyn, Dyn>,
    harmonics: usize,
}

impl std::fmt::Debug for Jacobian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jacobian").field("harmonics", &self.harmonics).finish()
    }
}

fn profile_from(k: u32, s: f64, z: &[f64]) -> Result<WaveProfile> {
    let mut c = Vec::with_capacity(z.len());
    c.push(-s);
    c.extend_from_slice(&z[1..]);
    WaveProfile::new(k, c)
}

fn unknowns(lambda: f64, profile: &WaveProfile, n: usize) -> Vec<f64> {
    let mut z = vec![0.0; n];
    z[0] = lambda;
    for (j, zj) in z.iter_mut().enumerate().skip(1) {
        *zj = profile.harmonic(j + 1);
    }
    z
}

/// Central-difference Jacobian: column 0 is `∂_λ`, column `j` is the
/// derivative along `cos((j+1)kx)`. Columns are independent and computed in
/// parallel; each is deterministic on its own.
fn jacobian(op: &PsiOperator, lambda: f64, profile: &WaveProfile, n: usize) -> Result<Jacobian> {
    let columns: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|c| {
            let eval = if c == 0 {
                op.lambda_derivative(lambda, profile)?
            } else {
                let dir = WaveProfile::unit_mode(profile.k(), c + 1, n)?;
                op.frechet(lambda, profile, &dir)?
            };
            Ok(eval.harmonics(n))
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (c, col) in columns.into_iter().enumerate() {
        for (r, v) in col?.into_iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("continuation", "non-finite Jacobian entry"));
    }
    Ok(Jacobian {
        lu: m.lu(),
        harmonics: n,
    })
}

/// Corrector state shared along a branch.
pub struct Corrector {
    pub params: FluidParams,
    pub k: u32,
    pub options: NewtonOptions,
    op: PsiOperator,
    jac: Option<Jacobian>,
    jacobian_evaluations: usize,
}

impl Corrector {
    pub fn new(params: FluidParams, k: u32, options: NewtonOptions) -> Result<Self> {
        if options.harmonics < 2 {
            return Err(Error::invalid("at least two harmonics are required"));
        }
        if !(options.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        let op = PsiOperator::new(params, k, options.grid())?;
        Ok(Corrector {
            params,
            k,
            options,
            op,
            jac: None,
            jacobian_evaluations: 0,
        })
    }

    pub fn harmonics(&self) -> usize {
        self.options.harmonics
    }

    pub fn operator(&self) -> &PsiOperator {
        &self.op
    }

    fn grow(&mut self) -> Result<()> {
        self.options.harmonics *= 2;
        self.op = PsiOperator::new(self.params, self.k, self.options.grid())?;
        self.jac = None;
        Ok(())
    }

    /// Newton iteration at fixed amplitude `s`, starting from the guess.
    pub fn correct(&mut self, lambda: f64, guess: &WaveProfile, s: f64) -> Result<(BranchPoint, NewtonReport)> {
        loop {
            let n = self.options.harmonics;
            let (point, report) = self.correct_fixed(lambda, &guess.resized(n)?, s)?;
            let a1 = point.profile.harmonic(1).abs();
            let tail = point.profile.harmonic(n).abs();
            if a1 == 0.0 || tail <= 1e-10 * a1 || 2 * n > self.options.max_harmonics {
                return Ok((point, report));
            }
            self.grow()?;
        }
    }

    fn correct_fixed(&mut self, lambda: f64, guess: &WaveProfile, s: f64) -> Result<(BranchPoint, NewtonReport)> {
        let n = self.options.harmonics;
        let k = self.k;
        let mut z = unknowns(lambda, guess, n);
        let mut corrections = Vec::new();
        let mut fresh = false;
        let mut evaluations = 0;
        let jac_before = self.jacobian_evaluations;
        loop {
            let profile = profile_from(k, s, &z)?;
            let eval = self.op.evaluate(z[0], &profile)?;
            evaluations += 1;
            let residual = eval.sup_norm();
            if !residual.is_finite() {
                return Err(Error::numerical("continuation", "non-finite residual"));
            }
            if residual < self.options.tol {
                let report = NewtonReport {
                    iterations: evaluations,
                    residual,
                    corrections,
                    jacobian_evaluations: self.jacobian_evaluations - jac_before,
                    harmonics: n,
                };
                let point = BranchPoint {
                    s,
                    lambda: z[0],
                    profile,
                    residual,
                    branch_id: BranchId(k, 0),
                };
                return Ok((point, report));
            }
            if evaluations > self.options.max_iter {
                return Err(Error::NoConvergence {
                    iterations: evaluations - 1,
                    residual,
                });
            }
            // refresh a stale Jacobian when the chord iteration slows down
            let slow = match corrections.len() {
                0 => false,
                1 => false,
                m => corrections[m - 1] > 0.2 * corrections[m - 2],
            };
            if self.jac.as_ref().map(|j| j.harmonics != n).unwrap_or(true) || (slow && !fresh) {
                self.jac = Some(jacobian(&self.op, z[0], &profile, n)?);
                self.jacobian_evaluations += 1;
                fresh = true;
            }
            let rhs = DVector::from_iterator(n, eval.harmonics(n).into_iter().map(|v| -v));
            let delta = self
                .jac
                .as_ref()
                .and_then(|j| j.lu.solve(&rhs))
                .ok_or_else(|| Error::numerical("continuation", "singular Jacobian"))?;
            let step = delta.amax();
            if !step.is_finite() || step > self.options.trust_radius {
                return Err(Error::NoConvergence {
                    iterations: evaluations,
                    residual,
                });
            }
            corrections.push(step);
            for (zi, di) in z.iter_mut().zip(delta.iter()) {
                *zi += di;
            }
        }
    }
}

/// Corrects a single guess at amplitude `s` with a fresh Jacobian.
pub fn newton_correct(
    lambda_guess: f64,
    profile_guess: &WaveProfile,
    s: f64,
    params: &FluidParams,
    options: &NewtonOptions,
) -> Result<(BranchPoint, NewtonReport)> {
    let mut c = Corrector::new(*params, profile_guess.k(), *options)?;
    c.correct(lambda_guess, profile_guess, s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub newton: NewtonOptions,
    pub variant: AkVariant,
    /// Modes checked for kernel simplicity.
    pub j_max: u32,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            newton: NewtonOptions::default(),
            variant: AkVariant::default(),
            j_max: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub branch_id: BranchId,
    pub coefficients: ExpansionCoefficients,
    /// Increasing `s`, starting with the laminar point at `s = 0`.
    pub points: Vec<BranchPoint>,
    pub reports: Vec<NewtonReport>,
    /// Largest amplitude reached.
    pub achieved_s: f64,
    /// Why tracing stopped before the requested range, if it did.
    pub stopped: Option<String>,
}

impl Branch {
    pub fn point_at(&self, s: f64) -> Option<&BranchPoint> {
        self.points.iter().find(|p| (p.s - s).abs() <= 1e-12 * s.abs().max(1.0))
    }
}

fn check_setup(k: u32, i: u8, params: &FluidParams, options: &TraceOptions) -> Result<ExpansionCoefficients> {
    let id = BranchId::new(k, i)?;
    params.validate()?;
    if params.sigma > 0.0 {
        let sigma0 = sigma_threshold(&params.with_sigma(0.0), 16)?;
        if params.sigma <= sigma0 {
            return Err(Error::Setup(format!(
                "surface tension {} does not exceed the monotonicity threshold {sigma0}",
                params.sigma
            )));
        }
    }
    if !kernel_is_simple(id.k(), id.i(), params, options.j_max)? {
        return Err(Error::Setup(format!("kernel at (k, i) = ({k}, {i}) is not one-dimensional")));
    }
    second_order_coefficients(k, i, params, options.variant).map_err(|e| Error::Setup(e.to_string()))
}

/// Traces branch `(k, i)` through the given increasing amplitudes.
pub fn trace_branch_at(k: u32, i: u8, params: &FluidParams, amplitudes: &[f64], options: &TraceOptions) -> Result<Branch> {
    if amplitudes.is_empty() || amplitudes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::invalid("amplitudes must be positive and finite"));
    }
    if amplitudes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("amplitudes must be strictly increasing"));
    }
    let coefficients = check_setup(k, i, params, options)?;
    let id = BranchId(k, i);
    let mut corrector = Corrector::new(*params, k, options.newton)?;
    let n0 = corrector.harmonics();
    let mut points = vec![BranchPoint {
        s: 0.0,
        lambda: coefficients.lambda,
        profile: WaveProfile::zero(k, n0),
        residual: 0.0,
        branch_id: id,
    }];
    let mut reports = vec![NewtonReport {
        iterations: 0,
        residual: 0.0,
        corrections: Vec::new(),
        jacobian_evaluations: 0,
        harmonics: n0,
    }];
    let mut stopped = None;
    for (idx, &s) in amplitudes.iter().enumerate() {
        let (lambda, guess) = if points.len() < 3 {
            let e = branch_expansion(&coefficients, s, corrector.harmonics())?;
            (e.lambda, e.profile)
        } else {
            let (p1, p0) = (&points[points.len() - 1], &points[points.len() - 2]);
            let t = (s - p1.s) / (p1.s - p0.s);
            let n = corrector.harmonics();
            let (c1, c0) = (p1.profile.resized(n)?, p0.profile.resized(n)?);
            let coeffs: Vec<f64> = c1.coeffs().iter().zip(c0.coeffs()).map(|(a, b)| a + t * (a - b)).collect();
            (p1.lambda + t * (p1.lambda - p0.lambda), WaveProfile::new(k, coeffs)?)
        };
        match corrector.correct(lambda, &guess, s) {
            Ok((mut point, report)) => {
                point.branch_id = id;
                points.push(point);
                reports.push(report);
            }
            Err(e) if idx == 0 => {
                return Err(Error::Setup(format!("first corrector step failed at s = {s}: {e}")));
            }
            Err(e) => {
                stopped = Some(format!("stopped at s = {s}: {e}"));
                break;
            }
        }
    }
    let achieved_s = points.last().map(|p| p.s).unwrap_or(0.0);
    Ok(Branch {
        branch_id: id,
        coefficients,
        points,
        reports,
        achieved_s,
        stopped,
    })
}

/// Traces branch `(k, i)` on the uniform amplitudes `ds, 2ds, ..` up to `s_max`.
pub fn trace_branch(k: u32, i: u8, params: &FluidParams, s_max: f64, ds: f64, options: &TraceOptions) -> Result<Branch> {
    if !(ds > 0.0 && s_max >= ds && s_max.is_finite()) {
        return Err(Error::invalid("need 0 < ds <= s_max"));
    }
    let steps = (s_max / ds - 1e-9).ceil() as usize;
    let amplitudes: Vec<f64> = (1..=steps).map(|j| (j as f64 * ds).min(s_max)).collect();
    trace_branch_at(k, i, params, &amplitudes, options)
}
