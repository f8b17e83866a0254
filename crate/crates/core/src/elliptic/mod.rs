//! The nonlinear verifier: Dirichlet solves on the two straightened layers,
//! the interface operators built from their traces, and the nonlocal
//! operator `Ψ(λ, η)` whose zeros are travelling waves.

mod operator;
mod solver;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use operator::{coefficients_at, Coefficients, TransformedOperator};
pub use solver::{FieldColumn, LayerField, StripSolver};

use crate::error::{Error, Result};
use crate::model::{curvature_of, CosineSeries, FluidParams, Layer, PeriodicSamples, WaveProfile};

/// Discretisation size: `nx` uniform nodes per period (a power of two; the
/// solver uses the `nx/2 + 1` nodes of the half period) and `ny` Chebyshev
/// nodes across each layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// Relative GMRES tolerance on the lifted residual.
    #[serde(default = "default_rtol")]
    pub rtol: f64,
}

fn default_rtol() -> f64 {
    1e-13
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < 8 || !nx.is_power_of_two() {
            return Err(Error::invalid(format!("nx must be a power of two >= 8, got {nx}")));
        }
        if ny < 4 {
            return Err(Error::invalid(format!("ny must be at least 4, got {ny}")));
        }
        Ok(GridSpec {
            nx,
            ny,
            rtol: default_rtol(),
        })
    }

    /// Grid resolving profiles with `harmonics` cosine modes.
    pub fn for_harmonics(harmonics: usize) -> Self {
        GridSpec {
            nx: (4 * harmonics).next_power_of_two().max(32),
            ny: 40,
            rtol: default_rtol(),
        }
    }

    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    /// Highest harmonic the half-period grid can represent.
    pub fn max_harmonic(&self) -> usize {
        self.nx / 2
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::for_harmonics(32)
    }
}

/// The transformed operator of `layer` sampled on the solver grid.
pub fn build_operator(layer: Layer, profile: &WaveProfile, grid: &GridSpec) -> Result<TransformedOperator> {
    StripSolver::shared(profile.k(), grid).operator(layer, profile)
}

/// Lower layer: `A(η) w = ω`, `w = 0` at `Y = 0`, `w = ω/2` at `Y = -1`.
pub fn solve_lower(profile: &WaveProfile, params: &FluidParams, grid: &GridSpec) -> Result<LayerField> {
    let solver = StripSolver::shared(profile.k(), grid);
    solver.solve(Layer::Lower, profile, params.omega, 0.0, grid.rtol)
}

/// Upper layer: `Ā(η) w̄ = ω̄`, `w̄ = 0` at `Y = 0`, `w̄ = λ + ω̄/2` at `Y = 1`.
pub fn solve_upper(lambda: f64, profile: &WaveProfile, params: &FluidParams, grid: &GridSpec) -> Result<LayerField> {
    let solver = StripSolver::shared(profile.k(), grid);
    solver.solve(Layer::Upper, profile, params.omega_bar, lambda, grid.rtol)
}

fn interface_energy(layer: Layer, profile: &WaveProfile, field: &LayerField) -> Result<Vec<f64>> {
    if field.layer != layer {
        return Err(Error::invalid(format!(
            "expected a {} layer field, got {}",
            layer.name(),
            field.layer.name()
        )));
    }
    if field.profile.k() != profile.k() {
        return Err(Error::invalid("field and profile have different wavenumbers"));
    }
    let s = layer.sign();
    let wy = field.surface_dy();
    let wx = field.surface_dx();
    Ok(field
        .x_nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let jet = profile.jet(x);
            let d = 1.0 + s * jet.eta;
            wx[i] * wx[i] - 2.0 * jet.d1 / d * wx[i] * wy[i] + (1.0 + jet.d1 * jet.d1) / (d * d) * wy[i] * wy[i]
        })
        .collect())
}

fn unfold_samples(profile: &WaveProfile, field: &LayerField, half: &[f64]) -> PeriodicSamples {
    let m = half.len() - 1;
    let _ = field;
    PeriodicSamples {
        period: profile.period(),
        values: (0..2 * m).map(|j| if j <= m { half[j] } else { half[2 * m - j] }).collect(),
    }
}

/// `|∇ψ|²` at the interface from below, as a function of `x`.
pub fn boundary_b(profile: &WaveProfile, field: &LayerField) -> Result<PeriodicSamples> {
    let half = interface_energy(Layer::Lower, profile, field)?;
    Ok(unfold_samples(profile, field, &half))
}

/// `|∇ψ̄|²` at the interface from above.
pub fn boundary_bbar(profile: &WaveProfile, field: &LayerField) -> Result<PeriodicSamples> {
    let half = interface_energy(Layer::Upper, profile, field)?;
    Ok(unfold_samples(profile, field, &half))
}

/// One evaluation of `Ψ` with its diagnostics.
#[derive(Debug, Clone)]
pub struct PsiEvaluation {
    /// Values on the half-period nodes `x_i = iπ/(kM)`.
    pub half: Vec<f64>,
    /// The subtracted period average (the Bernoulli constant combination).
    pub q: f64,
    pub period: f64,
    /// Cosine coefficients `c_0..c_M` of `half`.
    pub coefficients: Vec<f64>,
}

impl PsiEvaluation {
    pub fn samples(&self) -> PeriodicSamples {
        let m = self.half.len() - 1;
        PeriodicSamples {
            period: self.period,
            values: (0..2 * m)
                .map(|j| if j <= m { self.half[j] } else { self.half[2 * m - j] })
                .collect(),
        }
    }

    /// Coefficients of `cos(jkx)`, `j = 1..=n`.
    pub fn harmonics(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|j| self.coefficients.get(j).copied().unwrap_or(0.0)).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.half.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `Ψ` for fixed physical parameters, wavenumber and grid.
#[derive(Debug, Clone)]
pub struct PsiOperator {
    pub params: FluidParams,
    pub k: u32,
    pub grid: GridSpec,
    solver: Arc<StripSolver>,
}

impl PsiOperator {
    pub fn new(params: FluidParams, k: u32, grid: GridSpec) -> Result<Self> {
        params.validate()?;
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        GridSpec::new(grid.nx, grid.ny)?;
        Ok(PsiOperator {
            params,
            k,
            grid,
            solver: StripSolver::shared(k, &grid),
        })
    }

    fn check(&self, profile: &WaveProfile) -> Result<()> {
        if profile.k() != self.k {
            return Err(Error::invalid(format!(
                "profile wavenumber {} differs from operator wavenumber {}",
                profile.k(),
                self.k
            )));
        }
        Ok(())
    }

    pub fn solve_lower(&self, profile: &WaveProfile) -> Result<LayerField> {
        self.check(profile)?;
        self.solver
            .solve(Layer::Lower, profile, self.params.omega, 0.0, self.grid.rtol)
    }

    pub fn solve_upper(&self, lambda: f64, profile: &WaveProfile) -> Result<LayerField> {
        self.check(profile)?;
        self.solver
            .solve(Layer::Upper, profile, self.params.omega_bar, lambda, self.grid.rtol)
    }

    pub fn evaluate(&self, lambda: f64, profile: &WaveProfile) -> Result<PsiEvaluation> {
        let lower = self.solve_lower(profile)?;
        let upper = self.solve_upper(lambda, profile)?;
        self.assemble(profile, &lower, &upper)
    }

    /// `Ψ` from already computed layer solutions.
    pub fn assemble(&self, profile: &WaveProfile, lower: &LayerField, upper: &LayerField) -> Result<PsiEvaluation> {
        let p = &self.params;
        let b = interface_energy(Layer::Lower, profile, lower)?;
        let bbar = interface_energy(Layer::Upper, profile, upper)?;
        let cos = &self.solver.cosine;
        // Everything except the curvature term, whose mean is exactly zero.
        let body: Vec<f64> = cos
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &x)| p.rho_bar * bbar[i] - p.rho * b[i] + 2.0 * p.g * (p.rho_bar - p.rho) * profile.eval(x))
            .collect();
        let q = cos.mean(&body);
        let half: Vec<f64> = cos
            .nodes
            .iter()
            .zip(&body)
            .map(|(&x, v)| v - q + 2.0 * p.sigma * curvature_of(profile.jet(x)))
            .collect();
        // the curvature samples average to rounding error; remove it too
        let drift = cos.mean(&half);
        let half: Vec<f64> = half.iter().map(|v| v - drift).collect();
        let coefficients = (&cos.forward * nalgebra::DVector::from_column_slice(&half))
            .iter()
            .copied()
            .collect();
        Ok(PsiEvaluation {
            half,
            q,
            period: profile.period(),
            coefficients,
        })
    }

    pub fn psi(&self, lambda: f64, profile: &WaveProfile) -> Result<PeriodicSamples> {
        Ok(self.evaluate(lambda, profile)?.samples())
    }

    /// Harmonics `1..=n` of `Ψ(λ, η)`.
    pub fn harmonics(&self, lambda: f64, profile: &WaveProfile, n: usize) -> Result<Vec<f64>> {
        Ok(self.evaluate(lambda, profile)?.harmonics(n))
    }

    /// Central-difference step used along a profile direction.
    pub fn frechet_step(profile: &WaveProfile) -> f64 {
        1e-5 * profile.sup_norm().max(1.0)
    }

    /// Directional derivative `∂_η Ψ(λ, η)[direction]` by central differences,
    /// returned as half-period nodal values plus coefficients.
    pub fn frechet(&self, lambda: f64, profile: &WaveProfile, direction: &WaveProfile) -> Result<PsiEvaluation> {
        let m = self.solver.cosine.m;
        let dir_norm = direction.sup_norm();
        if dir_norm == 0.0 {
            return Ok(PsiEvaluation {
                half: vec![0.0; m + 1],
                q: 0.0,
                period: profile.period(),
                coefficients: vec![0.0; m + 1],
            });
        }
        let t = Self::frechet_step(profile) / dir_norm;
        let plus = self.evaluate(lambda, &profile.axpy(t, direction)?)?;
        let minus = self.evaluate(lambda, &profile.axpy(-t, direction)?)?;
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) / (2.0 * t)).collect::<Vec<_>>();
        Ok(PsiEvaluation {
            half: diff(&plus.half, &minus.half),
            q: (plus.q - minus.q) / (2.0 * t),
            period: profile.period(),
            coefficients: diff(&plus.coefficients, &minus.coefficients),
        })
    }

    /// `∂_λ Ψ(λ, η)` by central differences (exact up to rounding: `Ψ` is
    /// quadratic in `λ`).
    pub fn lambda_derivative(&self, lambda: f64, profile: &WaveProfile) -> Result<PsiEvaluation> {
        let h = 1e-5 * lambda.abs().max(1.0);
        let lower = self.solve_lower(profile)?;
        let plus = self.assemble(profile, &lower, &self.solve_upper(lambda + h, profile)?)?;
        let minus = self.assemble(profile, &lower, &self.solve_upper(lambda - h, profile)?)?;
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) / (2.0 * h)).collect::<Vec<_>>();
        Ok(PsiEvaluation {
            half: diff(&plus.half, &minus.half),
            q: (plus.q - minus.q) / (2.0 * h),
            period: profile.period(),
            coefficients: diff(&plus.coefficients, &minus.coefficients),
        })
    }

    /// Second difference of `Ψ(λ, ·)` at the flat interface along `cos(kx)`,
    /// as cosine coefficients of `cos(jkx)`, `j = 1..=harmonics`.
    pub fn directional_hessian(&self, lambda: f64, epsilon: f64, harmonics: usize) -> Result<CosineSeries> {
        let dir = |t: f64| WaveProfile::single_mode(self.k, 1, t, 1);
        let plus = self.evaluate(lambda, &dir(epsilon)?)?;
        let zero = self.evaluate(lambda, &WaveProfile::zero(self.k, 1))?;
        let minus = self.evaluate(lambda, &dir(-epsilon)?)?;
        let coeffs = (1..=harmonics)
            .map(|j| {
                let c = |e: &PsiEvaluation| e.coefficients.get(j).copied().unwrap_or(0.0);
                (c(&plus) - 2.0 * c(&zero) + c(&minus)) / (epsilon * epsilon)
            })
            .collect();
        Ok(CosineSeries { k: self.k, coeffs })
    }
}

/// `Ψ(λ, η)` sampled over one full period.
pub fn psi(lambda: f64, profile: &WaveProfile, params: &FluidParams, grid: &GridSpec) -> Result<PeriodicSamples> {
    PsiOperator::new(*params, profile.k(), *grid)?.psi(lambda, profile)
}

/// `∂_η Ψ(λ, η)[direction]` sampled over one full period.
pub fn frechet_dpsi(
    lambda: f64,
    profile: &WaveProfile,
    params: &FluidParams,
    direction: &WaveProfile,
    grid: &GridSpec,
) -> Result<PeriodicSamples> {
    Ok(PsiOperator::new(*params, profile.k(), *grid)?
        .frechet(lambda, profile, direction)?
        .samples())
}

/// Cosine coefficients (`cos(jkx)`, `j = 1..=4`) of the second derivative of
/// `Ψ(λ, ·)` at `η = 0` in the direction `cos(kx)`.
pub fn directional_hessian(lambda: f64, params: &FluidParams, k: u32, grid: &GridSpec) -> Result<CosineSeries> {
    PsiOperator::new(*params, k, *grid)?.directional_hessian(lambda, 1e-3, 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{bifurcation_point, mu};

    fn params() -> FluidParams {
        FluidParams::new(2.0, 1.0, 9.8, 0.0, 1.0, 0.5).unwrap()
    }

    fn grid() -> GridSpec {
        GridSpec::new(32, 24).unwrap()
    }

    #[test]
    fn laminar_solutions_are_exact() {
        let p = params();
        let flat = WaveProfile::zero(1, 4);
        let lower = solve_lower(&flat, &p, &grid()).unwrap();
        for (j, y) in lower.y_nodes().iter().enumerate() {
            for i in 0..lower.values.nrows() {
                assert!((lower.values[(i, j)] - 0.5 * p.omega * y * y).abs() < 1e-15);
            }
        }
        let lambda = 1.7;
        let upper = solve_upper(lambda, &flat, &p, &grid()).unwrap();
        for (j, y) in upper.y_nodes().iter().enumerate() {
            assert!((upper.values[(3, j)] - (0.5 * p.omega_bar * y * y + lambda * y)).abs() < 1e-15);
        }
        let calm = FluidParams::new(2.0, 1.0, 9.8, 0.0, 0.0, 0.0).unwrap();
        let wavy = WaveProfile::new(1, vec![0.1, 0.02]).unwrap();
        assert!(solve_lower(&wavy, &calm, &grid()).unwrap().values.iter().all(|v| *v == 0.0));
        assert!(solve_upper(0.0, &wavy, &calm, &grid()).unwrap().values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn wavy_solve_has_small_residual_and_exact_walls() {
        let p = params();
        let prof = WaveProfile::new(1, vec![0.2, -0.03]).unwrap();
        let lower = solve_lower(&prof, &p, &grid()).unwrap();
        assert!(lower.residual(p.omega).unwrap() < 1e-10);
        let ny = lower.values.ncols();
        for i in 0..lower.values.nrows() {
            assert_eq!(lower.values[(i, ny - 1)], 0.0);
            assert_eq!(lower.values[(i, 0)], 0.5 * p.omega);
        }
        let upper = solve_upper(-2.0, &prof, &p, &grid()).unwrap();
        assert!(upper.residual(p.omega_bar).unwrap() < 1e-10);
        for i in 0..upper.values.nrows() {
            assert_eq!(upper.values[(i, 0)], 0.0);
            assert_eq!(upper.values[(i, ny - 1)], -2.0 + 0.5 * p.omega_bar);
        }
        let fg = lower.to_field_grid();
        assert_eq!(fg.mirror_defect(), 0.0);
    }

    #[test]
    fn boundary_operators_on_laminar_fields() {
        let p = params();
        let flat = WaveProfile::zero(1, 2);
        let lower = solve_lower(&flat, &p, &grid()).unwrap();
        let upper = solve_upper(1.3, &flat, &p, &grid()).unwrap();
        assert!(boundary_b(&flat, &lower).unwrap().max_abs() < 1e-24);
        let bb = boundary_bbar(&flat, &upper).unwrap();
        assert!(bb.values.iter().all(|v| (v - 1.69).abs() < 1e-12));
        assert!(matches!(boundary_b(&flat, &upper), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn bbar_first_order_identities() {
        // d/dη B̄(0, ψ̄0)[η] = 2λ²η with w̄ frozen; d/dw̄ B̄(0, ψ̄0)[w̄] = 2λ w̄_Y
        let p = params();
        let lambda = 0.8;
        let flat = WaveProfile::zero(1, 2);
        let upper = solve_upper(lambda, &flat, &p, &grid()).unwrap();
        let eps = 1e-6;
        let bumped = WaveProfile::new(1, vec![eps]).unwrap();
        let moved = boundary_bbar(&bumped, &upper).unwrap();
        let base = boundary_bbar(&flat, &upper).unwrap();
        for (j, (a, b)) in moved.values.iter().zip(&base.values).enumerate() {
            let x = moved.node(j);
            let fd = (a - b) / eps;
            assert!((fd - 2.0 * lambda * lambda * x.cos()).abs() < 1e-5);
        }
        // w̄ direction: perturb the lid value, w̄ changes by Y, trace derivative 1
        let shifted = solve_upper(lambda + eps, &flat, &p, &grid()).unwrap();
        let moved = boundary_bbar(&flat, &shifted).unwrap();
        for (a, b) in moved.values.iter().zip(&base.values) {
            assert!(((a - b) / eps - 2.0 * lambda).abs() < 1e-5);
        }
    }

    #[test]
    fn psi_vanishes_on_laminar_line() {
        let op = PsiOperator::new(params(), 1, grid()).unwrap();
        for lambda in [-5.0, -1.0, 0.0, 2.5, 5.0] {
            let v = op.psi(lambda, &WaveProfile::zero(1, 4)).unwrap();
            assert!(v.max_abs() < 1e-12, "λ = {lambda}");
        }
    }

    #[test]
    fn psi_is_mean_zero_and_reports_q() {
        let op = PsiOperator::new(params().with_sigma(0.3), 2, grid()).unwrap();
        let prof = WaveProfile::new(2, vec![0.05, 0.01, -0.004]).unwrap();
        let e = op.evaluate(1.0, &prof).unwrap();
        assert!(e.samples().mean().abs() < 1e-13);
        assert!(e.q.is_finite());
    }

    #[test]
    fn surface_tension_adds_curvature_exactly() {
        let prof = WaveProfile::new(1, vec![0.05, 0.01]).unwrap();
        let a = PsiOperator::new(params(), 1, grid()).unwrap().psi(0.7, &prof).unwrap();
        let b = PsiOperator::new(params().with_sigma(0.4), 1, grid())
            .unwrap()
            .psi(0.7, &prof)
            .unwrap();
        let curv = prof.curvature(a.len());
        for j in 0..a.len() {
            assert!((b.values[j] - a.values[j] - 0.8 * curv.values[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn frechet_recovers_symbol() {
        let p = params();
        let lambda = bifurcation_point(1, 1, &p).unwrap() + 0.3;
        let op = PsiOperator::new(p, 1, grid()).unwrap();
        let flat = WaveProfile::zero(1, 4);
        for j in 1..=3 {
            let dir = WaveProfile::unit_mode(1, j, 4).unwrap();
            let d = op.frechet(lambda, &flat, &dir).unwrap();
            let expect = mu(j as u32, lambda, &p).unwrap();
            assert!((d.coefficients[j] - expect).abs() < 1e-6 * expect.abs().max(1.0));
            for (i, c) in d.coefficients.iter().enumerate() {
                if i != j {
                    assert!(c.abs() < 1e-7);
                }
            }
        }
        let zero = op.frechet(lambda, &flat, &WaveProfile::zero(1, 4)).unwrap();
        assert!(zero.half.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn hessian_is_orthogonal_to_kernel() {
        let p = params();
        let lambda = bifurcation_point(1, 1, &p).unwrap();
        let h = directional_hessian(lambda, &p, 1, &grid()).unwrap();
        assert!(h.coeffs[0].abs() < 1e-6 * h.coeffs[1].abs());
    }
}
