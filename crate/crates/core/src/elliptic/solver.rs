//! Dirichlet solver on one layer rectangle: cosine collocation in `x`,
//! Chebyshev collocation in `Y`, GMRES preconditioned by the flat-interface
//! Laplacian (diagonal in cosine modes).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, LU, Dyn};

use super::operator::TransformedOperator;
use super::GridSpec;
use crate::error::{Error, Result};
use crate::model::{Derivs, FieldGrid, Layer, WaveProfile};
use crate::numerics::{gmres, Chebyshev, CosineGrid, SolveStats};

/// Precomputed discretisation for one `(k, nx, ny)`; immutable once built.
pub struct StripSolver {
    pub cosine: CosineGrid,
    lower: Chebyshev,
    upper: Chebyshev,
    d1_int_t: DMatrix<f64>,
    d2_int_t: DMatrix<f64>,
    mode_lu: Vec<LU<f64, Dyn, Dyn>>,
}

impl std::fmt::Debug for StripSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StripSolver")
            .field("modes", &self.cosine.len())
            .field("vertical_points", &self.lower.len())
            .finish()
    }
}

type CacheKey = (u32, usize, usize);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<StripSolver>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<StripSolver>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl StripSolver {
    /// Shared solver for wavenumber `k` on `grid`, built on first use.
    pub fn shared(k: u32, grid: &GridSpec) -> Arc<StripSolver> {
        let key = (k, grid.nx, grid.ny);
        if let Some(s) = cache().lock().expect("solver cache poisoned").get(&key) {
            return s.clone();
        }
        let built = Arc::new(StripSolver::new(k, grid));
        cache()
            .lock()
            .expect("solver cache poisoned")
            .entry(key)
            .or_insert(built)
            .clone()
    }

    pub fn new(k: u32, grid: &GridSpec) -> Self {
        let m = grid.nx / 2;
        let cosine = CosineGrid::new(k, m);
        let lower = Chebyshev::new(grid.ny, -1.0, 0.0);
        let upper = Chebyshev::new(grid.ny, 0.0, 1.0);
        let n = grid.ny;
        let d1_int = lower.d1.view((1, 1), (n - 2, n - 2)).into_owned();
        let d2_int = lower.d2.view((1, 1), (n - 2, n - 2)).into_owned();
        let mode_lu = (0..=m)
            .map(|p| {
                let wn = p as f64 * k as f64;
                let mut a = d2_int.clone();
                for i in 0..n - 2 {
                    a[(i, i)] -= wn * wn;
                }
                a.lu()
            })
            .collect();
        StripSolver {
            cosine,
            lower,
            upper,
            d1_int_t: d1_int.transpose(),
            d2_int_t: d2_int.transpose(),
            mode_lu,
        }
    }

    pub fn chebyshev(&self, layer: Layer) -> &Chebyshev {
        match layer {
            Layer::Lower => &self.lower,
            Layer::Upper => &self.upper,
        }
    }

    pub fn operator(&self, layer: Layer, profile: &WaveProfile) -> Result<TransformedOperator> {
        TransformedOperator::assemble(layer, profile, &self.cosine.nodes, &self.chebyshev(layer).nodes)
    }

    /// Solves `A(η) w = rhs` with `w = lift` on both walls, where
    /// `lift(Y) = quad Y²/2 + lin Y` is the flat-interface solution.
    pub fn solve(
        self: &Arc<Self>,
        layer: Layer,
        profile: &WaveProfile,
        rhs: f64,
        lin: f64,
        rtol: f64,
    ) -> Result<LayerField> {
        if profile.k() as f64 != self.cosine.k {
            return Err(Error::invalid(format!(
                "profile wavenumber {} does not match solver wavenumber {}",
                profile.k(),
                self.cosine.k
            )));
        }
        let op = self.operator(layer, profile)?;
        let cheb = self.chebyshev(layer);
        let rows = self.cosine.len();
        let ny = cheb.len();
        let ni = ny - 2;
        let quad = rhs;
        // Residual of the lifting: rhs - A(lift), on interior columns.
        let mut forcing = vec![0.0; rows * ni];
        for j in 0..ni {
            let yt = cheb.nodes[j + 1];
            for i in 0..rows {
                let yy = op.yy[(i, j + 1)];
                let dy = op.dy[(i, j + 1)];
                forcing[j * rows + i] = rhs - yy * quad - dy * (quad * yt + lin);
            }
        }
        let xy_int = op.xy.columns(1, ni).into_owned();
        let yy_int = op.yy.columns(1, ni).into_owned();
        let dy_int = op.dy.columns(1, ni).into_owned();
        let apply = |u: &[f64], out: &mut [f64]| {
            let um = DMatrix::from_column_slice(rows, ni, u);
            let uy = &um * &self.d1_int_t;
            let uyy = &um * &self.d2_int_t;
            let uxx = &self.cosine.dxx * &um;
            let uxy = &self.cosine.dx * &uy;
            for idx in 0..rows * ni {
                out[idx] = uxx[idx] + xy_int[idx] * uxy[idx] + yy_int[idx] * uyy[idx] + dy_int[idx] * uy[idx];
            }
        };
        let precond = |r: &[f64], out: &mut [f64]| {
            let rm = DMatrix::from_column_slice(rows, ni, r);
            let hat = &self.cosine.forward * rm;
            let mut sol = DMatrix::zeros(rows, ni);
            for p in 0..rows {
                let b = DVector::from_iterator(ni, hat.row(p).iter().copied());
                let x = self.mode_lu[p].solve(&b).unwrap_or(b);
                for j in 0..ni {
                    sol[(p, j)] = x[j];
                }
            }
            let back = &self.cosine.backward * sol;
            out.copy_from_slice(back.as_slice());
        };
        let (u, stats) = gmres(rows * ni, apply, precond, &forcing, 80, 2000, rtol, 1e-300)
            .map_err(|e| match e {
                Error::NoConvergence { iterations, residual } => Error::numerical(
                    "elliptic solve",
                    format!(
                        "GMRES stalled after {iterations} iterations at relative residual {residual:e} \
                         (profile sup norm {:.3e})",
                        profile.sup_norm()
                    ),
                ),
                other => other,
            })?;
        let mut values = DMatrix::zeros(rows, ny);
        for j in 0..ny {
            let yt = cheb.nodes[j];
            let lift = 0.5 * quad * yt * yt + lin * yt;
            for i in 0..rows {
                values[(i, j)] = lift + if j == 0 || j == ny - 1 { 0.0 } else { u[(j - 1) * rows + i] };
            }
        }
        // walls carry the exact Dirichlet data
        let (a, b) = layer.interval();
        for (j, yt) in [(0, a), (ny - 1, b)] {
            let v = 0.5 * quad * yt * yt + lin * yt;
            for i in 0..rows {
                values[(i, j)] = v;
            }
        }
        Ok(LayerField::new(self.clone(), layer, profile.clone(), values, stats))
    }
}

/// A discrete solution on one layer, with a spectral evaluator.
#[derive(Debug, Clone)]
pub struct LayerField {
    solver: Arc<StripSolver>,
    pub layer: Layer,
    pub profile: WaveProfile,
    /// Nodal values, rows = half-period `x` nodes, columns = Chebyshev nodes.
    pub values: DMatrix<f64>,
    pub stats: SolveStats,
    dy: DMatrix<f64>,
    coeff: [DMatrix<f64>; 3],
}

impl LayerField {
    fn new(solver: Arc<StripSolver>, layer: Layer, profile: WaveProfile, values: DMatrix<f64>, stats: SolveStats) -> Self {
        let cheb = solver.chebyshev(layer);
        let dy = &values * cheb.d1.transpose();
        let dyy = &values * cheb.d2.transpose();
        let coeff = [
            &solver.cosine.forward * &values,
            &solver.cosine.forward * &dy,
            &solver.cosine.forward * &dyy,
        ];
        LayerField {
            solver,
            layer,
            profile,
            values,
            stats,
            dy,
            coeff,
        }
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.solver.cosine.nodes
    }

    pub fn y_nodes(&self) -> &[f64] {
        &self.solver.chebyshev(self.layer).nodes
    }

    pub fn surface_index(&self) -> usize {
        match self.layer {
            Layer::Lower => self.values.ncols() - 1,
            Layer::Upper => 0,
        }
    }

    /// `w_Y` at the interface, on the half-period nodes.
    pub fn surface_dy(&self) -> Vec<f64> {
        self.dy.column(self.surface_index()).iter().copied().collect()
    }

    /// `w_x` at the interface (zero up to rounding: the trace is constant).
    pub fn surface_dx(&self) -> Vec<f64> {
        let col = self.values.column(self.surface_index()).into_owned();
        (&self.solver.cosine.dx * col).iter().copied().collect()
    }

    /// Nodal derivative columns at abscissa `x`, for repeated evaluation
    /// along a vertical line.
    pub fn column(&self, x: f64) -> FieldColumn<'_> {
        let k = self.solver.cosine.k;
        let modes = self.coeff[0].nrows();
        let ny = self.values.ncols();
        let mut nodal = [(); 6].map(|_| vec![0.0; ny]);
        let (s1, c1) = (k * x).sin_cos();
        let (mut s, mut c) = (0.0f64, 1.0f64);
        for p in 0..modes {
            let wn = p as f64 * k;
            for j in 0..ny {
                let (a0, a1, a2) = (self.coeff[0][(p, j)], self.coeff[1][(p, j)], self.coeff[2][(p, j)]);
                nodal[0][j] += a0 * c;
                nodal[1][j] -= wn * a0 * s;
                nodal[2][j] += a1 * c;
                nodal[3][j] -= wn * wn * a0 * c;
                nodal[4][j] -= wn * a1 * s;
                nodal[5][j] += a2 * c;
            }
            let (sn, cn) = (s * c1 + c * s1, c * c1 - s * s1);
            s = sn;
            c = cn;
        }
        FieldColumn {
            cheb: self.solver.chebyshev(self.layer),
            nodal,
        }
    }

    /// Transformed-coordinate derivatives at `(x, Y)`.
    pub fn derivs(&self, x: f64, yt: f64) -> Derivs {
        self.column(x).at(yt)
    }

    pub fn value(&self, x: f64, yt: f64) -> f64 {
        self.derivs(x, yt).v
    }

    /// Native nodal samples unfolded to a full period.
    pub fn to_field_grid(&self) -> FieldGrid {
        let m = self.solver.cosine.m;
        let k = self.solver.cosine.k;
        let nx = 2 * m;
        let ny = self.values.ncols();
        let x: Vec<f64> = (0..nx).map(|i| i as f64 * std::f64::consts::PI / (k * m as f64)).collect();
        let mut values = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let src = if i <= m { i } else { nx - i };
            for j in 0..ny {
                values.push(self.values[(src, j)]);
            }
        }
        FieldGrid {
            layer: self.layer,
            k: self.profile.k(),
            x,
            y: self.y_nodes().to_vec(),
            values,
            pushforward: Some(self.profile.clone()),
        }
    }

    /// Largest nodal residual of `A(η) w - rhs` on interior nodes.
    pub fn residual(&self, rhs: f64) -> Result<f64> {
        let op = self.solver.operator(self.layer, &self.profile)?;
        let cheb = self.solver.chebyshev(self.layer);
        let wyy = &self.values * cheb.d2.transpose();
        let wxx = &self.solver.cosine.dxx * &self.values;
        let wxy = &self.solver.cosine.dx * &self.dy;
        let ny = self.values.ncols();
        let mut worst: f64 = 0.0;
        for j in 1..ny - 1 {
            for i in 0..self.values.nrows() {
                let r = wxx[(i, j)] + op.xy[(i, j)] * wxy[(i, j)] + op.yy[(i, j)] * wyy[(i, j)] + op.dy[(i, j)] * self.dy[(i, j)]
                    - rhs;
                worst = worst.max(r.abs());
            }
        }
        Ok(worst)
    }
}

/// Derivatives of a [`LayerField`] along one vertical line.
pub struct FieldColumn<'a> {
    cheb: &'a Chebyshev,
    nodal: [Vec<f64>; 6],
}

impl FieldColumn<'_> {
    pub fn at(&self, yt: f64) -> Derivs {
        let row = self.cheb.interpolation_row(yt);
        let dot = |v: &[f64]| row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        Derivs {
            v: dot(&self.nodal[0]),
            x: dot(&self.nodal[1]),
            y: dot(&self.nodal[2]),
            xx: dot(&self.nodal[3]),
            xy: dot(&self.nodal[4]),
            yy: dot(&self.nodal[5]),
        }
    }
}
