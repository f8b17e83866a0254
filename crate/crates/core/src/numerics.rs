//! Discretisation building blocks: Chebyshev collocation in the vertical,
//! cosine collocation on the half period, restarted GMRES and a Numerov
//! two-point boundary value solver.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Chebyshev–Gauss–Lobatto collocation on `[a, b]` with increasing nodes
/// `y_j = a + (b - a)(1 - cos(jπ/n))/2`, `j = 0..=n`.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    a: f64,
    b: f64,
}

impl Chebyshev {
    /// `points` nodes (`points >= 3`) on `[a, b]`.
    pub fn new(points: usize, a: f64, b: f64) -> Self {
        assert!(points >= 3, "need at least 3 Chebyshev points");
        let n = points - 1;
        let nf = n as f64;
        let nodes: Vec<f64> = (0..=n)
            .map(|j| {
                if j == 0 {
                    a
                } else if j == n {
                    b
                } else {
                    a + (b - a) * 0.5 * (1.0 - (j as f64 * PI / nf).cos())
                }
            })
            .collect();
        let weights: Vec<f64> = (0..=n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * sign
                } else {
                    sign
                }
            })
            .collect();
        // Node differences from the product form, free of cancellation.
        let diff = |i: usize, j: usize| -> f64 {
            (b - a)
                * ((i + j) as f64 * PI / (2.0 * nf)).sin()
                * ((i as f64 - j as f64) * PI / (2.0 * nf)).sin()
        };
        let mut d1 = DMatrix::zeros(n + 1, n + 1);
        let mut d2 = DMatrix::zeros(n + 1, n + 1);
        for i in 0..=n {
            for j in 0..=n {
                if i != j {
                    d1[(i, j)] = weights[j] / weights[i] / diff(i, j);
                }
            }
        }
        for i in 0..=n {
            let mut s = 0.0;
            for j in 0..=n {
                if i != j {
                    s += d1[(i, j)];
                }
            }
            d1[(i, i)] = -s;
        }
        for i in 0..=n {
            for j in 0..=n {
                if i != j {
                    d2[(i, j)] = 2.0 * d1[(i, j)] * (d1[(i, i)] - 1.0 / diff(i, j));
                }
            }
            let mut s = 0.0;
            for j in 0..=n {
                if i != j {
                    s += d2[(i, j)];
                }
            }
            d2[(i, i)] = -s;
        }
        Chebyshev {
            nodes,
            weights,
            d1,
            d2,
            a,
            b,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Barycentric interpolation of nodal `values` at `y`.
    pub fn interpolate(&self, values: &[f64], y: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, (&yj, &wj)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let d = y - yj;
            if d == 0.0 {
                return values[j];
            }
            let t = wj / d;
            num += t * values[j];
            den += t;
        }
        num / den
    }

    /// Barycentric weights `t_j` with `p(y) = sum_j t_j f_j`; lets several
    /// nodal vectors be interpolated at the same point.
    pub fn interpolation_row(&self, y: f64) -> Vec<f64> {
        let mut row = vec![0.0; self.nodes.len()];
        if let Some(j) = self.nodes.iter().position(|&yj| yj == y) {
            row[j] = 1.0;
            return row;
        }
        let mut den = 0.0;
        for (j, (&yj, &wj)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let t = wj / (y - yj);
            row[j] = t;
            den += t;
        }
        for t in &mut row {
            *t /= den;
        }
        row
    }
}

/// Cosine collocation for even, `2π/k`-periodic functions sampled on the
/// half-period nodes `x_i = iπ/(kM)`, `i = 0..=M`.
#[derive(Debug, Clone)]
pub struct CosineGrid {
    pub k: f64,
    pub m: usize,
    pub nodes: Vec<f64>,
    /// Nodal values to cosine coefficients `c_0..c_M`.
    pub forward: DMatrix<f64>,
    /// Coefficients to nodal values.
    pub backward: DMatrix<f64>,
    /// Second derivative, nodal to nodal (even to even).
    pub dxx: DMatrix<f64>,
    /// First derivative, nodal even to nodal odd.
    pub dx: DMatrix<f64>,
}

impl CosineGrid {
    pub fn new(k: u32, m: usize) -> Self {
        assert!(m >= 2 && k >= 1);
        let kf = k as f64;
        let mf = m as f64;
        let nodes = (0..=m).map(|i| i as f64 * PI / (kf * mf)).collect();
        let angle = |p: usize, i: usize| PI * ((p * i) % (2 * m)) as f64 / mf;
        let forward = DMatrix::from_fn(m + 1, m + 1, |p, i| {
            let gamma = if p == 0 || p == m { 1.0 } else { 2.0 };
            let edge = if i == 0 || i == m { 0.5 } else { 1.0 };
            gamma / mf * edge * angle(p, i).cos()
        });
        let backward = DMatrix::from_fn(m + 1, m + 1, |i, p| angle(p, i).cos());
        let sines = DMatrix::from_fn(m + 1, m + 1, |i, p| angle(p, i).sin());
        let wn = DVector::from_fn(m + 1, |p, _| p as f64 * kf);
        let dxx = &backward * DMatrix::from_diagonal(&wn.map(|v| -v * v)) * &forward;
        let dx = -(sines * DMatrix::from_diagonal(&wn)) * &forward;
        CosineGrid {
            k: kf,
            m,
            nodes,
            forward,
            backward,
            dxx,
            dx,
        }
    }

    pub fn len(&self) -> usize {
        self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Trapezoidal period average of even nodal data.
    pub fn mean(&self, values: &[f64]) -> f64 {
        let m = self.m;
        let mut inner = values[1..m].to_vec();
        inner.push(0.5 * (values[0] + values[m]));
        crate::model::pairwise_sum(&inner) / m as f64
    }

    /// Full-period samples `f(jπ/(kM))`, `j = 0..2M`, from half-period data.
    pub fn unfold(&self, values: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..2 * m)
            .map(|j| if j <= m { values[j] } else { values[2 * m - j] })
            .collect()
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    pub rhs_norm: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Restarted GMRES with right preconditioning. `apply(x, out)` computes
/// `A x`, `precond(r, out)` approximates `A^{-1} r`. Converges when
/// `|b - A x| <= rtol |b| + atol`; the returned residual is recomputed
/// explicitly.
pub fn gmres(
    n: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precond: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    restart: usize,
    max_iter: usize,
    rtol: f64,
    atol: f64,
) -> Result<(Vec<f64>, SolveStats)> {
    let bnorm = norm(b);
    let target = rtol * bnorm + atol;
    let mut x = vec![0.0; n];
    let mut stats = SolveStats {
        iterations: 0,
        residual: bnorm,
        rhs_norm: bnorm,
    };
    if bnorm <= atol {
        stats.residual = bnorm;
        return Ok((x, stats));
    }
    let mut r = b.to_vec();
    let mut tmp = vec![0.0; n];
    let mut z = vec![0.0; n];
    while stats.iterations < max_iter {
        let beta = norm(&r);
        stats.residual = beta;
        if beta <= target {
            return Ok((x, stats));
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..restart {
            precond(&basis[j], &mut z);
            apply(&z, &mut tmp);
            let mut w = tmp.clone();
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    h[i][j] += c;
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = h[j][j].hypot(h[j + 1][j]);
            if denom == 0.0 {
                return Err(Error::numerical("gmres", "breakdown: zero Krylov direction"));
            }
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            stats.iterations += 1;
            if g[j + 1].abs() <= 0.5 * target || hn == 0.0 || stats.iterations >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // back substitution for the Krylov coefficients
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for l in i + 1..used {
                s -= h[i][l] * y[l];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            for (u, vi) in update.iter_mut().zip(v) {
                *u += yi * vi;
            }
        }
        precond(&update, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
        apply(&x, &mut tmp);
        for i in 0..n {
            r[i] = b[i] - tmp[i];
        }
    }
    let res = norm(&r);
    stats.residual = res;
    if res <= target {
        return Ok((x, stats));
    }
    Err(Error::NoConvergence {
        iterations: stats.iterations,
        residual: res / bnorm,
    })
}

/// Solves `w'' - q w = f` on a uniform grid `y_0 < ... < y_n` with Dirichlet
/// values `w(y_0) = left`, `w(y_n) = right`, by the fourth-order Numerov
/// scheme. `f` holds the forcing at every node.
pub fn numerov_bvp(q: f64, f: &[f64], h: f64, left: f64, right: f64) -> Result<Vec<f64>> {
    let n = f.len() - 1;
    if n < 2 {
        return Err(Error::invalid("Numerov solve needs at least 3 nodes"));
    }
    let off = 1.0 - h * h * q / 12.0;
    let diag = -2.0 * (1.0 + 5.0 * h * h * q / 12.0);
    let interior = n - 1;
    let mut rhs: Vec<f64> = (1..n)
        .map(|i| h * h / 12.0 * (f[i + 1] + 10.0 * f[i] + f[i - 1]))
        .collect();
    rhs[0] -= off * left;
    rhs[interior - 1] -= off * right;
    // Thomas algorithm, constant coefficients
    let mut c_prime = vec![0.0; interior];
    let mut d_prime = vec![0.0; interior];
    for i in 0..interior {
        let denom = diag - if i > 0 { off * c_prime[i - 1] } else { 0.0 };
        if denom.abs() < 1e-300 {
            return Err(Error::numerical("numerov_bvp", "singular tridiagonal system"));
        }
        c_prime[i] = off / denom;
        d_prime[i] = (rhs[i] - if i > 0 { off * d_prime[i - 1] } else { 0.0 }) / denom;
    }
    let mut w = vec![0.0; n + 1];
    w[0] = left;
    w[n] = right;
    for i in (0..interior).rev() {
        w[i + 1] = d_prime[i] - if i + 1 < interior { c_prime[i] * w[i + 2] } else { 0.0 };
    }
    Ok(w)
}

/// Fourth-order one-sided derivative at the first node of a uniform grid.
pub fn forward_derivative(values: &[f64], h: f64) -> f64 {
    (-25.0 * values[0] + 48.0 * values[1] - 36.0 * values[2] + 16.0 * values[3] - 3.0 * values[4])
        / (12.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_differentiates_smooth_functions() {
        let cheb = Chebyshev::new(33, -1.0, 0.0);
        let f: Vec<f64> = cheb.nodes.iter().map(|y| (3.0 * y).sin()).collect();
        let df = &cheb.d1 * DVector::from_vec(f.clone());
        let d2f = &cheb.d2 * DVector::from_vec(f.clone());
        for (i, y) in cheb.nodes.iter().enumerate() {
            assert!((df[i] - 3.0 * (3.0 * y).cos()).abs() < 1e-11);
            assert!((d2f[i] + 9.0 * (3.0 * y).sin()).abs() < 1e-9);
        }
        assert_eq!(cheb.nodes[0], -1.0);
        assert_eq!(*cheb.nodes.last().unwrap(), 0.0);
        assert!(cheb.nodes.windows(2).all(|w| w[1] > w[0]));
        let v = cheb.interpolate(&f, -0.3337);
        assert!((v - (3.0f64 * -0.3337).sin()).abs() < 1e-14);
        let row = cheb.interpolation_row(-0.71);
        let r: f64 = row.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert!((r - (3.0f64 * -0.71).sin()).abs() < 1e-14);
    }

    #[test]
    fn cosine_grid_derivatives() {
        let k = 2;
        let grid = CosineGrid::new(k, 16);
        let f: Vec<f64> = grid
            .nodes
            .iter()
            .map(|x| 0.3 + (2.0 * x).cos() - 0.2 * (6.0 * x).cos())
            .collect();
        let fv = DVector::from_vec(f.clone());
        let c = &grid.forward * &fv;
        assert!((c[0] - 0.3).abs() < 1e-15 && (c[1] - 1.0).abs() < 1e-14 && (c[3] + 0.2).abs() < 1e-14);
        let dx = &grid.dx * &fv;
        let dxx = &grid.dxx * &fv;
        for (i, x) in grid.nodes.iter().enumerate() {
            assert!((dx[i] - (-2.0 * (2.0 * x).sin() + 1.2 * (6.0 * x).sin())).abs() < 1e-12);
            assert!((dxx[i] - (-4.0 * (2.0 * x).cos() + 7.2 * (6.0 * x).cos())).abs() < 1e-11);
        }
        assert!((grid.mean(&f) - 0.3).abs() < 1e-15);
        let full = grid.unfold(&f);
        assert_eq!(full.len(), 32);
        assert_eq!(full[17], f[15]);
    }

    #[test]
    fn gmres_solves_small_system() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, -1.0, 0.0, -1.0, 2.0]);
        let b = [1.0, 2.0, 3.0];
        let (x, stats) = gmres(
            3,
            |v, out| {
                let r = &a * DVector::from_column_slice(v);
                out.copy_from_slice(r.as_slice());
            },
            |v, out| out.copy_from_slice(v),
            &b,
            10,
            50,
            1e-14,
            0.0,
        )
        .unwrap();
        let exact = a.lu().solve(&DVector::from_column_slice(&b)).unwrap();
        for i in 0..3 {
            assert!((x[i] - exact[i]).abs() < 1e-13);
        }
        assert!(stats.iterations <= 3);
    }

    #[test]
    fn numerov_is_fourth_order() {
        // w'' - 4w = -4 sin(πy)(1 + π²/4), w = sin(πy)
        let solve = |n: usize| {
            let h = 1.0 / n as f64;
            let f: Vec<f64> = (0..=n)
                .map(|i| {
                    let y = i as f64 * h;
                    -(PI * PI + 4.0) * (PI * y).sin()
                })
                .collect();
            let w = numerov_bvp(4.0, &f, h, 0.0, 0.0).unwrap();
            let err = (0..=n)
                .map(|i| (w[i] - (PI * i as f64 * h).sin()).abs())
                .fold(0.0, f64::max);
            (err, forward_derivative(&w, h))
        };
        let (e1, d1) = solve(64);
        let (e2, d2) = solve(128);
        assert!(e1 / e2 > 14.0, "ratio {}", e1 / e2);
        assert!((d2 - PI).abs() < 1e-6 && (d1 - PI).abs() < 1e-5);
    }
}
