//! Krylov solves for `(Delta - c) u = b` on the interior nodes, Dirichlet
//! zero on the boundary row.
//!
//! GMRES is left-preconditioned by the angular average of the operator,
//! which is block diagonal over Fourier modes and exact for circular domains
//! with radially symmetric `c`. Residuals are therefore measured in the
//! preconditioned norm: the size of the field correction still to come, not
//! the raw collocation residual, which is dominated by rounding in the
//! `O(n_r^4)` second-derivative entries.

use nalgebra::{DMatrix, Dyn, LU};
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::geometry::MapCoefficients;
use super::grid::DiskGrid;

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    /// Absolute tolerance on the preconditioned residual 2-norm.
    pub tol: f64,
    pub restart: usize,
    pub max_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresStats {
    pub iterations: usize,
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Restarted GMRES on `P^{-1} A x = P^{-1} b`, starting from `x`.
pub fn gmres<A, P>(mut apply: A, mut precond: P, b: &[f64], x: &mut [f64], opts: GmresOptions) -> Result<GmresStats>
where
    A: FnMut(&[f64]) -> Vec<f64>,
    P: FnMut(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut total = 0usize;
    loop {
        let ax = apply(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let r = precond(&r);
        let beta = norm(&r);
        if !beta.is_finite() {
            return Err(Error::LinearSolve("non-finite residual".into()));
        }
        if beta <= opts.tol {
            return Ok(GmresStats {
                iterations: total,
                residual: beta,
            });
        }
        if total >= opts.max_iters {
            return Err(Error::LinearSolve(format!(
                "GMRES stalled at preconditioned residual {beta:.3e} after {total} iterations"
            )));
        }

        let m = opts.restart;
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut steps = 0;
        for j in 0..m {
            let mut w = precond(&apply(&v[j]));
            // modified Gram-Schmidt, two passes
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let c = dot(&w, vi);
                    h[i][j] += c;
                    for (wk, vk) in w.iter_mut().zip(vi) {
                        *wk -= c * vk;
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
            let d = h[j][j].hypot(h[j + 1][j]);
            if d == 0.0 {
                steps = j;
                break;
            }
            cs[j] = h[j][j] / d;
            sn[j] = h[j + 1][j] / d;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            steps = j + 1;
            total += 1;
            if g[j + 1].abs() <= opts.tol || hn == 0.0 || total >= opts.max_iters {
                break;
            }
            v.push(w.iter().map(|wk| wk / hn).collect());
        }
        // back substitution
        let mut y = vec![0.0; steps];
        for i in (0..steps).rev() {
            let mut acc = g[i];
            for k in i + 1..steps {
                acc -= h[i][k] * y[k];
            }
            y[i] = acc / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&v[k]) {
                *xi += yk * vi;
            }
        }
        if steps == 0 {
            return Err(Error::LinearSolve("GMRES breakdown".into()));
        }
        debug_assert_eq!(x.len(), n);
    }
}

/// `(Delta - c)` restricted to interior nodes, boundary values zero.
pub struct InteriorOperator<'a> {
    pub grid: &'a DiskGrid,
    pub coeffs: &'a MapCoefficients,
    /// Pointwise reaction coefficient on the full grid, or `None` for zero.
    pub reaction: Option<&'a [f64]>,
}

impl InteriorOperator<'_> {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.grid.n_theta();
        let mut u = vec![0.0; self.grid.len()];
        u[n..].copy_from_slice(x);
        let mut lap = self.coeffs.laplacian(self.grid, &u);
        if let Some(c) = self.reaction {
            for (l, (ci, ui)) in lap.iter_mut().zip(c.iter().zip(&u)) {
                *l -= ci * ui;
            }
        }
        lap.drain(..n);
        lap
    }
}

/// Mode-by-mode LU factors of the angularly averaged interior operator.
pub struct ModalPreconditioner {
    n_theta: usize,
    factors: Vec<LU<f64, Dyn, Dyn>>,
}

impl ModalPreconditioner {
    /// `reaction` holds one (averaged) value per radial node.
    pub fn new(grid: &DiskGrid, coeffs: &MapCoefficients, reaction: &[f64]) -> Result<Self> {
        let n = grid.n_theta();
        let m = grid.n_r();
        let [a_ss, a_s, a_tt] = coeffs.radial_means(grid);
        let mut factors = Vec::with_capacity(n / 2 + 1);
        for k in 0..=(n / 2) as i64 {
            let d1 = grid.d1(k);
            let d2 = grid.d2(k);
            let kk = (k * k) as f64;
            let mat = DMatrix::from_fn(m - 1, m - 1, |i, l| {
                let (ii, ll) = (i + 1, l + 1);
                let mut v = a_ss[ii] * d2[(ii, ll)] + a_s[ii] * d1[(ii, ll)];
                if ii == ll {
                    v -= kk * a_tt[ii] + reaction[ii];
                }
                v
            });
            let lu = mat.lu();
            if !lu.is_invertible() {
                return Err(Error::LinearSolve(format!("singular preconditioner block for k = {k}")));
            }
            factors.push(lu);
        }
        Ok(Self { n_theta: n, factors })
    }

    pub fn apply(&self, grid: &DiskGrid, x: &[f64]) -> Vec<f64> {
        let n = self.n_theta;
        let rows = x.len() / n;
        let mut modes = grid.to_modes(x);
        let mut col = DMatrix::<f64>::zeros(rows, 2);
        for j in 0..n {
            let k = grid.wavenumber(j).unsigned_abs() as usize;
            for i in 0..rows {
                let z = modes[i * n + j];
                col[(i, 0)] = z.re;
                col[(i, 1)] = z.im;
            }
            self.factors[k].solve_mut(&mut col);
            for i in 0..rows {
                modes[i * n + j] = Complex64::new(col[(i, 0)], col[(i, 1)]);
            }
        }
        grid.to_phys(&modes)
    }
}
