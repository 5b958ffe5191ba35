//! Nutrient and pressure solves on a perturbed disk.

use serde::{Deserialize, Serialize};

use crate::cheb;
use crate::error::{Error, Result};
use crate::linear::ShapeState;
use crate::model::NutrientModel;
use crate::spectrum::ModelParameters;

use super::geometry::{BoundaryGeometry, MapCoefficients};
use super::grid::{dealias, DiskGrid};
use super::linsolve::{gmres, GmresOptions, InteriorOperator, ModalPreconditioner};
use super::GridSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Nutrient,
    Pressure,
}

/// A field on the mapped disk grid. Row `i` of `values` lives at the
/// reference radius `s[i]`, whose physical radius (as a fraction of `R`)
/// is `physical_radius[i * n_theta + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskField {
    pub kind: FieldKind,
    pub n_r: usize,
    pub n_theta: usize,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub physical_radius: Vec<f64>,
    pub boundary_trace: Vec<f64>,
    /// `grad u . nu` on the boundary.
    pub normal_derivative_trace: Vec<f64>,
    /// `grad u . grad N` on the boundary, the quantity entering the velocity.
    pub flux_trace: Vec<f64>,
    /// Final preconditioned residual (max norm).
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    shape: ShapeState,
}

impl DiskField {
    pub fn shape(&self) -> &ShapeState {
        &self.shape
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Values on the diameter through `theta_j`, from `s = 1` to `s = -1`.
    fn diameter(&self, j: usize) -> Vec<f64> {
        let n = self.n_theta;
        let opposite = (j + n / 2) % n;
        let mut line: Vec<f64> = (0..self.n_r).map(|i| self.values[i * n + j]).collect();
        line.extend((0..self.n_r).rev().map(|i| self.values[i * n + opposite]));
        line
    }

    fn interpolate(&self, j: usize, s: f64) -> f64 {
        let deg = 2 * self.n_r - 1;
        cheb::barycentric(&cheb::lobatto(deg), &cheb::lobatto_weights(deg), &self.diameter(j), s)
    }

    pub fn value_at_center(&self) -> f64 {
        self.interpolate(0, 0.0)
    }

    /// Value at the physical point `R r (cos theta_j, sin theta_j)`.
    pub fn value_at_polar(&self, r: f64, j: usize) -> Result<f64> {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / self.n_theta as f64;
        let h = |s: f64| -> f64 {
            let mut acc = self.shape.coeffs()[0].re;
            for (k, c) in self.shape.coeffs().iter().enumerate().skip(1) {
                acc += 2.0 * (c * num_complex::Complex64::from_polar(s.powi(k as i32), k as f64 * theta)).re;
            }
            acc
        };
        let outer = 1.0 + h(1.0);
        if !(r >= 0.0 && r <= outer) {
            return Err(Error::InvalidParameter(format!(
                "radius {r} lies outside the domain (boundary at {outer})"
            )));
        }
        // s (1 + H(s)) is increasing on [0, 1]; bisect for the reference radius
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * (1.0 + h(mid)) < r {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        Ok(self.interpolate(j, 0.5 * (lo + hi)))
    }

    /// Mean over the circle of physical radius `R r`, using the grid angles.
    pub fn circle_mean(&self, r: f64) -> Result<f64> {
        let mut acc = 0.0;
        for j in 0..self.n_theta {
            acc += self.value_at_polar(r, j)?;
        }
        Ok(acc / self.n_theta as f64)
    }
}

/// Geometry and map coefficients of one shape on a fixed grid.
pub struct DiskProblem<'g> {
    grid: &'g DiskGrid,
    shape: ShapeState,
    geometry: BoundaryGeometry,
    coeffs: MapCoefficients,
}

impl<'g> DiskProblem<'g> {
    /// Modes above `n_theta / 3` are dropped from the shape.
    pub fn new(grid: &'g DiskGrid, shape: &ShapeState) -> Result<Self> {
        let keep = (grid.n_theta() / 3).min(shape.n_modes());
        let shape = shape.resized(keep);
        let geometry = BoundaryGeometry::new(&shape, grid.n_theta())?;
        let coeffs = MapCoefficients::new(grid, &shape)?;
        Ok(Self {
            grid,
            shape,
            geometry,
            coeffs,
        })
    }

    pub fn geometry(&self) -> &BoundaryGeometry {
        &self.geometry
    }

    pub fn coefficients(&self) -> &MapCoefficients {
        &self.coeffs
    }

    fn radius(&self) -> f64 {
        self.shape.radius()
    }

    /// `(grad u . grad N, grad u . nu)` on the boundary.
    fn fluxes(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (us, ut) = self.grid.boundary_gradient(u);
        let geo = &self.geometry;
        let c = &self.coeffs;
        let mut flux = Vec::with_capacity(us.len());
        let mut normal = Vec::with_capacity(us.len());
        for j in 0..us.len() {
            let ur = us[j] / c.g_s[j];
            let uth = (ut[j] + c.s_theta[j] * us[j]) / c.g[j];
            let f = ur - geo.rho_p[j] / (1.0 + geo.rho[j]) * uth;
            flux.push(f);
            normal.push(f / geo.normal_field_factor[j]);
        }
        (flux, normal)
    }

    fn field(&self, kind: FieldKind, values: Vec<f64>, residual: f64, history: Vec<f64>, iterations: usize) -> DiskField {
        let n = self.grid.n_theta();
        let (flux, normal) = self.fluxes(&values);
        let r = self.radius();
        DiskField {
            kind,
            n_r: self.grid.n_r(),
            n_theta: n,
            s: self.grid.s().to_vec(),
            boundary_trace: values[..n].to_vec(),
            physical_radius: self.coeffs.g.iter().map(|g| g / r).collect(),
            values,
            normal_derivative_trace: normal,
            flux_trace: flux,
            residual,
            iterations,
            residual_history: history,
            shape: self.shape.clone(),
        }
    }

    fn row_means(&self, v: &[f64]) -> Vec<f64> {
        let n = self.grid.n_theta();
        v.chunks(n).map(|row| row.iter().sum::<f64>() / n as f64).collect()
    }

    /// Newton iteration for `Delta psi = f(psi)`, `psi = 1` on the boundary.
    pub fn solve_nutrient(
        &self,
        model: &NutrientModel,
        initial: Option<&[f64]>,
        settings: &GridSettings,
    ) -> Result<DiskField> {
        let grid = self.grid;
        let n = grid.n_theta();
        let len = grid.len();
        let mut w = match initial {
            Some(v) if v.len() == len => v.to_vec(),
            _ => vec![1.0; len],
        };
        w[..n].iter_mut().for_each(|v| *v = 1.0);
        let mut history = Vec::new();
        for it in 0..=settings.max_newton_iters {
            let lap = self.coeffs.laplacian(grid, &w);
            let r: Vec<f64> = (n..len).map(|p| lap[p] - model.f(w[p])).collect();
            let c: Vec<f64> = w.iter().map(|&v| model.fprime(v)).collect();
            let pre = ModalPreconditioner::new(grid, &self.coeffs, &self.row_means(&c))?;
            let pr = pre.apply(grid, &r);
            let res = pr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !res.is_finite() {
                return Err(Error::NewtonDivergence { history });
            }
            history.push(res);
            if res <= settings.newton_tol {
                return Ok(self.field(FieldKind::Nutrient, w, res, history, it));
            }
            if it == settings.max_newton_iters {
                break;
            }
            let op = InteriorOperator {
                grid,
                coeffs: &self.coeffs,
                reaction: Some(&c),
            };
            let b: Vec<f64> = r.iter().map(|v| -v).collect();
            let mut delta = vec![0.0; len - n];
            let pr_norm = pr.iter().map(|v| v * v).sum::<f64>().sqrt();
            // a loose inner solve would leave a residual just under newton_tol,
            // which swamps Phi for small shapes; solve each correction to the floor
            let opts = GmresOptions {
                tol: (1e-4 * pr_norm).min(0.01 * settings.newton_tol).max(settings.linear_tol),
                restart: settings.gmres_restart,
                max_iters: settings.max_gmres_iters,
            };
            gmres(|x| op.apply(x), |x| pre.apply(grid, x), &b, &mut delta, opts)?;
            for (wp, d) in w[n..].iter_mut().zip(&delta) {
                *wp += d;
            }
        }
        Err(Error::NewtonDivergence { history })
    }

    /// `Delta p = 0` with `p = kappa - (A G R^2 / 4)(1 + rho)^2` on the boundary.
    pub fn solve_pressure(&self, a: f64, g: f64, settings: &GridSettings) -> Result<DiskField> {
        let grid = self.grid;
        let n = grid.n_theta();
        let len = grid.len();
        let r = self.radius();
        let geo = &self.geometry;
        let data: Vec<f64> = (0..n)
            .map(|j| geo.curvature[j] - a * g * r * r / 4.0 * (1.0 + geo.rho[j]).powi(2))
            .collect();
        let data = dealias(&data, grid);

        // lift: harmonic extension in the reference variables
        let modes = grid.to_modes(&data);
        let mut lifted = Vec::with_capacity(len);
        for &s in grid.s() {
            let row: Vec<_> = modes
                .iter()
                .enumerate()
                .map(|(j, c)| c * s.powi(grid.wavenumber(j).unsigned_abs() as i32))
                .collect();
            lifted.extend(grid.to_phys(&row));
        }
        lifted[..n].copy_from_slice(&data);

        let zeros = vec![0.0; grid.n_r()];
        let pre = ModalPreconditioner::new(grid, &self.coeffs, &zeros)?;
        let op = InteriorOperator {
            grid,
            coeffs: &self.coeffs,
            reaction: None,
        };
        let lap = self.coeffs.laplacian(grid, &lifted);
        let b: Vec<f64> = lap[n..].iter().map(|v| -v).collect();
        let pb = pre.apply(grid, &b);
        let scale = pb.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = vec![0.0; len - n];
        let opts = GmresOptions {
            tol: (settings.linear_tol * scale).max(0.01 * settings.newton_tol),
            restart: settings.gmres_restart,
            max_iters: settings.max_gmres_iters,
        };
        let stats = gmres(|x| op.apply(x), |x| pre.apply(grid, x), &b, &mut v, opts)?;
        let mut q = lifted;
        for (qp, vp) in q[n..].iter_mut().zip(&v) {
            *qp += vp;
        }
        let lap = self.coeffs.laplacian(grid, &q);
        let res = pre
            .apply(grid, &lap[n..])
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(self.field(FieldKind::Pressure, q, res, vec![res], stats.iterations))
    }
}

fn check_radius(shape: &ShapeState, params: &ModelParameters) -> Result<()> {
    params.validate()?;
    if (shape.radius() - params.r).abs() > 1e-12 * params.r {
        return Err(Error::InvalidParameter(format!(
            "shape radius {} differs from parameter radius {}",
            shape.radius(),
            params.r
        )));
    }
    Ok(())
}

/// Nutrient field on the domain bounded by `shape`.
pub fn solve_nutrient(
    shape: &ShapeState,
    model: &NutrientModel,
    params: &ModelParameters,
    settings: &GridSettings,
) -> Result<DiskField> {
    check_radius(shape, params)?;
    settings.validate()?;
    let grid = DiskGrid::new(settings.n_r, settings.n_theta)?;
    DiskProblem::new(&grid, shape)?.solve_nutrient(model, None, settings)
}

/// Pressure field on the domain bounded by `shape`.
pub fn solve_pressure(shape: &ShapeState, params: &ModelParameters, settings: &GridSettings) -> Result<DiskField> {
    check_radius(shape, params)?;
    settings.validate()?;
    let grid = DiskGrid::new(settings.n_r, settings.n_theta)?;
    DiskProblem::new(&grid, shape)?.solve_pressure(params.a, params.g, settings)
}
