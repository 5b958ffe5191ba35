//! The boundary velocity `Phi(rho)`.
//!
//! `Phi = (1/R) (G grad psi - grad p) . grad N - (A G / 2)(1 + rho)`,
//! evaluated on the boundary after both field solves.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{grid_coefficients, ShapeState};
use crate::model::NutrientModel;
use crate::spectrum::ModelParameters;

use super::fields::DiskProblem;
use super::grid::{dealias, DiskGrid};
use super::GridSettings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiEvaluation {
    /// `Phi` at `theta_j = 2 pi j / n_theta`.
    pub values: Vec<f64>,
    /// Fourier coefficients for `0 <= k <= n_theta / 3`.
    pub coeffs: Vec<Complex64>,
    pub newton_iterations: usize,
    pub nutrient_residual: f64,
    pub pressure_residual: f64,
}

impl PhiEvaluation {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `Phi_hat(k)` for any integer `k`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let i = k.unsigned_abs() as usize;
        match self.coeffs.get(i) {
            Some(&c) if k < 0 => c.conj(),
            Some(&c) => c,
            None => Complex64::new(0.0, 0.0),
        }
    }
}

/// Reusable evaluator: keeps the grid and warm-starts Newton from the last
/// nutrient field.
pub struct PhiSolver {
    grid: DiskGrid,
    params: ModelParameters,
    model: NutrientModel,
    settings: GridSettings,
    warm: Option<Vec<f64>>,
}

impl PhiSolver {
    pub fn new(params: &ModelParameters, model: &NutrientModel, settings: &GridSettings) -> Result<Self> {
        params.validate()?;
        settings.validate()?;
        Ok(Self {
            grid: DiskGrid::new(settings.n_r, settings.n_theta)?,
            params: params.clone(),
            model: model.clone(),
            settings: *settings,
            warm: None,
        })
    }

    pub fn grid(&self) -> &DiskGrid {
        &self.grid
    }

    pub fn settings(&self) -> &GridSettings {
        &self.settings
    }

    pub fn params(&self) -> &ModelParameters {
        &self.params
    }

    pub fn eval(&mut self, shape: &ShapeState) -> Result<PhiEvaluation> {
        if (shape.radius() - self.params.r).abs() > 1e-12 * self.params.r {
            return Err(Error::InvalidParameter(format!(
                "shape radius {} differs from parameter radius {}",
                shape.radius(),
                self.params.r
            )));
        }
        let problem = DiskProblem::new(&self.grid, shape)?;
        let psi = problem.solve_nutrient(&self.model, self.warm.as_deref(), &self.settings)?;
        let p = problem.solve_pressure(self.params.a, self.params.g, &self.settings)?;
        let (a, g, r) = (self.params.a, self.params.g, self.params.r);
        let rho = &problem.geometry().rho;
        let raw: Vec<f64> = (0..self.grid.n_theta())
            .map(|j| (g * psi.flux_trace[j] - p.flux_trace[j]) / r - a * g / 2.0 * (1.0 + rho[j]))
            .collect();
        let values = dealias(&raw, &self.grid);
        let coeffs = grid_coefficients(&values, self.grid.n_theta() / 3);
        let out = PhiEvaluation {
            values,
            coeffs,
            newton_iterations: psi.iterations,
            nutrient_residual: psi.residual,
            pressure_residual: p.residual,
        };
        self.warm = Some(psi.values);
        Ok(out)
    }
}

/// One-off evaluation of `Phi(shape)`.
pub fn phi(
    shape: &ShapeState,
    params: &ModelParameters,
    model: &NutrientModel,
    settings: &GridSettings,
) -> Result<PhiEvaluation> {
    PhiSolver::new(params, model, settings)?.eval(shape)
}
