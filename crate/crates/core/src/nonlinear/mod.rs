//! The full nonlinear boundary flow.
//!
//! Each evaluation of `Phi(rho)` maps the perturbed domain onto the unit
//! disk, solves the nutrient problem by Newton iteration and the pressure
//! problem by one linear solve (both spectral: Chebyshev in the radius,
//! Fourier in the angle), and assembles the normal boundary velocity.

mod fields;
mod geometry;
pub mod grid;
pub mod linsolve;
mod phi;
mod stepper;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fields::{solve_nutrient, solve_pressure, DiskField, DiskProblem, FieldKind};
pub use geometry::{curvature, BoundaryGeometry, MapCoefficients};
pub use phi::{phi, PhiEvaluation, PhiSolver};
pub use stepper::{
    evolve_nonlinear, write_diagnostics_csv, NonlinearTrajectory, Outcome, Snapshot, StepRecord, StepperSettings,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSettings {
    /// Radial nodes in `(0, 1]`.
    pub n_r: usize,
    /// Angular nodes; even.
    pub n_theta: usize,
    /// Newton stops once the preconditioned residual is below this.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Relative GMRES tolerance for the pressure solve.
    pub linear_tol: f64,
    pub gmres_restart: usize,
    pub max_gmres_iters: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            n_r: 64,
            n_theta: 128,
            newton_tol: 1e-10,
            max_newton_iters: 30,
            linear_tol: 1e-12,
            gmres_restart: 60,
            max_gmres_iters: 2000,
        }
    }
}

impl GridSettings {
    pub fn with_size(n_r: usize, n_theta: usize) -> Self {
        Self {
            n_r,
            n_theta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_r < 4 || self.n_theta < 8 || !self.n_theta.is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "grid needs n_r >= 4 and an even n_theta >= 8".into(),
            ));
        }
        if !(self.newton_tol > 0.0 && self.linear_tol > 0.0) {
            return Err(Error::InvalidParameter("solver tolerances must be positive".into()));
        }
        if self.gmres_restart == 0 || self.max_gmres_iters == 0 {
            return Err(Error::InvalidParameter("GMRES limits must be positive".into()));
        }
        Ok(())
    }
}
