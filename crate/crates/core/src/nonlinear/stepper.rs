//! Time integration of `d rho / dt = Phi(rho)`.
//!
//! First-order IMEX Euler in Fourier space: the principal symbol
//! `lambda_k = -|k|^3 / R^3` is taken implicitly, the remainder
//! `Phi - lambda rho` explicitly. Each step is done once with `dt` and twice
//! with `dt / 2`; the difference controls the step size and the
//! Richardson combination `2 fine - coarse` is accepted.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{ShapeState, SMALLNESS_BOUND};
use crate::model::NutrientModel;
use crate::spectrum::{lambda_k, ModelParameters};

use super::phi::PhiSolver;
use super::GridSettings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepperSettings {
    /// Relative local error target per step.
    pub tol: f64,
    pub atol: f64,
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub max_steps: usize,
    /// Retained modes; capped at `n_theta / 3`.
    pub n_modes: usize,
    /// Times at which full boundary samples are recorded.
    pub snapshot_times: Vec<f64>,
}

impl Default for StepperSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            atol: 1e-12,
            dt_initial: 1e-4,
            dt_min: 1e-12,
            dt_max: 0.05,
            max_steps: 1_000_000,
            n_modes: crate::linear::DEFAULT_N_MODES,
            snapshot_times: Vec::new(),
        }
    }
}

impl StepperSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.atol >= 0.0) {
            return Err(Error::InvalidParameter("stepper tolerances must be positive".into()));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_initial && self.dt_initial <= self.dt_max) {
            return Err(Error::InvalidParameter(
                "need 0 < dt_min <= dt_initial <= dt_max".into(),
            ));
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter("snapshot times must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    /// `sup |rho|` reached the admissibility bound `1/4`.
    LeftNeighbourhood { t: f64, sup_norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    /// `sup |Phi(rho)|` at the start of the step.
    pub phi_norm: f64,
    pub newton_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub theta: Vec<f64>,
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearTrajectory {
    /// Initial state and every accepted step.
    pub states: Vec<(f64, ShapeState)>,
    pub steps: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
    pub outcome: Outcome,
}

fn bound(c: &[Complex64]) -> f64 {
    // sup |sum c_k e^{ik theta}| <= |c_0| + 2 sum_{k>0} |c_k|
    c.iter().enumerate().map(|(k, z)| if k == 0 { z.norm() } else { 2.0 * z.norm() }).sum()
}

struct Imex<'a> {
    solver: &'a mut PhiSolver,
    lambda: Vec<f64>,
    radius: f64,
}

impl Imex<'_> {
    fn shape(&self, c: &[Complex64]) -> Result<ShapeState> {
        let mut c = c.to_vec();
        c[0].im = 0.0;
        ShapeState::from_parts(c, self.radius, None)
    }

    fn phi(&mut self, c: &[Complex64]) -> Result<(Vec<Complex64>, f64, usize)> {
        let shape = self.shape(c)?;
        let ev = self.solver.eval(&shape)?;
        let coeffs = (0..c.len()).map(|k| ev.coeff(k as i64)).collect();
        Ok((coeffs, ev.sup_norm(), ev.newton_iterations))
    }

    fn advance(&self, c: &[Complex64], phi: &[Complex64], dt: f64) -> Vec<Complex64> {
        c.iter()
            .zip(phi)
            .zip(&self.lambda)
            .map(|((&ck, &pk), &lk)| (ck + dt * (pk - lk * ck)) / (1.0 - dt * lk))
            .collect()
    }
}

fn left(e: &Error) -> Option<f64> {
    match e {
        Error::DomainValidity { sup_norm } => Some(*sup_norm),
        _ => None,
    }
}

/// Integrates the full flow from `shape0` up to `t_end`, or until the shape
/// leaves the admissible set.
pub fn evolve_nonlinear(
    shape0: &ShapeState,
    t_end: f64,
    params: &ModelParameters,
    model: &NutrientModel,
    grid: &GridSettings,
    stepper: &StepperSettings,
) -> Result<NonlinearTrajectory> {
    stepper.validate()?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    shape0.check_admissible()?;
    let mut solver = PhiSolver::new(params, model, grid)?;
    let k_keep = stepper.n_modes.min(grid.n_theta / 3);
    let start = shape0.resized(k_keep);
    let radius = params.r;
    if (start.radius() - radius).abs() > 1e-12 * radius {
        return Err(Error::InvalidParameter("shape radius differs from parameter radius".into()));
    }
    let n_theta = grid.n_theta;
    let theta = crate::linear::theta_grid(n_theta);
    let mut snapshot_times = stepper.snapshot_times.clone();
    snapshot_times.retain(|&t| t <= t_end);
    snapshot_times.sort_by(f64::total_cmp);
    snapshot_times.dedup();

    let mut imex = Imex {
        solver: &mut solver,
        lambda: (0..=k_keep).map(|k| lambda_k(k as i64, radius)).collect(),
        radius,
    };

    let mut c = start.coeffs().to_vec();
    let mut t = 0.0;
    let mut dt = stepper.dt_initial;
    let mut states = vec![(0.0, start.clone())];
    let mut steps = Vec::new();
    let mut snapshots = Vec::new();
    let mut next_snap = 0;
    while next_snap < snapshot_times.len() && snapshot_times[next_snap] <= 0.0 {
        snapshots.push(Snapshot { t: 0.0, theta: theta.clone(), rho: start.to_grid(n_theta) });
        next_snap += 1;
    }

    let halt = |t: f64, sup_norm: f64, states, steps, snapshots| NonlinearTrajectory {
        states,
        steps,
        snapshots,
        outcome: Outcome::LeftNeighbourhood { t, sup_norm },
    };

    let mut count = 0usize;
    while t < t_end {
        count += 1;
        if count > stepper.max_steps {
            return Err(Error::Integration(format!("maximum number of steps reached at t = {t:.6e}")));
        }
        let target = snapshot_times.get(next_snap).copied().unwrap_or(t_end).min(t_end);
        let mut h = dt.min(stepper.dt_max);
        let lands = h >= target - t;
        if lands {
            h = target - t;
        }

        let (phi0, phi_norm, newton_iters) = imex.phi(&c)?;
        let coarse = imex.advance(&c, &phi0, h);
        let half = imex.advance(&c, &phi0, h / 2.0);
        let phi_half = match imex.phi(&half) {
            Ok((p, _, _)) => p,
            Err(e) => match left(&e) {
                Some(s) => return Ok(halt(t, s, states, steps, snapshots)),
                None => return Err(e),
            },
        };
        let fine = imex.advance(&half, &phi_half, h / 2.0);

        let diff: Vec<Complex64> = fine.iter().zip(&coarse).map(|(a, b)| a - b).collect();
        let err = bound(&diff);
        let scale = stepper.atol + stepper.tol * bound(&c);
        let factor = if err == 0.0 { 2.0 } else { (0.9 * (scale / err).sqrt()).clamp(0.2, 2.0) };
        if err > scale {
            dt = h * factor;
            if dt < stepper.dt_min {
                return Err(Error::Integration(format!("step size underflow at t = {t:.6e}")));
            }
            continue;
        }

        c = fine.iter().zip(&coarse).map(|(f, co)| 2.0 * f - co).collect();
        c[0].im = 0.0;
        t = if lands { target } else { t + h };
        if !lands || h >= dt {
            dt = h * factor;
        }
        steps.push(StepRecord { t, dt: h, phi_norm, newton_iters });
        let shape = imex.shape(&c)?;
        let sup_norm = shape.sup_norm();
        if lands && next_snap < snapshot_times.len() && target == snapshot_times[next_snap] {
            snapshots.push(Snapshot { t, theta: theta.clone(), rho: shape.to_grid(n_theta) });
            next_snap += 1;
        }
        states.push((t, shape));
        if sup_norm >= SMALLNESS_BOUND {
            return Ok(halt(t, sup_norm, states, steps, snapshots));
        }
    }
    Ok(NonlinearTrajectory {
        states,
        steps,
        snapshots,
        outcome: Outcome::Completed,
    })
}

/// Writes `t,dt,phi_norm,newton_iters` rows.
pub fn write_diagnostics_csv<W: std::io::Write>(mut w: W, steps: &[StepRecord]) -> std::io::Result<()> {
    writeln!(w, "t,dt,phi_norm,newton_iters")?;
    for s in steps {
        writeln!(w, "{:.16e},{:.16e},{:.16e},{}", s.t, s.dt, s.phi_norm, s.newton_iters)?;
    }
    Ok(())
}
