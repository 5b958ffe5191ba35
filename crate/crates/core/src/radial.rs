//! Singular radial ODEs on `[0, 1]`.
//!
//! * `U(r, lambda)`: `U'' + U'/r = lambda f(U)`, `U'(0) = 0`, `U(1) = 1`,
//!   solved by shooting on the centre value `c = U(0)`.
//! * `u_n`: `u'' + (2n+1)/r u' = R^2 f'(v0) u`, `u(0) = 1`, `u'(0) = 0`,
//!   a regular-singular IVP launched from a Taylor start.
//! * the steady radius `R_A`, root of `dU/dr(1, R^2) = A R^2 / 2`.
//!
//! Every profile is stored on Chebyshev-Lobatto nodes of `[0, 1]` together
//! with its slope, so it can be interpolated barycentrically anywhere.

use serde::{Deserialize, Serialize};

use crate::cheb;
use crate::error::{Error, Result};
use crate::model::NutrientModel;
use crate::ode::{self, Tolerances};
use crate::roots;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Radius where the Taylor start hands over to the integrator.
    pub series_start_radius: f64,
    /// Iteration cap for the shooting and steady-radius root finders.
    pub max_newton_iters: usize,
    /// Bracket for the centre value `U(0)` in the shooting method.
    pub bisection_bracket: (f64, f64),
    /// Polynomial degree of the Lobatto grid the profiles are stored on.
    pub profile_degree: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            series_start_radius: 1e-4,
            max_newton_iters: 200,
            bisection_bracket: (1e-12, 1.0),
            profile_degree: 64,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if !(self.series_start_radius > 0.0 && self.series_start_radius <= 1e-2) {
            return Err(Error::InvalidParameter(
                "series_start_radius must lie in (0, 1e-2]".into(),
            ));
        }
        let (lo, hi) = self.bisection_bracket;
        if !(lo > 0.0 && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidParameter(
                "shooting bracket must satisfy 0 < lo < hi <= 1".into(),
            ));
        }
        if self.profile_degree < 8 {
            return Err(Error::InvalidParameter("profile_degree must be at least 8".into()));
        }
        Ok(())
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            abs: self.abs_tol,
            rel: self.rel_tol,
        }
    }
}

/// What a [`RadialProfile`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// `u_n` at radius `R`.
    ModeSolution { n: usize, radius: f64 },
    /// `U(., lambda)`.
    Parametric { lambda: f64 },
    /// `v0 = U(., R_A^2)` for the equilibrium at apoptosis balance `a`.
    SteadyState { radius: f64, a: f64 },
    /// `A_k / rho_hat(k)`, the linearized nutrient mode shape.
    LinearizedMode { k: i64 },
}

/// A radially symmetric field on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    provenance: Provenance,
}

impl RadialProfile {
    pub(crate) fn new(grid: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>, provenance: Provenance) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        debug_assert_eq!(grid.len(), slopes.len());
        Self {
            grid,
            values,
            slopes,
            provenance,
        }
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn deriv_at_0(&self) -> f64 {
        self.slopes[0]
    }

    pub fn deriv_at_1(&self) -> f64 {
        *self.slopes.last().unwrap()
    }

    pub fn value_at_0(&self) -> f64 {
        self.values[0]
    }

    pub fn value_at_1(&self) -> f64 {
        *self.values.last().unwrap()
    }

    fn degree(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn value_at(&self, r: f64) -> f64 {
        let w = cheb::lobatto_weights(self.degree());
        cheb::barycentric(&self.grid, &w, &self.values, r)
    }

    pub fn slope_at(&self, r: f64) -> f64 {
        let w = cheb::lobatto_weights(self.degree());
        cheb::barycentric(&self.grid, &w, &self.slopes, r)
    }

    /// Second derivative at the nodes, by spectral differentiation of the slopes.
    pub fn second_derivatives(&self) -> Vec<f64> {
        let d = cheb::diff_matrix_unit(self.degree());
        let s = nalgebra::DVector::from_column_slice(&self.slopes);
        (d * s).iter().copied().collect()
    }

    /// Returns an interpolator that caches the barycentric weights.
    pub fn interpolator(&self) -> ProfileInterpolator<'_> {
        ProfileInterpolator {
            profile: self,
            weights: cheb::lobatto_weights(self.degree()),
        }
    }
}

pub struct ProfileInterpolator<'a> {
    profile: &'a RadialProfile,
    weights: Vec<f64>,
}

impl ProfileInterpolator<'_> {
    pub fn value(&self, r: f64) -> f64 {
        cheb::barycentric(&self.profile.grid, &self.weights, &self.profile.values, r)
    }

    pub fn slope(&self, r: f64) -> f64 {
        cheb::barycentric(&self.profile.grid, &self.weights, &self.profile.slopes, r)
    }
}

/// Integrates a second-order radial ODE `[y, y']' = rhs` through every grid
/// node, using `series(r)` for nodes inside the launch radius.
fn integrate_on_grid<F, S>(
    rhs: &F,
    series: S,
    grid: &[f64],
    settings: &SolverSettings,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
    S: Fn(f64) -> [f64; 2],
{
    let r0 = settings.series_start_radius;
    let tol = settings.tolerances();
    let mut values = Vec::with_capacity(grid.len());
    let mut slopes = Vec::with_capacity(grid.len());
    let mut r = r0;
    let mut y = series(r0);
    let mut h = r0;
    for &node in grid {
        if node <= r0 {
            let s = series(node);
            values.push(s[0]);
            slopes.push(s[1]);
            continue;
        }
        y = ode::integrate(rhs, r, y, node, tol, &mut h)?;
        r = node;
        values.push(y[0]);
        slopes.push(y[1]);
    }
    Ok((values, slopes))
}

fn validate_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    Ok(())
}

/// Profile of `U(., lambda)` for centre value `c`, or `None` when the
/// trajectory overflows (which only happens far above the target `U(1) = 1`).
fn shoot(
    c: f64,
    lambda: f64,
    model: &NutrientModel,
    grid: &[f64],
    settings: &SolverSettings,
) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let rhs = |r: f64, y: &[f64; 2]| [y[1], lambda * model.f(y[0]) - y[1] / r];
    let fc = model.f(c);
    let series = |r: f64| [c + lambda * fc * r * r / 4.0, lambda * fc * r / 2.0];
    match integrate_on_grid(&rhs, series, grid, settings) {
        Ok(v) => Ok(Some(v)),
        Err(Error::Range(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Solves `U'' + U'/r = lambda f(U)`, `U'(0) = 0`, `U(1) = 1`.
#[allow(non_snake_case)]
pub fn solve_U(lambda: f64, model: &NutrientModel, settings: &SolverSettings) -> Result<RadialProfile> {
    settings.validate()?;
    validate_lambda(lambda)?;
    let grid = cheb::lobatto_unit(settings.profile_degree);
    let provenance = Provenance::Parametric { lambda };
    if lambda == 0.0 {
        let n = grid.len();
        return Ok(RadialProfile::new(grid, vec![1.0; n], vec![0.0; n], provenance));
    }

    let miss = |c: f64| -> Result<f64> {
        Ok(match shoot(c, lambda, model, &grid, settings)? {
            Some((v, _)) => v.last().unwrap() - 1.0,
            None => f64::INFINITY,
        })
    };

    let (lo, hi) = settings.bisection_bracket;
    let f_lo = miss(lo)?;
    let f_hi = miss(hi)?;
    if !(f_lo < 0.0 && f_hi >= 0.0) {
        return Err(Error::ShootingBracket {
            lambda,
            c_lo: lo,
            c_hi: hi,
            residual_lo: f_lo,
            residual_hi: f_hi,
        });
    }
    if f_hi == 0.0 {
        let (values, slopes) = shoot(hi, lambda, model, &grid, settings)?.expect("finite at root");
        return Ok(RadialProfile::new(grid, values, slopes, provenance));
    }

    // Sampled monotonicity of the shooting map on the bracket.
    let samples = 6;
    let mut prev = f_lo;
    for i in 1..samples {
        let c = lo * (hi / lo).powf(i as f64 / samples as f64);
        let m = miss(c)?;
        if m < prev {
            return Err(Error::NonMonotoneShooting { c });
        }
        prev = m;
    }
    if f_hi < prev {
        return Err(Error::NonMonotoneShooting { c: hi });
    }

    let mut failure: Option<Error> = None;
    let mut iters = 0usize;
    let root = roots::brent(
        |c| {
            iters += 1;
            if iters > settings.max_newton_iters {
                return None;
            }
            match miss(c) {
                Ok(v) => Some(v),
                Err(e) => {
                    failure = Some(e);
                    None
                }
            }
        },
        lo,
        hi,
        f_lo,
        f_hi,
        4.0 * f64::EPSILON * lo,
        0.01 * settings.abs_tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let c = root.ok_or_else(|| {
        Error::Integration(format!(
            "shooting for lambda = {lambda} did not converge in {} iterations",
            settings.max_newton_iters
        ))
    })?;
    let (values, slopes) = shoot(c, lambda, model, &grid, settings)?
        .ok_or_else(|| Error::Range(format!("shooting overflow at converged c = {c:.6e}")))?;
    let end = *values.last().unwrap();
    if (end - 1.0).abs() > settings.abs_tol {
        return Err(Error::Integration(format!(
            "shooting residual |U(1) - 1| = {:.3e} exceeds abs_tol",
            (end - 1.0).abs()
        )));
    }
    Ok(RadialProfile::new(grid, values, slopes, provenance))
}

fn check_v0(radius: f64, v0: &RadialProfile) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let lambda = match v0.provenance() {
        Provenance::Parametric { lambda } => lambda,
        Provenance::SteadyState { radius: r, .. } => r * r,
        other => {
            return Err(Error::InvalidParameter(format!(
                "v0 must be a U(., R^2) profile, got {other:?}"
            )))
        }
    };
    let target = radius * radius;
    if (lambda - target).abs() > 1e-9 * target.max(1e-300) {
        return Err(Error::InvalidParameter(format!(
            "v0 was computed for lambda = {lambda}, but R^2 = {target}"
        )));
    }
    Ok(())
}

/// Solves `u'' + (2n+1)/r u' = R^2 f'(v0(r)) u`, `u(0) = 1`, `u'(0) = 0`.
pub fn solve_u_n(
    n: usize,
    radius: f64,
    v0: &RadialProfile,
    model: &NutrientModel,
    settings: &SolverSettings,
) -> Result<RadialProfile> {
    settings.validate()?;
    check_v0(radius, v0)?;
    let r2 = radius * radius;
    let v0i = v0.interpolator();
    let q0 = r2 * model.fprime(v0.value_at_0());
    let m = 2.0 * n as f64 + 1.0;
    let rhs = |r: f64, y: &[f64; 2]| [y[1], r2 * model.fprime(v0i.value(r)) * y[0] - m / r * y[1]];
    let series = |r: f64| [1.0 + q0 * r * r / (2.0 * (m + 1.0)), q0 * r / (m + 1.0)];
    let grid = cheb::lobatto_unit(settings.profile_degree);
    let (values, slopes) = integrate_on_grid(&rhs, series, &grid, settings).map_err(|e| match e {
        Error::Range(msg) => Error::Range(format!("u_{n} at R = {radius}: {msg}")),
        other => other,
    })?;
    Ok(RadialProfile::new(
        grid,
        values,
        slopes,
        Provenance::ModeSolution { n, radius },
    ))
}

/// `u_n'(1) / u_n(1)`.
pub fn boundary_ratio(
    n: usize,
    radius: f64,
    v0: &RadialProfile,
    model: &NutrientModel,
    settings: &SolverSettings,
) -> Result<f64> {
    let u = solve_u_n(n, radius, v0, model, settings)?;
    Ok(u.deriv_at_1() / u.value_at_1())
}

/// The radially symmetric equilibrium for a given apoptosis balance `A`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteadyState {
    pub a: f64,
    pub radius: f64,
    /// `alpha_A = R_A^2 (f(1) - A/2)`.
    pub alpha: f64,
    /// `dU/dr(1, R_A^2) - A R_A^2 / 2` at the returned radius.
    pub residual: f64,
    pub profile: RadialProfile,
}

/// Finds `R_A` with `dU/dr(1, R_A^2) = A R_A^2 / 2`.
pub fn steady_radius(a: f64, model: &NutrientModel, settings: &SolverSettings) -> Result<SteadyState> {
    settings.validate()?;
    let f1 = model.f_at_one();
    if !(a > 0.0 && a < f1) {
        return Err(Error::InvalidParameter(format!(
            "A must lie in (0, f(1)) = (0, {f1}), got {a}"
        )));
    }
    let g = |r: f64| -> Result<f64> {
        let u = solve_U(r * r, model, settings)?;
        Ok(u.deriv_at_1() - a * r * r / 2.0)
    };

    // Geometric scan for the first + to - sign change. When the shooting
    // solve fails (very large radii), the gap to the last good sample is
    // bisected geometrically before giving up.
    let solvable = |r: f64| -> Result<Option<f64>> {
        match g(r) {
            Ok(v) => Ok(Some(v)),
            Err(Error::ShootingBracket { .. }) | Err(Error::Range(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut bracket = None;
    'scan: for j in -12..=8 {
        let mut r = 2f64.powi(j);
        let mut value = solvable(r)?;
        if value.is_none() {
            samples.push((r, f64::NAN));
            let Some(&(mut good, mut g_good)) = samples.iter().rev().find(|s| !s.1.is_nan()) else {
                break;
            };
            let mut bad = r;
            for _ in 0..10 {
                let mid = (good * bad).sqrt();
                match solvable(mid)? {
                    Some(v) if v <= 0.0 => {
                        r = mid;
                        value = Some(v);
                        break;
                    }
                    Some(v) => {
                        samples.push((mid, v));
                        good = mid;
                        g_good = v;
                    }
                    None => bad = mid,
                }
            }
            let Some(v) = value else { break 'scan };
            if g_good > 0.0 {
                bracket = Some((good, g_good, r, v));
            }
            samples.push((r, v));
            break;
        }
        let value = value.unwrap();
        if let Some(&(r_prev, g_prev)) = samples.last() {
            if g_prev > 0.0 && value <= 0.0 {
                bracket = Some((r_prev, g_prev, r, value));
                samples.push((r, value));
                break;
            }
        }
        samples.push((r, value));
    }
    let Some((lo, g_lo, hi, g_hi)) = bracket else {
        return Err(Error::NoSignChange { samples });
    };

    let mut failure = None;
    let mut iters = 0usize;
    let root = roots::brent(
        |r| {
            iters += 1;
            if iters > settings.max_newton_iters {
                return None;
            }
            match g(r) {
                Ok(v) => Some(v),
                Err(e) => {
                    failure = Some(e);
                    None
                }
            }
        },
        lo,
        hi,
        g_lo,
        g_hi,
        4.0 * f64::EPSILON * lo,
        0.1 * settings.abs_tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let radius = root.ok_or_else(|| Error::Integration("steady-radius iteration did not converge".into()))?;
    let u = solve_U(radius * radius, model, settings)?;
    let residual = u.deriv_at_1() - a * radius * radius / 2.0;
    if residual.abs() > settings.abs_tol {
        return Err(Error::Integration(format!(
            "steady-radius residual {residual:.3e} exceeds abs_tol"
        )));
    }
    let profile = RadialProfile {
        provenance: Provenance::SteadyState { radius, a },
        ..u
    };
    Ok(SteadyState {
        a,
        radius,
        alpha: radius * radius * (f1 - a / 2.0),
        residual,
        profile,
    })
}

/// The two closed-form power series for `f = id`, `R_A = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppendixSeries {
    U0,
    U1,
}

impl AppendixSeries {
    /// Ratio `a_{2k} / a_{2k-2}`.
    fn step(self, k: usize) -> f64 {
        let n = 2.0 * k as f64;
        match self {
            AppendixSeries::U0 => 1.0 / (n * n),
            AppendixSeries::U1 => 1.0 / (n * (n + 2.0)),
        }
    }

    /// Coefficient `a_{2k}` of `x^{2k}`.
    pub fn coefficient(self, k: usize) -> f64 {
        (1..=k).map(|i| self.step(i)).product()
    }
}

/// Partial sum of the first `terms` summands (the constant counts as one).
pub fn appendix_series(which: AppendixSeries, x: f64, terms: usize) -> Result<f64> {
    if terms == 0 {
        return Err(Error::InvalidParameter("terms must be at least 1".into()));
    }
    let x2 = x * x;
    let mut a = 1.0;
    let mut p = 1.0;
    let mut sum = 1.0;
    for k in 1..terms {
        a *= which.step(k);
        p *= x2;
        sum += a * p;
    }
    Ok(sum)
}

/// Termwise derivative of [`appendix_series`].
pub fn appendix_series_derivative(which: AppendixSeries, x: f64, terms: usize) -> Result<f64> {
    if terms == 0 {
        return Err(Error::InvalidParameter("terms must be at least 1".into()));
    }
    let mut a = 1.0;
    let mut sum = 0.0;
    for k in 1..terms {
        a *= which.step(k);
        sum += a * 2.0 * k as f64 * x.powi(2 * k as i32 - 1);
    }
    Ok(sum)
}
