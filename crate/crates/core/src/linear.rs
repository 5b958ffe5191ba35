//! Boundary perturbations and their linearized evolution.
//!
//! A shape is `rho(theta) = sum_k rho_hat(k) e^{i k theta}` with
//! `rho_hat(-k) = conj(rho_hat(k))`, stored for `k >= 0` only. Under the
//! linearized flow every coefficient evolves independently,
//! `rho_hat(k, t) = e^{mu_k t} rho_hat(k, 0)`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{Provenance, RadialProfile};
use crate::spectrum::SpectrumTable;

/// Admissible shapes satisfy `sup |rho| < SMALLNESS_BOUND`.
pub const SMALLNESS_BOUND: f64 = 0.25;
pub const DEFAULT_N_MODES: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeState {
    /// `coeffs[k] = rho_hat(k)` for `0 <= k <= n_modes`; `coeffs[0]` is real.
    coeffs: Vec<Complex64>,
    radius: f64,
    /// When set to `l`, only multiples of `l` may be nonzero.
    period: Option<usize>,
}

/// One `(k, amplitude, phase)` term `amplitude * cos(k theta + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSeed {
    pub k: usize,
    pub amplitude: f64,
    pub phase: f64,
}

impl std::str::FromStr for ModeSeed {
    type Err = Error;

    /// Parses `k:amp` or `k:amp:phase`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(Error::InvalidShape(format!("expected k:amp[:phase], got '{s}'")));
        }
        let bad = |what: &str| Error::InvalidShape(format!("bad {what} in '{s}'"));
        let k = parts[0].trim().parse().map_err(|_| bad("mode"))?;
        let amplitude: f64 = parts[1].trim().parse().map_err(|_| bad("amplitude"))?;
        let phase: f64 = match parts.get(2) {
            Some(p) => p.trim().parse().map_err(|_| bad("phase"))?,
            None => 0.0,
        };
        if !amplitude.is_finite() || !phase.is_finite() {
            return Err(bad("number"));
        }
        Ok(Self { k, amplitude, phase })
    }
}

impl ShapeState {
    /// Validated shape; fails on a non-real mean, a lattice violation or
    /// `sup |rho| >= 1/4`.
    pub fn new(coeffs: Vec<Complex64>, radius: f64, period: Option<usize>) -> Result<Self> {
        let s = Self::from_parts(coeffs, radius, period)?;
        s.check_admissible()?;
        Ok(s)
    }

    /// Like [`ShapeState::new`] but without the smallness check.
    pub fn from_parts(coeffs: Vec<Complex64>, radius: f64, period: Option<usize>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidShape("at least the k = 0 coefficient is required".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidShape("coefficients must be finite".into()));
        }
        if coeffs[0].im != 0.0 {
            return Err(Error::InvalidShape("rho_hat(0) must be real".into()));
        }
        if let Some(l) = period {
            if l == 0 {
                return Err(Error::InvalidShape("period must be positive".into()));
            }
            if let Some(k) = (0..coeffs.len()).find(|k| k % l != 0 && coeffs[*k] != Complex64::new(0.0, 0.0)) {
                return Err(Error::InvalidShape(format!(
                    "mode {k} is not a multiple of the period {l}"
                )));
            }
        }
        Ok(Self {
            coeffs,
            radius,
            period,
        })
    }

    pub fn zero(n_modes: usize, radius: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n_modes + 1], radius, None)
    }

    /// Sum of `amplitude * cos(k theta + phase)` terms.
    pub fn from_seeds(seeds: &[ModeSeed], n_modes: usize, radius: f64) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_modes + 1];
        for s in seeds {
            if s.k > n_modes {
                return Err(Error::InvalidShape(format!(
                    "seed mode {} exceeds n_modes = {n_modes}",
                    s.k
                )));
            }
            if s.k == 0 {
                coeffs[0] += s.amplitude * s.phase.cos();
            } else {
                coeffs[s.k] += Complex64::from_polar(s.amplitude / 2.0, s.phase);
            }
        }
        let mut shape = Self::new(coeffs, radius, None)?;
        shape.period = shape.lattice();
        Ok(shape)
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `rho_hat(k)` for any integer `k`, zero outside the retained band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let i = k.unsigned_abs() as usize;
        match self.coeffs.get(i) {
            Some(&c) if k < 0 => c.conj(),
            Some(&c) => c,
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `|rho_hat(k)|` for `0 <= k <= n_modes`.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm()).collect()
    }

    /// Largest `l >= 2` such that every nonzero mode is a multiple of `l`.
    pub fn lattice(&self) -> Option<usize> {
        let g = (1..self.coeffs.len())
            .filter(|&k| self.coeffs[k] != Complex64::new(0.0, 0.0))
            .fold(0usize, gcd);
        (g >= 2).then_some(g)
    }

    pub fn with_period(mut self, period: Option<usize>) -> Result<Self> {
        let s = Self::from_parts(std::mem::take(&mut self.coeffs), self.radius, period)?;
        Ok(s)
    }

    /// Same coefficients, `n_modes` changed by truncation or zero padding.
    pub fn resized(&self, n_modes: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n_modes + 1, Complex64::new(0.0, 0.0));
        Self {
            coeffs,
            radius: self.radius,
            period: self.period,
        }
    }

    /// Samples `rho` at `theta_j = 2 pi j / n_theta`. Modes at or above the
    /// Nyquist index `n_theta / 2` are dropped.
    pub fn to_grid(&self, n_theta: usize) -> Vec<f64> {
        self.grid_derivative(n_theta, 0)
    }

    /// Samples the `order`-th derivative of `rho` in `theta`.
    pub fn grid_derivative(&self, n_theta: usize, order: u32) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); n_theta];
        let i = Complex64::new(0.0, 1.0);
        for (k, &c) in self.coeffs.iter().enumerate() {
            if 2 * k >= n_theta {
                break;
            }
            let d = (i * k as f64).powu(order);
            buf[k] += c * d;
            if k > 0 {
                buf[n_theta - k] += (c * d).conj();
            }
        }
        FftPlanner::new().plan_fft_inverse(n_theta).process(&mut buf);
        buf.iter().map(|z| z.re).collect()
    }

    /// Fourier coefficients `0..=n_modes` of real samples on the uniform grid.
    pub fn from_grid(values: &[f64], n_modes: usize, radius: f64) -> Result<Self> {
        let coeffs = grid_coefficients(values, n_modes);
        Self::from_parts(coeffs, radius, None)
    }

    /// `max |rho|`, sampled on a grid fine enough for the retained modes.
    pub fn sup_norm(&self) -> f64 {
        let n = (8 * (self.n_modes() + 1)).max(256).next_power_of_two();
        self.to_grid(n).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_admissible(&self) -> bool {
        self.sup_norm() < SMALLNESS_BOUND
    }

    pub fn check_admissible(&self) -> Result<()> {
        let sup_norm = self.sup_norm();
        if sup_norm < SMALLNESS_BOUND {
            Ok(())
        } else {
            Err(Error::DomainValidity { sup_norm })
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `rho_hat(k)`, `0 <= k <= n_modes`, of samples on a uniform grid; modes at
/// or above the Nyquist index are returned as zero.
pub fn grid_coefficients(values: &[f64], n_modes: usize) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n_modes + 1];
    for (k, c) in coeffs.iter_mut().enumerate() {
        if 2 * k < n {
            *c = buf[k] / n as f64;
        }
    }
    coeffs[0].im = 0.0;
    coeffs
}

/// Exact linearized flow over time `t >= 0`. The result is not clamped to
/// the admissible set.
pub fn evolve_linear(shape: &ShapeState, t: f64, table: &SpectrumTable) -> Result<ShapeState> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be finite and >= 0, got {t}")));
    }
    let mut coeffs = shape.coeffs.clone();
    for (k, c) in coeffs.iter_mut().enumerate() {
        if *c == Complex64::new(0.0, 0.0) {
            continue;
        }
        *c *= (table.mu(k as i64)? * t).exp();
    }
    Ok(ShapeState {
        coeffs,
        radius: shape.radius,
        period: shape.period,
    })
}

/// Samples the linearized flow at the given times.
pub fn linear_trajectory(
    shape: &ShapeState,
    times: &[f64],
    table: &SpectrumTable,
) -> Result<Vec<(f64, ShapeState)>> {
    times
        .iter()
        .map(|&t| Ok((t, evolve_linear(shape, t, table)?)))
        .collect()
}

/// Writes `t,sup_norm,amp_0,...,amp_K` rows with `amp_k = |rho_hat(k)|`.
pub fn write_trajectory_csv<W: Write>(mut w: W, states: &[(f64, ShapeState)]) -> std::io::Result<()> {
    let k_max = states.iter().map(|(_, s)| s.n_modes()).max().unwrap_or(0);
    write!(w, "t,sup_norm")?;
    for k in 0..=k_max {
        write!(w, ",amp_{k}")?;
    }
    writeln!(w)?;
    for (t, s) in states {
        write!(w, "{t:.16e},{:.16e}", s.sup_norm())?;
        for k in 0..=k_max {
            write!(w, ",{:.16e}", s.coeff(k as i64).norm())?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// The first-order nutrient perturbation `A_k(r) = amplitude * shape(r)`
/// produced by the boundary mode `rho_hat(k) e^{i k theta}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizedMode {
    pub k: i64,
    pub amplitude: Complex64,
    /// `-v0'(1) r^|k| u_|k|(r) / u_|k|(1)`.
    pub shape: RadialProfile,
}

impl LinearizedMode {
    pub fn value_at(&self, r: f64) -> Complex64 {
        self.amplitude * self.shape.value_at(r)
    }
}

pub fn linearized_mode_profile(
    k: i64,
    rho_hat_k: Complex64,
    v0: &RadialProfile,
    u_k: &RadialProfile,
) -> Result<LinearizedMode> {
    let n = k.unsigned_abs() as usize;
    let radius_u = match u_k.provenance() {
        Provenance::ModeSolution { n: m, radius } if m == n => radius,
        other => {
            return Err(Error::InvalidParameter(format!(
                "u_k must be the mode solution for n = {n}, got {other:?}"
            )))
        }
    };
    let radius_v = match v0.provenance() {
        Provenance::SteadyState { radius, .. } => radius,
        Provenance::Parametric { lambda } => lambda.sqrt(),
        other => {
            return Err(Error::InvalidParameter(format!(
                "v0 must be a U(., R^2) profile, got {other:?}"
            )))
        }
    };
    if (radius_u - radius_v).abs() > 1e-9 * radius_v {
        return Err(Error::InvalidParameter(format!(
            "u_k computed at R = {radius_u}, v0 at R = {radius_v}"
        )));
    }
    let scale = -v0.deriv_at_1() / u_k.value_at_1();
    let nf = n as f64;
    let mut values = Vec::with_capacity(u_k.grid().len());
    let mut slopes = Vec::with_capacity(u_k.grid().len());
    for ((&r, &u), &du) in u_k.grid().iter().zip(u_k.values()).zip(u_k.slopes()) {
        let rn = r.powi(n as i32);
        let drn = match n {
            0 => 0.0,
            _ => nf * r.powi(n as i32 - 1),
        };
        values.push(scale * rn * u);
        slopes.push(scale * (drn * u + rn * du));
    }
    Ok(LinearizedMode {
        k,
        amplitude: rho_hat_k,
        shape: RadialProfile::new(
            u_k.grid().to_vec(),
            values,
            slopes,
            Provenance::LinearizedMode { k },
        ),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Least-squares slope of `ln amplitude` against `t`.
    pub rate: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
}

pub fn fit_growth_rate(series: &[(f64, f64)]) -> Result<GrowthFit> {
    if series.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 samples, got {}", series.len())));
    }
    if let Some(&(t, a)) = series.iter().find(|(_, a)| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::Fit(format!("amplitude {a} at t = {t} is not positive")));
    }
    let n = series.len() as f64;
    let tm = series.iter().map(|s| s.0).sum::<f64>() / n;
    let ym = series.iter().map(|s| s.1.ln()).sum::<f64>() / n;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for &(t, a) in series {
        stt += (t - tm) * (t - tm);
        sty += (t - tm) * (a.ln() - ym);
    }
    if !(stt > 0.0) {
        return Err(Error::Fit("sample times must not all coincide".into()));
    }
    let rate = sty / stt;
    let intercept = ym - rate * tm;
    let ss: f64 = series
        .iter()
        .map(|&(t, a)| (a.ln() - intercept - rate * t).powi(2))
        .sum();
    Ok(GrowthFit {
        rate,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Uniform angular grid `theta_j = 2 pi j / n`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}
