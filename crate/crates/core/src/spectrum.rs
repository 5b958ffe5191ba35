//! Fourier symbol of the linearized flow at the radial equilibrium and the
//! stability quantities derived from it.
//!
//! For mode `k` the symbol is
//! `mu_k = (-|k|^3 + |k|) / R^3 - G d_k`, `d_k = A/2 r_k + A - f(1)`,
//! with `r_k = u_k'(1) / u_k(1)` from [`crate::radial`]. The third-order part
//! `lambda_k = -|k|^3 / R^3` is the principal (curvature) symbol.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NutrientModel;
use crate::radial::{self, RadialProfile, SolverSettings};

/// `|d_k|` at or below this counts as a vanishing denominator.
pub const DENOM_TOL: f64 = 1e-12;
pub const DEFAULT_K_MAX: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub a: f64,
    pub g: f64,
    /// Disk radius; the steady radius `R_A` for equilibrium analysis.
    pub r: f64,
    pub model: NutrientModel,
}

impl ModelParameters {
    pub fn new(a: f64, g: f64, r: f64, model: NutrientModel) -> Result<Self> {
        let p = Self { a, g, r, model };
        p.validate()?;
        Ok(p)
    }

    /// Parameters at the steady radius `R_A` of `a`.
    pub fn at_steady_state(a: f64, g: f64, model: NutrientModel, settings: &SolverSettings) -> Result<Self> {
        let steady = radial::steady_radius(a, &model, settings)?;
        Self::new(a, g, steady.radius, model)
    }

    pub fn validate(&self) -> Result<()> {
        let f1 = self.model.f_at_one();
        if !(self.a > 0.0 && self.a < f1) {
            return Err(Error::InvalidParameter(format!(
                "A must lie in (0, f(1)) = (0, {f1}), got {}",
                self.a
            )));
        }
        if !self.g.is_finite() {
            return Err(Error::InvalidParameter("G must be finite".into()));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidParameter(format!("R must be positive, got {}", self.r)));
        }
        Ok(())
    }

    /// `d_k = A/2 r_k + A - f(1)`.
    pub fn denominator(&self, ratio: f64) -> f64 {
        self.a / 2.0 * ratio + self.a - self.model.f_at_one()
    }

    fn curvature_part(&self, k: i64) -> f64 {
        let k = k.unsigned_abs() as f64;
        (-k * k * k + k) / self.r.powi(3)
    }
}

/// `lambda_k = -|k|^3 / R^3`.
pub fn lambda_k(k: i64, r: f64) -> f64 {
    let k = k.unsigned_abs() as f64;
    // written as a difference so that k = 0 gives +0.0, not -0.0
    0.0 - (k * k * k) / (r * r * r)
}

/// `mu_k` given the boundary ratio `r_|k|`.
pub fn mu_k(k: i64, params: &ModelParameters, ratio: f64) -> f64 {
    params.curvature_part(k) - params.g * params.denominator(ratio)
}

/// `G_k`, the mitosis rate where `mu_k` changes sign; `None` if `|d_k| <= DENOM_TOL`.
pub fn g_threshold(k: usize, params: &ModelParameters, ratio: f64) -> Option<f64> {
    let d = params.denominator(ratio);
    if d.abs() <= DENOM_TOL {
        None
    } else {
        Some(params.curvature_part(k as i64) / d)
    }
}

/// Boundary ratios `r_0..=r_{k_max}` at radius `r`, in parallel over modes.
pub fn mode_ratios(
    r: f64,
    model: &NutrientModel,
    k_max: usize,
    settings: &SolverSettings,
) -> Result<(RadialProfile, Vec<f64>)> {
    let v0 = radial::solve_U(r * r, model, settings)?;
    let ratios = (0..=k_max)
        .into_par_iter()
        .map(|n| radial::boundary_ratio(n, r, &v0, model, settings))
        .collect::<Result<Vec<_>>>()?;
    Ok((v0, ratios))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GStar {
    pub value: f64,
    pub k0: usize,
    /// Whether `(k^3 - k) / (R^3 (f(1) - A))`, a lower bound for every `G_k`
    /// with `d_k < 0`, already exceeds `value` just past the scan.
    pub tail_bound_certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Some `mu_k > 0`.
    Unstable,
    /// `G = 0`: the Hele-Shaw flow, all `mu_k <= 0`.
    HeleShaw,
    /// No unstable mode, but `G > 0` lies where stability is not established.
    InconclusiveBelowThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Both signs of every unstable `k` with `|k| != 1`, sorted.
    pub unstable_modes: Vec<i64>,
    /// Largest `mu_k` over `k = 0` and `2 <= |k| <= k_max`.
    pub spectral_bound: f64,
    /// `mu_1`, the neutral translation mode.
    pub neutral_mu: f64,
    pub regime: Regime,
}

/// Symbol table for `0 <= k <= k_max`; negative `k` are read by symmetry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumTable {
    params: ModelParameters,
    k_max: usize,
    ratio: Vec<f64>,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    g_threshold: Vec<Option<f64>>,
}

impl SpectrumTable {
    pub fn build(params: &ModelParameters, k_max: usize, settings: &SolverSettings) -> Result<Self> {
        params.validate()?;
        if k_max < 2 {
            return Err(Error::InvalidParameter("k_max must be at least 2".into()));
        }
        let (_, ratios) = mode_ratios(params.r, &params.model, k_max, settings)?;
        Ok(Self::from_ratios(params.clone(), ratios))
    }

    /// Table from precomputed ratios `r_0..=r_{k_max}`.
    pub fn from_ratios(params: ModelParameters, ratio: Vec<f64>) -> Self {
        let k_max = ratio.len() - 1;
        let lambda = (0..=k_max).map(|k| lambda_k(k as i64, params.r)).collect();
        let mu = ratio
            .iter()
            .enumerate()
            .map(|(k, &rk)| mu_k(k as i64, &params, rk))
            .collect();
        let g_threshold = ratio
            .iter()
            .enumerate()
            .map(|(k, &rk)| g_threshold(k, &params, rk))
            .collect();
        Self {
            params,
            k_max,
            ratio,
            lambda,
            mu,
            g_threshold,
        }
    }

    /// Same geometry and model at another mitosis rate; no ODE solves.
    pub fn with_g(&self, g: f64) -> Self {
        let params = ModelParameters { g, ..self.params.clone() };
        Self::from_ratios(params, self.ratio.clone())
    }

    pub fn params(&self) -> &ModelParameters {
        &self.params
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    fn index(&self, k: i64) -> Result<usize> {
        let i = k.unsigned_abs() as usize;
        if i > self.k_max {
            return Err(Error::ModeOutOfTable { k, k_max: self.k_max });
        }
        Ok(i)
    }

    pub fn mu(&self, k: i64) -> Result<f64> {
        Ok(self.mu[self.index(k)?])
    }

    pub fn lambda(&self, k: i64) -> Result<f64> {
        Ok(self.lambda[self.index(k)?])
    }

    pub fn ratio(&self, k: i64) -> Result<f64> {
        Ok(self.ratio[self.index(k)?])
    }

    pub fn denominator(&self, k: i64) -> Result<f64> {
        Ok(self.params.denominator(self.ratio(k)?))
    }

    pub fn g_threshold(&self, k: usize) -> Result<Option<f64>> {
        Ok(self.g_threshold[self.index(k as i64)?])
    }

    pub fn mu_values(&self) -> &[f64] {
        &self.mu
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratio
    }

    /// `d_0 > 0`, i.e. `mu_0 < 0` for every `G > 0`.
    pub fn assumption_holds(&self) -> bool {
        self.params.denominator(self.ratio[0]) > 0.0
    }

    /// `G* = min { G_k : d_k < 0 }` over `k = 0` and `2 <= k <= k_max`.
    pub fn g_star(&self) -> Result<GStar> {
        let mut best: Option<(f64, usize)> = None;
        for k in std::iter::once(0).chain(2..=self.k_max) {
            let d = self.params.denominator(self.ratio[k]);
            if d < -DENOM_TOL {
                let gk = self.params.curvature_part(k as i64) / d;
                if best.is_none_or(|(b, _)| gk < b) {
                    best = Some((gk, k));
                }
            }
        }
        let (value, k0) = best.ok_or(Error::NoThresholdCandidate { k_max: self.k_max })?;

        // the minimum is trusted only if G_k is still climbing at the end of the scan
        let start = self.k_max - self.k_max / 4;
        let mut prev = f64::NEG_INFINITY;
        for k in start.max(2)..=self.k_max {
            let d = self.params.denominator(self.ratio[k]);
            if d >= -DENOM_TOL {
                return Err(Error::ThresholdNotCertified {
                    k_max: self.k_max,
                    reason: format!("d_{k} = {d:.3e} is not negative near the end of the scan"),
                });
            }
            let gk = self.params.curvature_part(k as i64) / d;
            if gk <= prev {
                return Err(Error::ThresholdNotCertified {
                    k_max: self.k_max,
                    reason: format!("G_k is not increasing at k = {k}"),
                });
            }
            prev = gk;
        }
        if k0 >= start && k0 != 0 {
            return Err(Error::ThresholdNotCertified {
                k_max: self.k_max,
                reason: format!("minimum found at k0 = {k0}, inside the final quarter of the scan"),
            });
        }
        let next = (self.k_max + 1) as f64;
        let gap = self.params.model.f_at_one() - self.params.a;
        let tail = (next * next * next - next) / (self.params.r.powi(3) * gap);
        Ok(GStar {
            value,
            k0,
            tail_bound_certified: tail >= value,
        })
    }

    pub fn classify_stability(&self) -> StabilityReport {
        let mut unstable = Vec::new();
        let mut bound = f64::NEG_INFINITY;
        for k in std::iter::once(0).chain(2..=self.k_max) {
            let mu = self.mu[k];
            bound = bound.max(mu);
            if mu > 0.0 {
                if k == 0 {
                    unstable.push(0);
                } else {
                    unstable.push(-(k as i64));
                    unstable.push(k as i64);
                }
            }
        }
        unstable.sort_unstable();
        let g = self.params.g;
        let regime = if !unstable.is_empty() {
            Regime::Unstable
        } else if g == 0.0 {
            Regime::HeleShaw
        } else {
            Regime::InconclusiveBelowThreshold
        };
        StabilityReport {
            unstable_modes: unstable,
            spectral_bound: bound,
            neutral_mu: self.mu[1],
            regime,
        }
    }

    /// Smallest `l >= 2` with `mu_k <= mu_0` for all `|k| >= l`.
    pub fn l_g_index(&self) -> Result<usize> {
        let d0 = self.params.denominator(self.ratio[0]);
        if d0 <= 0.0 {
            return Err(Error::AssumptionViolated { d0 });
        }
        let mu0 = self.mu[0];
        let mut l = None;
        for k in (2..=self.k_max).rev() {
            if self.mu[k] > mu0 {
                break;
            }
            l = Some(k);
        }
        let l = l.ok_or_else(|| Error::ThresholdNotCertified {
            k_max: self.k_max,
            reason: format!("mu_{} exceeds mu_0; increase k_max", self.k_max),
        })?;

        // beyond the scan: -G d_k <= max(G (f(1) - A), -G d_0) since A - f(1) <= d_k <= d_0
        let g = self.params.g;
        let gap = self.params.model.f_at_one() - self.params.a;
        let next = (self.k_max + 1) as f64;
        let bound = (-next * next * next + next) / self.params.r.powi(3) + (g * gap).max(-g * d0);
        if bound > mu0 {
            return Err(Error::ThresholdNotCertified {
                k_max: self.k_max,
                reason: "tail bound for k > k_max does not stay below mu_0; increase k_max".into(),
            });
        }
        Ok(l)
    }

    /// `k,lambda_k,ratio_k,mu_k,g_threshold_k`, one row per `0 <= k <= k_max`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,lambda_k,ratio_k,mu_k,g_threshold_k")?;
        for k in 0..=self.k_max {
            let gk = match self.g_threshold[k] {
                Some(v) => format!("{v:.16e}"),
                None => "NaN".to_string(),
            };
            writeln!(
                w,
                "{k},{:.16e},{:.16e},{:.16e},{gk}",
                self.lambda[k], self.ratio[k], self.mu[k]
            )?;
        }
        Ok(())
    }

    pub fn report(&self) -> SpectrumReport {
        let g_star = self.g_star();
        let l_g = self.l_g_index();
        SpectrumReport {
            a: self.params.a,
            g: self.params.g,
            r: self.params.r,
            model: self.params.model.clone(),
            k_max: self.k_max,
            d0: self.params.denominator(self.ratio[0]),
            assumption_eq_ass_holds: self.assumption_holds(),
            g_star: g_star.as_ref().ok().copied(),
            g_star_error: g_star.err().map(|e| e.to_string()),
            l_g: l_g.as_ref().ok().copied(),
            l_g_error: l_g.err().map(|e| e.to_string()),
            classification: self.classify_stability(),
            modes: (0..=self.k_max)
                .map(|k| ModeRow {
                    k,
                    lambda: self.lambda[k],
                    ratio: self.ratio[k],
                    mu: self.mu[k],
                    g_threshold: self.g_threshold[k],
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub k: usize,
    pub lambda: f64,
    pub ratio: f64,
    pub mu: f64,
    pub g_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub a: f64,
    pub g: f64,
    pub r: f64,
    pub model: NutrientModel,
    pub k_max: usize,
    pub d0: f64,
    pub assumption_eq_ass_holds: bool,
    pub g_star: Option<GStar>,
    pub g_star_error: Option<String>,
    pub l_g: Option<usize>,
    pub l_g_error: Option<String>,
    pub classification: StabilityReport,
    pub modes: Vec<ModeRow>,
}

/// Builds the table at the steady radius of `a` and returns `G*`.
pub fn g_star(a: f64, model: &NutrientModel, k_max: usize, settings: &SolverSettings) -> Result<GStar> {
    let params = ModelParameters::at_steady_state(a, 0.0, model.clone(), settings)?;
    SpectrumTable::build(&params, k_max, settings)?.g_star()
}
