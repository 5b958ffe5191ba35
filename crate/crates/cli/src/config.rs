//! Run configuration: one JSON document, with command-line flags applied on top.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tumorflow_core::linear::ModeSeed;
use tumorflow_core::nonlinear::{GridSettings, StepperSettings};
use tumorflow_core::radial::SolverSettings;
use tumorflow_core::NutrientModel;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EvolveMode {
    #[default]
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub a_values: Vec<f64>,
    pub g_values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: NutrientModel,
    pub a: Option<f64>,
    pub g: f64,
    /// Domain radius; the steady radius of `a` when absent.
    pub r: Option<f64>,
    pub k_max: usize,
    pub mode: EvolveMode,
    pub t_end: f64,
    /// Output times of the linear flow (uniform, including both ends).
    pub samples: usize,
    /// Growth rates in the evolve report are fitted while `sup |rho|` stays below this.
    pub fit_max_sup_norm: f64,
    pub seed_shape: Vec<ModeSeed>,
    pub solver: SolverSettings,
    pub grid: GridSettings,
    pub stepper: StepperSettings,
    pub sweep: SweepConfig,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: NutrientModel::identity(),
            a: None,
            g: 0.0,
            r: None,
            k_max: tumorflow_core::spectrum::DEFAULT_K_MAX,
            mode: EvolveMode::Linear,
            t_end: 1.0,
            samples: 101,
            fit_max_sup_norm: 5e-3,
            seed_shape: Vec::new(),
            solver: SolverSettings::default(),
            grid: GridSettings::default(),
            stepper: StepperSettings::default(),
            sweep: SweepConfig::default(),
            out: PathBuf::from("out"),
        }
    }
}

/// Flag values that replace config fields when present.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Apoptosis parameter A, in (0, f(1)).
    #[arg(long = "A", value_name = "A", allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Mitosis rate G.
    #[arg(long = "G", value_name = "G", allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// Domain radius, overriding the steady radius of A.
    #[arg(long = "R", value_name = "R")]
    pub r: Option<f64>,
    /// `identity` or `poly:c1,c2,...` for f(u) = c1 u + c2 u^2 + ...
    #[arg(long, value_name = "MODEL")]
    pub model: Option<NutrientModel>,
    #[arg(long, value_name = "N")]
    pub kmax: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<EvolveMode>,
    #[arg(long = "t-end", value_name = "T")]
    pub t_end: Option<f64>,
    /// Comma-separated `k:amp[:phase]` terms of `sum amp cos(k theta + phase)`.
    #[arg(long = "seed-shape", value_name = "SEEDS", value_delimiter = ',', allow_hyphen_values = true)]
    pub seed_shape: Option<Vec<ModeSeed>>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Radial collocation nodes of the nonlinear solver.
    #[arg(long = "n-r", value_name = "N")]
    pub n_r: Option<usize>,
    /// Angular nodes of the nonlinear solver.
    #[arg(long = "n-theta", value_name = "N")]
    pub n_theta: Option<usize>,
    /// Local error target of the nonlinear stepper.
    #[arg(long, value_name = "TOL")]
    pub tol: Option<f64>,
    /// Comma-separated snapshot times.
    #[arg(long, value_name = "TIMES", value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    /// Comma-separated A values for `sweep`.
    #[arg(long = "A-values", value_name = "LIST", value_delimiter = ',')]
    pub a_values: Option<Vec<f64>>,
    /// Comma-separated G values for `sweep`.
    #[arg(long = "G-values", value_name = "LIST", value_delimiter = ',', allow_hyphen_values = true)]
    pub g_values: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn resolve(o: &Overrides) -> CliResult<Self> {
        let mut c = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(v) = o.a {
            c.a = Some(v);
        }
        if let Some(v) = o.g {
            c.g = v;
        }
        if let Some(v) = o.r {
            c.r = Some(v);
        }
        if let Some(v) = &o.model {
            c.model = v.clone();
        }
        if let Some(v) = o.kmax {
            c.k_max = v;
        }
        if let Some(v) = o.mode {
            c.mode = v;
        }
        if let Some(v) = o.t_end {
            c.t_end = v;
        }
        if let Some(v) = &o.seed_shape {
            c.seed_shape = v.clone();
        }
        if let Some(v) = &o.out {
            c.out = v.clone();
        }
        if let Some(v) = o.n_r {
            c.grid.n_r = v;
        }
        if let Some(v) = o.n_theta {
            c.grid.n_theta = v;
        }
        if let Some(v) = o.tol {
            c.stepper.tol = v;
        }
        if let Some(v) = &o.snapshots {
            c.stepper.snapshot_times = v.clone();
        }
        if let Some(v) = &o.a_values {
            c.sweep.a_values = v.clone();
        }
        if let Some(v) = &o.g_values {
            c.sweep.g_values = v.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Validation(m));
        if let Some(a) = self.a {
            let f1 = self.model.f_at_one();
            if !(a > 0.0 && a < f1) {
                return bad(format!("A = {a} must lie in (0, f(1)) = (0, {f1})"));
            }
        }
        if !self.g.is_finite() {
            return bad("G must be finite".into());
        }
        if let Some(r) = self.r {
            if !(r > 0.0 && r.is_finite()) {
                return bad(format!("R = {r} must be positive"));
            }
        }
        if self.k_max < 2 {
            return bad("k_max must be at least 2".into());
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be finite and >= 0", self.t_end));
        }
        if self.samples < 2 {
            return bad("samples must be at least 2".into());
        }
        if !(self.fit_max_sup_norm > 0.0) {
            return bad("fit_max_sup_norm must be positive".into());
        }
        if let Some(s) = self.seed_shape.iter().find(|s| s.k > self.k_max) {
            return bad(format!("seed mode {} exceeds k_max = {}", s.k, self.k_max));
        }
        self.solver.validate()?;
        self.grid.validate()?;
        self.stepper.validate()?;
        Ok(())
    }

    pub fn require_a(&self) -> CliResult<f64> {
        self.a.ok_or_else(|| CliError::Validation("A is required (--A or \"a\" in the config)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_fills_defaults() {
        let c: RunConfig =
            serde_json::from_str(r#"{"a": 0.5, "grid": {"n_r": 24}, "model": {"kind": "polynomial", "coefficients": [1, 0.5]}}"#)
                .unwrap();
        assert_eq!(c.grid.n_r, 24);
        assert_eq!(c.grid.n_theta, GridSettings::default().n_theta);
        assert_eq!(c.model.coefficients(), &[1.0, 0.5]);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn overrides_win() {
        let o = Overrides {
            a: Some(0.3),
            g: Some(-2.0),
            kmax: Some(12),
            ..Overrides::default()
        };
        let c = RunConfig::resolve(&o).unwrap();
        assert_eq!((c.a, c.g, c.k_max), (Some(0.3), -2.0, 12));
        let o = Overrides { a: Some(1.5), ..Overrides::default() };
        assert!(matches!(RunConfig::resolve(&o), Err(CliError::Validation(_))));
    }
}
