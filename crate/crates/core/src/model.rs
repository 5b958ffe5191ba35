//! Nutrient consumption law `f`.
//!
//! Models are polynomials without constant term, `f(u) = c1 u + c2 u^2 + ...`,
//! so `f(0) = 0` holds structurally. Construction checks `f' > 0` on a sampled
//! grid that extends past 1, since solver iterates can overshoot the boundary
//! value slightly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of sample points used to validate `f' > 0`.
pub const VALIDATION_SAMPLES: usize = 1024;
/// Upper end of the validation interval is `1 + VALIDATION_MARGIN`.
pub const VALIDATION_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Identity,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct NutrientModel {
    kind: ModelKind,
    /// `coefficients[i]` multiplies `u^(i+1)`.
    coefficients: Vec<f64>,
}

impl NutrientModel {
    pub fn identity() -> Self {
        Self {
            kind: ModelKind::Identity,
            coefficients: vec![1.0],
        }
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidModel("polynomial needs at least one coefficient".into()));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidModel("coefficients must be finite".into()));
        }
        let model = Self {
            kind: ModelKind::Polynomial,
            coefficients,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let upper = 1.0 + VALIDATION_MARGIN;
        for i in 0..VALIDATION_SAMPLES {
            let u = upper * i as f64 / (VALIDATION_SAMPLES - 1) as f64;
            let d = self.fprime(u);
            if !(d > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "f'({u:.6}) = {d:.6e} is not positive"
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn f(&self, u: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| (acc + c) * u)
    }

    pub fn fprime(&self, u: f64) -> f64 {
        let n = self.coefficients.len();
        let mut acc = 0.0;
        for i in (0..n).rev() {
            acc = acc * u + (i + 1) as f64 * self.coefficients[i];
        }
        acc
    }

    pub fn f_at_one(&self) -> f64 {
        self.coefficients.iter().sum()
    }
}

impl std::fmt::Display for NutrientModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ModelKind::Identity => write!(f, "identity"),
            ModelKind::Polynomial => {
                let parts: Vec<String> = self.coefficients.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
        }
    }
}

impl std::str::FromStr for NutrientModel {
    type Err = Error;

    /// Parses `identity` or `poly:c1,c2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("identity") || s.eq_ignore_ascii_case("id") {
            return Ok(Self::identity());
        }
        let Some(rest) = s.strip_prefix("poly:") else {
            return Err(Error::InvalidModel(format!(
                "unknown model '{s}', expected 'identity' or 'poly:c1,c2,...'"
            )));
        };
        let coefficients = rest
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidModel(format!("bad coefficient '{p}': {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::polynomial(coefficients)
    }
}

/// Serialized form of a model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Identity,
    Polynomial { coefficients: Vec<f64> },
}

impl TryFrom<ModelSpec> for NutrientModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::Identity => Ok(Self::identity()),
            ModelSpec::Polynomial { coefficients } => Self::polynomial(coefficients),
        }
    }
}

impl From<NutrientModel> for ModelSpec {
    fn from(m: NutrientModel) -> Self {
        match m.kind {
            ModelKind::Identity => ModelSpec::Identity,
            ModelKind::Polynomial => ModelSpec::Polynomial {
                coefficients: m.coefficients,
            },
        }
    }
}
