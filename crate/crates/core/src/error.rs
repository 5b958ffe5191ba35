use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid nutrient model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    /// The shape left the admissible set `sup |rho| < 1/4`.
    #[error("shape outside the admissible neighbourhood: sup|rho| = {sup_norm:.6e} >= 0.25")]
    DomainValidity { sup_norm: f64 },

    #[error(
        "shooting bracket failure for lambda = {lambda}: U(1; c) - 1 = {residual_lo:.3e} at c = {c_lo:.3e}, \
         {residual_hi:.3e} at c = {c_hi:.3e}"
    )]
    ShootingBracket {
        lambda: f64,
        c_lo: f64,
        c_hi: f64,
        residual_lo: f64,
        residual_hi: f64,
    },

    #[error("shooting map is not increasing near c = {c:.6e}; the nutrient model is likely invalid")]
    NonMonotoneShooting { c: f64 },

    #[error("no sign change of the steady-radius function; sampled (R, g(R)): {samples:?}")]
    NoSignChange { samples: Vec<(f64, f64)> },

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("ode integration failed: {0}")]
    Integration(String),

    #[error("no mode k <= {k_max} with negative threshold denominator; increase k_max")]
    NoThresholdCandidate { k_max: usize },

    #[error("threshold minimum not certified within k_max = {k_max}: {reason}")]
    ThresholdNotCertified { k_max: usize, reason: String },

    #[error(
        "positivity assumption A/2 * u0'(1)/u0(1) + A - f(1) > 0 violated (d0 = {d0:.6e}); \
         mu_0 is not negative for G > 0"
    )]
    AssumptionViolated { d0: f64 },

    #[error("newton iteration did not converge; residual history: {history:?}")]
    NewtonDivergence { history: Vec<f64> },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("mode {k} is not covered by the spectrum table (k_max = {k_max})")]
    ModeOutOfTable { k: i64, k_max: usize },

    #[error("growth-rate fit: {0}")]
    Fit(String),
}

impl Error {
    /// True for errors caused by bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidModel(_)
                | Error::InvalidParameter(_)
                | Error::InvalidShape(_)
                | Error::DomainValidity { .. }
                | Error::ModeOutOfTable { .. }
                | Error::AssumptionViolated { .. }
        )
    }
}
