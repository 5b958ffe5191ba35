use std::path::PathBuf;

use thiserror::Error;
use tumorflow_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    /// The evolution halted because the shape left the admissible set.
    #[error("shape left the admissible neighbourhood at t = {t:.6e} (sup|rho| = {sup_norm:.6e})")]
    LeftNeighbourhood { t: f64, sup_norm: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("appendix check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 2,
            Self::Core(e) if e.is_validation() => 2,
            Self::Core(_) | Self::Check(_) | Self::Io { .. } => 3,
            Self::LeftNeighbourhood { .. } => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
