use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = EmphiError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EmphiError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: cannot parse {token:?} as a number")]
    Parse {
        path: PathBuf,
        line: usize,
        token: String,
    },

    #[error("non-finite observation at row {row}")]
    NonFinite { row: usize },

    #[error("sample has {len} observations, at least 2 are required")]
    TooFewObservations { len: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("center {center} lies outside the open convex hull of the sample")]
    CenterOutsideHull { center: f64 },

    #[error("delta0 = {delta0} is infeasible: the constrained empirical likelihood is empty")]
    InfeasibleDelta { delta0: f64 },

    #[error("solver failed to converge after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("degenerate system: {0}")]
    DegenerateSystem(&'static str),

    #[error("Renyi transform undefined at statistic {statistic} (log argument {argument})")]
    RenyiDomain { statistic: f64, argument: f64 },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("pooled variance is zero")]
    ZeroVariance,

    #[error("statistic {statistic} at the point estimate exceeds threshold {threshold}")]
    InversionFailed { statistic: f64, threshold: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{failures} of {replications} replications failed (at most {allowed} allowed)")]
    ExcessiveFailures {
        failures: usize,
        replications: usize,
        allowed: usize,
    },
}

impl EmphiError {
    /// Infeasibility of the null hypothesis, as opposed to a numerical failure.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            EmphiError::InfeasibleDelta { .. } | EmphiError::CenterOutsideHull { .. }
        )
    }
}
