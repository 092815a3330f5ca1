use thiserror::Error;

/// Failure modes shared by every engine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{module}: cutoff would exceed limit {limit} before reaching the residual target (achieved residual {residual:.3e} at cutoff {cutoff})")]
    CutoffExceeded {
        module: &'static str,
        cutoff: usize,
        limit: usize,
        residual: f64,
    },

    #[error("{module}: probability leakage {leakage:.3e} exceeds threshold {threshold:.3e}")]
    Leakage {
        module: &'static str,
        leakage: f64,
        threshold: f64,
    },

    #[error("{module}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        module: &'static str,
        iterations: usize,
        residual: f64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter { .. })
    }

    /// Name of the module that raised a numerical failure.
    pub fn module(&self) -> Option<&'static str> {
        match self {
            Error::InvalidParameter { .. } => None,
            Error::CutoffExceeded { module, .. }
            | Error::Leakage { module, .. }
            | Error::NonConvergence { module, .. } => Some(module),
        }
    }

    /// Final residual carried by a numerical failure.
    pub fn residual(&self) -> Option<f64> {
        match self {
            Error::InvalidParameter { .. } => None,
            Error::CutoffExceeded { residual, .. } | Error::NonConvergence { residual, .. } => {
                Some(*residual)
            }
            Error::Leakage { leakage, .. } => Some(*leakage),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
