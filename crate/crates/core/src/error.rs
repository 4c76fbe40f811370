use thiserror::Error;

/// Errors produced by the numerical library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A physical parameter violates its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Validation { name: &'static str, reason: String },

    /// An argument lies outside the domain of the requested function.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A quadrature, series or root-finding procedure failed to reach its tolerance.
    #[error("no convergence in {op}: {reason}")]
    NonConvergence { op: &'static str, reason: String },

    /// The quadratic form is not positive definite; the system sits above threshold.
    #[error("supercritical: {0}")]
    Supercritical(String),

    /// No sign change of the critical determinant was found.
    #[error("no critical root: {0}")]
    NoRoot(String),
}

impl Error {
    pub(crate) fn validation(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn non_convergence(op: &'static str, reason: impl Into<String>) -> Self {
        Error::NonConvergence {
            op,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::Domain { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
