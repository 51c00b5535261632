use thiserror::Error;

/// Errors surfaced by the numerical engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter violates a type invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {subdivisions} subdivisions")]
    NotConverged {
        value: f64,
        error: f64,
        subdivisions: usize,
    },

    /// The moment series did not settle within the term budget.
    #[error("moment series did not converge at k = {k_max} (last |term| = {last_term:e}); reduce the split point a")]
    SeriesDivergence { k_max: usize, last_term: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by numerical non-convergence rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. } | Error::SeriesDivergence { .. }
        )
    }
}
