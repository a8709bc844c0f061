use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// An exact integer result does not fit the target integer type.
    #[error("integer overflow in {op}: {detail}")]
    Overflow { op: &'static str, detail: String },

    /// A closed-form expression diverges at the requested point.
    #[error("divergent result in {op}: {detail}")]
    Divergence { op: &'static str, detail: String },

    /// An iterative or quadrature routine failed to meet its accuracy contract.
    #[error("numerical non-convergence in {op}: {detail}")]
    NonConvergence { op: &'static str, detail: String },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { op, detail: detail.into() }
    }

    pub(crate) fn non_convergence(op: &'static str, detail: impl Into<String>) -> Self {
        Error::NonConvergence { op, detail: detail.into() }
    }

    /// True for the variants that signal a numerical (rather than input) failure.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Divergence { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;
