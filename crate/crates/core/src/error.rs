use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller-supplied argument violates the documented precondition.
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    /// The evaluation point lies outside the regime where the discretization
    /// is trusted at working precision.
    #[error("{what} = {value} is outside the supported regime ({bound})")]
    OutOfRegime {
        what: &'static str,
        value: f64,
        bound: String,
    },

    /// `I - K` is singular (or its determinant is not positive) at the
    /// requested discretization.
    #[error("I - K is singular at this discretization (det = {det:e})")]
    Singular { det: f64 },

    /// A kernel or right-hand side produced NaN or an infinity.
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    /// An iterative solver stopped before meeting its tolerance.
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
