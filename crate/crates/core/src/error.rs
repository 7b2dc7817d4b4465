use thiserror::Error;

/// Errors raised by the numerical routines and the command-line layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input data; `field` names the offending item.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An improper integral diverges (e.g. the depth at `lambda0` for class I).
    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("subcritical parameter: r = {r} does not exceed the critical value r_c = {r_c}; no stream solutions exist")]
    SubcriticalParameter { r: f64, r_c: f64 },

    #[error("r = {r} is not below r0 = {r0}; the subcritical stream does not exist")]
    BeyondR0 { r: f64, r0: f64 },

    /// Quadrature, root bracketing or ODE integration failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Computed quantities contradict a structural property (e.g. mu0 >= 0 at a subcritical stream).
    #[error("inconsistent state: {0}")]
    Inconsistent(String),

    /// The discrete height function lost monotonicity in p at node (i, j).
    #[error("stagnation/fold: discrete h_p <= 0 at grid node (i = {i}, j = {j})")]
    Stagnation { i: usize, j: usize },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("turning point: Jacobian condition estimate {condition:e} exceeds the limit")]
    TurningPoint { condition: f64 },

    #[error("seed rejected: half-period {half_period} exceeds the cap {cap}")]
    SeedRejected { half_period: f64, cap: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of an iterative solver (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_)
                | Error::NoConvergence { .. }
                | Error::TurningPoint { .. }
                | Error::Stagnation { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
