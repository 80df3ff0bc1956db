use thiserror::Error;

/// Errors raised by the numerical routines and the run configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the domain of a function (NaN, infinity, negative where not allowed).
    #[error("domain error: {0}")]
    Domain(String),

    /// Quadrature, bisection or Newton iteration did not reach its tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A hypothesis on the data or parameters is violated.
    #[error("configuration error: {0}")]
    Config(String),

    /// A checked invariant failed at run time.
    #[error("invariant failure: {0}")]
    Invariant(String),

    /// The nonlinear solve stopped before the residual reached its tolerance.
    #[error("no convergence after {iterations} iterations (last residual {last:.3e})")]
    NoConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {t}")))
    }
}
