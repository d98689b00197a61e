use thiserror::Error;

/// Errors raised by the numerical routines and the link models built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root finder did not converge in {iterations} iterations; last bracket [{lo}, {hi}]")]
    Convergence { iterations: usize, lo: f64, hi: f64 },

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error} after {intervals} intervals")]
    Accuracy {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("mode {name} unusable: per-attempt target {p_target} is not below its PER amplitude {amplitude}")]
    UnusableMode {
        name: String,
        p_target: f64,
        amplitude: f64,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}
