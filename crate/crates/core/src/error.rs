use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The panel budget ran out before the error estimate met its target.
    /// Carries the best value found so far.
    #[error(
        "quadrature did not converge at tau = {tau}: estimated error {abs_error:e} exceeds target {target:e}"
    )]
    ConvergenceFailure {
        tau: f64,
        value: Complex64,
        abs_error: f64,
        target: f64,
    },

    /// The amplitude is too close to zero for a ratio with its derivative to be trusted.
    #[error("ill-conditioned at tau = {tau}: |A| = {modulus:e} is within 10x its error estimate {abs_error:e}")]
    IllConditioned {
        tau: f64,
        modulus: f64,
        abs_error: f64,
    },

    #[error("insufficient data: {found} points in window, at least {needed} required")]
    InsufficientData { found: usize, needed: usize },

    #[error("at grid index {index}: {source}")]
    AtGridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Strips any grid-index wrapper.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtGridPoint { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::ConvergenceFailure { .. } | Error::IllConditioned { .. } | Error::InsufficientData { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
