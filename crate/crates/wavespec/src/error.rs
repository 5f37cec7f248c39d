use thiserror::Error;

/// Crate-wide error type. Messages name the violated model condition
/// (A1..A5 for the ensemble/regime, W1..W3 for the filter bank) where one
/// applies, so CLI users see which hypothesis failed.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter sits outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Path synthesis failed (circulant embedding not nonnegative definite).
    #[error("synthesis error: {0}")]
    Synthesis(String),
    /// A sample-size/scale/dimension combination violates the admissible regime.
    #[error("regime error: {0}")]
    Regime(String),
    /// Filter bank or pyramid misuse.
    #[error("wavelet error: {0}")]
    Wavelet(String),
    /// Numerical evaluation (quadrature, series) failed to converge.
    #[error("evaluation error: {0}")]
    Evaluation(String),
    /// Eigensolver breakdown or a matrix with the wrong definiteness.
    #[error("solver error: {0}")]
    Solver(String),
    /// Experiment or CLI configuration is invalid.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors a user can fix by changing inputs, as opposed to
    /// failures arising mid-computation. The CLI maps the former to exit
    /// code 1 and the latter to exit code 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Regime(_) | Error::Wavelet(_) | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
