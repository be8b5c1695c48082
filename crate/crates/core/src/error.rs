//! Error type shared by every module.

use thiserror::Error;

/// Convenience alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Diagnostics attached to a nonlinear fit that did not converge.
#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics {
    /// Iterations performed.
    pub iterations: usize,
    /// Last parameter vector.
    pub params: Vec<f64>,
    /// Weighted residual sum of squares at `params`.
    pub residual: f64,
    /// Norm of the last attempted step.
    pub last_step: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("fit failure: {message} (after {} iterations, residual {})", diagnostics.iterations, diagnostics.residual)]
    FitFailure {
        message: String,
        diagnostics: FitDiagnostics,
        /// `(lambda, value, variance)` points gathered before the fit failed.
        partial: Vec<(f64, f64, f64)>,
    },

    #[error("degenerate training set after {attempts} attempts: {message}")]
    DegenerateTraining { attempts: usize, message: String },

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("singular variance: {0}")]
    SingularVariance(String),

    #[error("division degenerate: {0}")]
    DivisionDegenerate(String),

    #[error("sampling exhausted: accepted {accepted} of {requested} after {attempts} attempts (acceptance rate {rate:.3e})")]
    SamplingExhausted {
        requested: usize,
        accepted: usize,
        attempts: usize,
        rate: f64,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("wiring error: {0}")]
    Wiring(String),

    #[error("task `{task}` failed: {message}")]
    Task { task: String, message: String },

    #[error("nothing to render: {0}")]
    NothingToRender(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error at `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
