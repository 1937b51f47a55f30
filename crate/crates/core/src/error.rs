use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integrand not finite at node (u = {u}, v = {v}): {value}")]
    Integration { u: f64, v: f64, value: f64 },

    #[error("no convergence after {iterations} iterations; best iterate x = {best_x}, f = {best_f}")]
    Convergence {
        iterations: usize,
        best_x: f64,
        best_f: f64,
    },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("correlation matrix is not positive definite: leading minor of order {minor} fails")]
    Definiteness { minor: usize },

    #[error("invalid construction: {0}")]
    Validity(String),

    #[error("insufficient data: {have} usable observations, at least {need} required")]
    InsufficientData { have: usize, need: usize },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("estimator did not converge at k = {k} (trace so far has {} entries)", trace.len())]
    EstimatorConvergence { k: usize, trace: Vec<f64> },

    #[error("bootstrap failed: {missing} of {total} replicates missing")]
    Bootstrap { missing: usize, total: usize },

    #[error("experiment aborted: {failures} of {total} replications failed for parameter {param}")]
    Experiment {
        param: f64,
        failures: usize,
        total: usize,
    },

    #[error("line {line}: {message}")]
    Ingestion { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
