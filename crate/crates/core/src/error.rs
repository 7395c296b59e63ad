use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("cannot certify: {0}")]
    CannotCertify(String),

    /// The transform argument sits on or beyond the abscissa of convergence.
    #[error("divergence risk: Re z = {re_z} is not below the decay rate {mu}")]
    DivergenceRisk { re_z: f64, mu: f64 },

    /// Adaptive quadrature ran out of subdivisions. Carries the best estimate.
    #[error("accuracy failure: best estimate {estimate} with error {abs_error:e} (requested {requested:e})")]
    AccuracyFailure {
        estimate: Complex64,
        abs_error: f64,
        requested: f64,
    },

    #[error("out of region: {0}")]
    OutOfRegion(String),

    #[error("consistency failure: routes disagree ({first} vs {second}, relative gap {gap:e})")]
    ConsistencyFailure {
        first: Complex64,
        second: Complex64,
        gap: f64,
    },

    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    /// Difference quotients of F blow up near the boundary line; the model
    /// should not claim F is holomorphic at mu.
    #[error("reclassify suggested: |F'| grows by a factor {growth:.3} per refinement near Re z = mu")]
    ReclassifySuggested { growth: f64, estimates: Vec<f64> },

    #[error("csv error at line {line}: {message}")]
    Csv { line: u64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
