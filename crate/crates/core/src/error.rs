//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error(
        "{class}: exact expectation is #P-hard for this class; the brute-force \
         path enumerates 2^n instances and n = {n} exceeds the cap of {cap}"
    )]
    HardClassCapacity { class: String, n: usize, cap: usize },

    #[error("{what} supports at most {cap} features, got {n}")]
    CapacityExceeded { what: String, n: usize, cap: usize },

    #[error("conditioning on a zero-probability event: feature {feature} has probability 0 at value {value}")]
    ZeroProbabilityEvent { feature: usize, value: i64 },

    #[error("feature {feature}: probability of the explained value must be positive")]
    ZeroInstanceProbability { feature: usize },

    #[error("degenerate posterior: evidence set has probability 0 under both classes")]
    DegeneratePosterior,

    #[error("node {node} has zero cover; cover-weighted averaging is undefined")]
    ZeroCover { node: usize },

    #[error("precision audit failed: {0}")]
    PrecisionAudit(String),

    #[error("gadget construction failed: {0}")]
    GadgetConstruction(String),

    #[error("parse error{}: {msg}", location.as_ref().map(|l| format!(" at {}", l)).unwrap_or_default())]
    Parse { msg: String, location: Option<String> },

    #[error("interpolation self-check failed: recovered polynomial disagrees with the oracle at a fresh probe")]
    InterpolationSelfCheck,

    #[error("singular linear system: exact pivoting found a zero pivot")]
    SingularSystem,

    #[error("SHAP sum rule violated: scores sum to {got}, expected {expected}")]
    SumRule { got: String, expected: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse { msg: msg.into(), location: None }
    }

    pub fn parse_at(msg: impl Into<String>, location: impl Into<String>) -> Self {
        Error::Parse { msg: msg.into(), location: Some(location.into()) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
