use num_complex::Complex64;
use thiserror::Error;

use crate::multisine::ViolationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(ViolationReport),

    #[error("filter pole must be positive, got lambda = {0}")]
    NonHurwitz(f64),

    #[error("invalid filter coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("gain matrix must be symmetric positive definite")]
    NotPositiveDefinite,

    #[error("gains must be positive, got {0:?}")]
    NonPositiveGain(Vec<f64>),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("delays must be distinct")]
    DuplicateDelays,

    #[error("invalid estimator config: {0}")]
    InvalidEstimator(String),

    #[error("invalid frequencies: {0}")]
    InvalidFrequencies(String),

    #[error("not a frequency vector; roots {roots:?}")]
    NotFrequencyVector { roots: Vec<Complex64> },

    #[error("invalid simulation settings: {0}")]
    InvalidSim(String),

    #[error("empty trace")]
    EmptyTrace,

    #[error("window too short: span {span} s, need at least {required} s")]
    WindowTooShort { span: f64, required: f64 },

    #[error("non-finite derivative at t = {t}")]
    NonFinite { t: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown preset {name:?}; available presets: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors raised while checking inputs, before any run starts.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::NonFinite { .. } | Error::Io(_))
    }
}
