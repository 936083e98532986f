//! Estimation of the frequencies of a multisine signal.
//!
//! A state-variable filter turns the measured signal into a linear
//! regression `y = φᵀθ` in the coefficients θ of the polynomial whose roots
//! are `±iωᵢ`. Two estimators identify θ from it: a plain gradient law and
//! a DREM estimator that mixes delayed copies of the regression into `N`
//! scalar regressions with monotone error transients.

pub mod analysis;
pub mod config;
pub mod error;
pub mod freq_algebra;
pub mod freq_estimator;
pub mod multisine;
mod poly;
pub mod presets;
pub mod regression;
pub mod runner;
pub mod sim;
pub mod svf;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use multisine::{MultisineSignal, SinusoidComponent};
pub use sim::{run_experiment, EstimatorKind, EstimatorTrace, Experiment, SimConfig};
