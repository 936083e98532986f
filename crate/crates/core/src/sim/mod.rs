//! Fixed-step simulation of the filter and estimators on a single clock.

mod engine;
pub mod rk4;
mod trace;

pub use engine::{run_experiment, Experiment, RunOutput, SimConfig};
pub use rk4::{rk4_step, Rk4};
pub use trace::{EstimatorKind, EstimatorTrace};
