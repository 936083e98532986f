//! TOML experiment description.
//!
//! ```toml
//! label = "two-tone"
//! # theta_init = [0.0, 0.0]
//!
//! [[signal]]
//! amplitude = 1.2
//! frequency = 2.0
//! phase = 1.0471975511965976
//!
//! [[signal]]
//! amplitude = 2.0
//! frequency = 3.0
//! phase = 0.7853981633974483
//!
//! [svf]
//! lambda = 5.0
//! # a_coeffs = [625.0, 500.0, 150.0, 20.0]   (ascending, instead of lambda)
//!
//! [estimator]
//! kind = "both"              # gradient | drem | both
//!
//! [estimator.gradient]
//! gain = [[30.0, 0.0], [0.0, 3.0]]
//! t_on = 5.0
//!
//! [estimator.drem]
//! delays = [0.3]
//! gains = [0.1, 0.1]
//! t_on = 5.0                 # optional
//!
//! [sim]
//! dt = 0.001
//! t_end = 150.0
//! record_stride = 10
//!
//! [output]
//! directory = "out"
//! emit_reports = true
//! ```
//!
//! Unknown keys are rejected. Only the estimator sections selected by
//! `kind` need to be present.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freq_estimator::{default_t_on, DremEstimatorConfig, GradientEstimatorConfig};
use crate::multisine::{MultisineSignal, SinusoidComponent};
use crate::sim::{EstimatorKind, Experiment, SimConfig};
use crate::svf::{SvfConfig, SvfMatrices};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorSelection {
    Gradient,
    Drem,
    Both,
}

impl EstimatorSelection {
    pub fn kinds(self) -> &'static [EstimatorKind] {
        match self {
            EstimatorSelection::Gradient => &[EstimatorKind::Gradient],
            EstimatorSelection::Drem => &[EstimatorKind::Drem],
            EstimatorSelection::Both => &[EstimatorKind::Gradient, EstimatorKind::Drem],
        }
    }
}

impl fmt::Display for EstimatorSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorSelection::Gradient => "gradient",
            EstimatorSelection::Drem => "drem",
            EstimatorSelection::Both => "both",
        })
    }
}

impl FromStr for EstimatorSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient" => Ok(Self::Gradient),
            "drem" => Ok(Self::Drem),
            "both" => Ok(Self::Both),
            other => Err(Error::Config(format!(
                "unknown estimator kind {other:?} (expected gradient, drem or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvfSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientSection {
    /// Row-major, `N × N`.
    pub gain: Vec<Vec<f64>>,
    pub t_on: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DremSection {
    pub delays: Vec<f64>,
    pub gains: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_on: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub kind: EstimatorSelection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient: Option<GradientSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drem: Option<DremSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_true")]
    pub emit_reports: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            emit_reports: true,
        }
    }
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

fn default_label() -> String {
    "experiment".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Prefix of the output file names.
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_init: Option<Vec<f64>>,
    pub signal: Vec<SinusoidComponent>,
    pub svf: SvfSection,
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Filter pole: `lambda` when given, else the mean pole magnitude of
    /// `a_coeffs`.
    pub fn lambda(&self) -> Option<f64> {
        match (&self.svf.lambda, &self.svf.a_coeffs) {
            (Some(l), _) => Some(*l),
            (None, Some(a)) if !a.is_empty() => Some(a[a.len() - 1] / a.len() as f64),
            _ => None,
        }
    }

    fn svf_matrices(&self, n: usize) -> Result<SvfMatrices> {
        match (&self.svf.lambda, &self.svf.a_coeffs) {
            (Some(lambda), None) => SvfMatrices::build(&SvfConfig::new(n, *lambda)?),
            (None, Some(a)) => SvfMatrices::from_coeffs(a.clone()),
            _ => Err(Error::Config(
                "[svf] needs exactly one of `lambda` or `a_coeffs`".into(),
            )),
        }
    }

    /// Validates every section and assembles the run description.
    pub fn to_experiment(&self) -> Result<Experiment> {
        let signal = MultisineSignal::new(self.signal.clone())?;
        let n = signal.len();
        let svf = self.svf_matrices(n)?;
        if svf.n_freqs() != n {
            return Err(Error::Dimension {
                what: "filter order (frequencies)",
                expected: n,
                got: svf.n_freqs(),
            });
        }
        let kinds = self.estimator.kind.kinds();

        let gradient = if kinds.contains(&EstimatorKind::Gradient) {
            let sec = self.estimator.gradient.as_ref().ok_or_else(|| {
                Error::Config("estimator kind needs an [estimator.gradient] section".into())
            })?;
            let cfg = GradientEstimatorConfig {
                gain: gain_matrix(&sec.gain)?,
                t_on: sec.t_on,
            };
            cfg.validate(n)?;
            Some(cfg)
        } else {
            None
        };

        let drem = if kinds.contains(&EstimatorKind::Drem) {
            let sec = self.estimator.drem.as_ref().ok_or_else(|| {
                Error::Config("estimator kind needs an [estimator.drem] section".into())
            })?;
            let lambda = self.lambda().expect("filter built above");
            let cfg = DremEstimatorConfig {
                delays: sec.delays.clone(),
                gains: sec.gains.clone(),
                t_on: sec
                    .t_on
                    .unwrap_or_else(|| default_t_on(&sec.delays, lambda)),
            };
            cfg.validate(n)?;
            Some(cfg)
        } else {
            None
        };

        self.sim.validate()?;
        if let Some(init) = &self.theta_init {
            if init.len() != n || init.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!(
                    "theta_init must hold {n} finite values, got {init:?}"
                )));
            }
        }
        Ok(Experiment {
            signal,
            svf,
            gradient,
            drem,
            sim: self.sim,
            theta_init: self.theta_init.clone(),
        })
    }
}

fn gain_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::Config(format!(
            "gain must be a square matrix; found a row of length {} in a {n}-row matrix",
            bad.len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub(crate) fn diagonal_rows(d: &[f64]) -> Vec<Vec<f64>> {
    (0..d.len())
        .map(|i| {
            (0..d.len())
                .map(|j| if i == j { d[i] } else { 0.0 })
                .collect()
        })
        .collect()
}
