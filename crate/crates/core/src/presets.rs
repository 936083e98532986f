//! Named experiment configurations.
//!
//! | name | setup |
//! |---|---|
//! | `fig-basic-n2` | two tones, λ = 5, K = diag(30, 3), t_on = 5, 200 s |
//! | `fig-drem-n2` | two tones, λ = 5, d = 0.3, γ = (0.1, 0.1), 150 s |
//! | `fig-gains-n2` | `fig-drem-n2` for γ ∈ {0.02, 0.1, 0.5} |
//! | `fig-basic-n3` | ω = (2, 3, 5), λ = 25, K = diag(240, 40, 10), t_on = 2 |
//! | `fig-drem-n3` | ω = (2, 3, 5), λ = 25, d = (0.2, 0.5), γ = 1e-5 each |
//! | `singular-delay-n2` | `fig-drem-n2` with d = 2π, the common period |
//!
//! The three-tone signal uses unit amplitudes and phases (0, π/4, π/3).
//!
//! Every preset carries both estimator sections so that the selected kind
//! can be overridden. `fig-drem-n3` runs at dt = 5e-5: with λ = 25 the
//! coefficients of `(s+λ)⁶` reach 2.4e8 and the RK4 error of the filter at
//! dt = 1e-3 leaves a bias of about 1e-3 in θ̂.

use std::f64::consts::PI;

use crate::config::{
    diagonal_rows, DremSection, EstimatorSection, EstimatorSelection, ExperimentConfig,
    GradientSection, OutputSection, SvfSection,
};
use crate::error::{Error, Result};
use crate::multisine::{MultisineSignal, SinusoidComponent};
use crate::sim::SimConfig;

pub const PRESET_NAMES: [&str; 6] = [
    "fig-basic-n2",
    "fig-drem-n2",
    "fig-gains-n2",
    "fig-basic-n3",
    "fig-drem-n3",
    "singular-delay-n2",
];

/// Gain grid of `fig-gains-n2`.
pub const GAIN_GRID: [f64; 3] = [0.02, 0.1, 0.5];

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub configs: Vec<ExperimentConfig>,
}

fn three_tone() -> Vec<SinusoidComponent> {
    vec![
        SinusoidComponent::new(1.0, 2.0, 0.0),
        SinusoidComponent::new(1.0, 3.0, PI / 4.0),
        SinusoidComponent::new(1.0, 5.0, PI / 3.0),
    ]
}

fn two_tone(label: &str, kind: EstimatorSelection, gamma: f64, t_end: f64) -> ExperimentConfig {
    ExperimentConfig {
        label: label.into(),
        theta_init: None,
        signal: MultisineSignal::two_tone_reference().components().to_vec(),
        svf: SvfSection {
            lambda: Some(5.0),
            a_coeffs: None,
        },
        estimator: EstimatorSection {
            kind,
            gradient: Some(GradientSection {
                gain: diagonal_rows(&[30.0, 3.0]),
                t_on: 5.0,
            }),
            drem: Some(DremSection {
                delays: vec![0.3],
                gains: vec![gamma, gamma],
                t_on: Some(5.0),
            }),
        },
        sim: SimConfig {
            dt: 1e-3,
            t_end,
            record_stride: 10,
        },
        output: OutputSection::default(),
    }
}

fn n3(label: &str, kind: EstimatorSelection, sim: SimConfig) -> ExperimentConfig {
    ExperimentConfig {
        label: label.into(),
        theta_init: None,
        signal: three_tone(),
        svf: SvfSection {
            lambda: Some(25.0),
            a_coeffs: None,
        },
        estimator: EstimatorSection {
            kind,
            gradient: Some(GradientSection {
                gain: diagonal_rows(&[240.0, 40.0, 10.0]),
                t_on: 2.0,
            }),
            drem: Some(DremSection {
                delays: vec![0.2, 0.5],
                gains: vec![1e-5; 3],
                t_on: Some(2.0),
            }),
        },
        sim,
        output: OutputSection::default(),
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    use EstimatorSelection::*;
    let p = match name {
        "fig-basic-n2" => Preset {
            name: "fig-basic-n2",
            description: "gradient estimator, two tones, K = diag(30, 3)",
            configs: vec![two_tone(name, Gradient, 0.1, 200.0)],
        },
        "fig-drem-n2" => Preset {
            name: "fig-drem-n2",
            description: "DREM, two tones, d = 0.3, gamma = 0.1",
            configs: vec![two_tone(name, Drem, 0.1, 150.0)],
        },
        "fig-gains-n2" => Preset {
            name: "fig-gains-n2",
            description: "DREM, two tones, gamma in {0.02, 0.1, 0.5}",
            configs: GAIN_GRID
                .iter()
                .map(|&g| two_tone(&format!("fig-gains-n2-g{g}"), Drem, g, 150.0))
                .collect(),
        },
        "fig-basic-n3" => Preset {
            name: "fig-basic-n3",
            description: "gradient estimator, three tones, K = diag(240, 40, 10)",
            configs: vec![n3(
                name,
                Gradient,
                SimConfig {
                    dt: 1e-3,
                    t_end: 400.0,
                    record_stride: 10,
                },
            )],
        },
        "fig-drem-n3" => Preset {
            name: "fig-drem-n3",
            description: "DREM, three tones, d = (0.2, 0.5), gamma = 1e-5",
            configs: vec![n3(
                name,
                Drem,
                SimConfig {
                    dt: 5e-5,
                    t_end: 30.0,
                    record_stride: 20,
                },
            )],
        },
        "singular-delay-n2" => {
            let mut cfg = two_tone(name, Drem, 0.1, 150.0);
            let drem = cfg
                .estimator
                .drem
                .as_mut()
                .expect("two-tone preset has drem");
            drem.delays = vec![2.0 * PI];
            // default activation: once the delayed row has left the transient
            drem.t_on = None;
            // puts the delay exactly on the grid
            cfg.sim.dt = 2.0 * PI / 6284.0;
            Preset {
                name: "singular-delay-n2",
                description: "DREM, two tones, delay equal to the common period 2 pi",
                configs: vec![cfg],
            }
        }
        other => {
            return Err(Error::UnknownPreset {
                name: other.into(),
                available: PRESET_NAMES.join(", "),
            })
        }
    };
    Ok(p)
}

pub fn all_presets() -> Vec<Preset> {
    PRESET_NAMES
        .iter()
        .map(|n| preset(n).expect("listed presets exist"))
        .collect()
}
