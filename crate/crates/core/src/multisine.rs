//! Multisine signal model `u(t) = Σ Aᵢ sin(ωᵢ t + φᵢ)`.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance under which two frequencies count as equal.
pub const FREQ_DISTINCT_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinusoidComponent {
    pub amplitude: f64,
    /// rad/s
    pub frequency: f64,
    /// rad, normalized into `[0, 2π)`
    #[serde(default)]
    pub phase: f64,
}

impl SinusoidComponent {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self {
            amplitude,
            frequency,
            phase: normalize_phase(phase),
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).sin()
    }
}

pub fn normalize_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

pub(crate) fn frequencies_coincide(a: f64, b: f64) -> bool {
    (a - b).abs() <= FREQ_DISTINCT_RTOL * a.abs().max(b.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    NonPositiveAmplitude {
        index: usize,
        value: f64,
    },
    NonPositiveFrequency {
        index: usize,
        value: f64,
    },
    NonFinite {
        index: usize,
    },
    DuplicateFrequency {
        first: usize,
        second: usize,
        frequency: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "signal has no components"),
            Violation::NonPositiveAmplitude { index, value } => {
                write!(f, "component {index}: amplitude {value} is not positive")
            }
            Violation::NonPositiveFrequency { index, value } => {
                write!(f, "component {index}: frequency {value} is not positive")
            }
            Violation::NonFinite { index } => write!(f, "component {index}: non-finite value"),
            Violation::DuplicateFrequency {
                first,
                second,
                frequency,
            } => write!(
                f,
                "components {first} and {second} share frequency {frequency}"
            ),
        }
    }
}

/// Every constraint a component list fails, in component order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks positivity of amplitudes and frequencies and pairwise distinct
/// frequencies.
pub fn validate(components: &[SinusoidComponent]) -> std::result::Result<(), ViolationReport> {
    let mut report = ViolationReport::default();
    if components.is_empty() {
        report.violations.push(Violation::Empty);
    }
    for (index, c) in components.iter().enumerate() {
        if !(c.amplitude.is_finite() && c.frequency.is_finite() && c.phase.is_finite()) {
            report.violations.push(Violation::NonFinite { index });
            continue;
        }
        if c.amplitude <= 0.0 {
            report.violations.push(Violation::NonPositiveAmplitude {
                index,
                value: c.amplitude,
            });
        }
        if c.frequency <= 0.0 {
            report.violations.push(Violation::NonPositiveFrequency {
                index,
                value: c.frequency,
            });
        }
    }
    for i in 0..components.len() {
        for j in i + 1..components.len() {
            let (a, b) = (components[i].frequency, components[j].frequency);
            if a.is_finite() && b.is_finite() && frequencies_coincide(a, b) {
                report.violations.push(Violation::DuplicateFrequency {
                    first: i,
                    second: j,
                    frequency: a,
                });
            }
        }
    }
    if report.is_empty() {
        Ok(())
    } else {
        Err(report)
    }
}

/// Validated sum of sinusoids. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MultisineSignal {
    components: Vec<SinusoidComponent>,
}

impl MultisineSignal {
    pub fn new(components: Vec<SinusoidComponent>) -> Result<Self> {
        let components: Vec<_> = components
            .into_iter()
            .map(|c| SinusoidComponent::new(c.amplitude, c.frequency, c.phase))
            .collect();
        validate(&components).map_err(Error::InvalidSignal)?;
        Ok(Self { components })
    }

    /// `1.2 sin(2t + π/3) + 2 sin(3t + π/4)`, the two-tone test signal.
    pub fn two_tone_reference() -> Self {
        use std::f64::consts::PI;
        Self::new(vec![
            SinusoidComponent::new(1.2, 2.0, PI / 3.0),
            SinusoidComponent::new(2.0, 3.0, PI / 4.0),
        ])
        .expect("reference signal is valid")
    }

    pub fn components(&self) -> &[SinusoidComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.frequency).collect()
    }

    pub fn max_frequency(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.frequency)
            .fold(0.0, f64::max)
    }

    pub fn min_frequency(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.frequency)
            .fold(f64::INFINITY, f64::min)
    }

    /// Upper bound on `|u(t)|`.
    pub fn amplitude_sum(&self) -> f64 {
        self.components.iter().map(|c| c.amplitude).sum()
    }

    #[inline]
    pub fn evaluate(&self, t: f64) -> f64 {
        self.components.iter().map(|c| c.eval(t)).sum()
    }
}
