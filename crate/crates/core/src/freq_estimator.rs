//! Frequency estimators driven by the filter regression `y = φᵀθ`.
//!
//! [`GradientFrequencyEstimator`] is the baseline `θ̂' = Kφ(y − φᵀθ̂)`.
//! [`DremFrequencyEstimator`] stacks the regression with `N − 1` delayed
//! copies, mixes with the adjugate of `Φ_e` and runs one scalar gradient law
//! per coefficient: `θ̂ᵢ' = γᵢψ(Yᵢ − ψθ̂ᵢ)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::regression::{
    mix, DelayGrid, Operator, OperatorBank, ScalarEstimatorState, VectorGradientState,
};
use crate::svf::RegressorSample;

/// Activation time when none is given: at least 5 s, and late enough that
/// the oldest delayed row has left the filter transient (`e^{-25}`).
pub fn default_t_on(delays: &[f64], lambda: f64) -> f64 {
    let max_delay = delays.iter().copied().fold(0.0, f64::max);
    5.0f64.max(max_delay + 25.0 / lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimatorConfig {
    pub gain: DMatrix<f64>,
    pub t_on: f64,
}

impl GradientEstimatorConfig {
    pub fn diagonal(gains: &[f64], t_on: f64) -> Self {
        Self {
            gain: DMatrix::from_diagonal(&DVector::from_column_slice(gains)),
            t_on,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.gain.nrows() != n || self.gain.ncols() != n {
            return Err(Error::Dimension {
                what: "gradient gain",
                expected: n,
                got: self.gain.nrows(),
            });
        }
        if !(self.t_on >= 0.0 && self.t_on.is_finite()) {
            return Err(Error::InvalidEstimator(format!(
                "t_on must be nonnegative, got {}",
                self.t_on
            )));
        }
        if !crate::regression::is_symmetric_positive_definite(&self.gain) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GradientFrequencyEstimator {
    t_on: f64,
    state: VectorGradientState,
}

impl GradientFrequencyEstimator {
    pub fn new(cfg: &GradientEstimatorConfig, theta_init: Vec<f64>) -> Result<Self> {
        cfg.validate(theta_init.len())?;
        Ok(Self {
            t_on: cfg.t_on,
            state: VectorGradientState::new(theta_init, cfg.gain.clone())?,
        })
    }

    pub fn t_on(&self) -> f64 {
        self.t_on
    }

    pub fn theta_hat(&self) -> &[f64] {
        &self.state.r_hat
    }

    pub fn is_active(&self, t: f64) -> bool {
        t >= self.t_on
    }

    /// Advances `θ̂` over `[sample.t, sample.t + dt]`. Returns whether the
    /// estimator adapted (it is gated off before `t_on`).
    pub fn step(&mut self, sample: &RegressorSample, dt: f64) -> Result<bool> {
        if sample.phi.len() != self.state.r_hat.len() {
            return Err(Error::Dimension {
                what: "regressor",
                expected: self.state.r_hat.len(),
                got: sample.phi.len(),
            });
        }
        if !self.is_active(sample.t) {
            return Ok(false);
        }
        self.state.step(sample.y, &sample.phi, dt)?;
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DremEstimatorConfig {
    /// `N − 1` distinct positive delays, s
    pub delays: Vec<f64>,
    /// `N` positive gains
    pub gains: Vec<f64>,
    pub t_on: f64,
}

impl DremEstimatorConfig {
    pub fn with_default_t_on(delays: Vec<f64>, gains: Vec<f64>, lambda: f64) -> Self {
        let t_on = default_t_on(&delays, lambda);
        Self {
            delays,
            gains,
            t_on,
        }
    }

    pub fn max_delay(&self) -> f64 {
        self.delays.iter().copied().fold(0.0, f64::max)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.delays.len() + 1 != n {
            return Err(Error::InvalidEstimator(format!(
                "{n} frequencies need {} delays, got {}",
                n - 1,
                self.delays.len()
            )));
        }
        if self.gains.len() != n {
            return Err(Error::InvalidEstimator(format!(
                "{n} frequencies need {n} gains, got {}",
                self.gains.len()
            )));
        }
        if let Some(d) = self.delays.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidOperator(format!(
                "delay must be positive, got {d}"
            )));
        }
        for i in 0..self.delays.len() {
            for j in i + 1..self.delays.len() {
                if self.delays[i] == self.delays[j] {
                    return Err(Error::DuplicateDelays);
                }
            }
        }
        if self.gains.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::NonPositiveGain(self.gains.clone()));
        }
        if !(self.t_on.is_finite() && self.t_on >= self.max_delay()) {
            return Err(Error::InvalidEstimator(format!(
                "t_on ({}) must be at least the largest delay ({})",
                self.t_on,
                self.max_delay()
            )));
        }
        Ok(())
    }
}

/// Extended and mixed regression at one grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDremSample {
    pub t: f64,
    pub y_e: DVector<f64>,
    pub phi_e: DMatrix<f64>,
    pub psi_phi: f64,
    /// `adj(Φ_e)·Y_e`
    pub y: DVector<f64>,
    pub warmup: bool,
}

#[derive(Debug, Clone)]
pub struct DremFrequencyEstimator {
    t_on: f64,
    bank: OperatorBank,
    state: ScalarEstimatorState,
}

impl DremFrequencyEstimator {
    pub fn new(cfg: &DremEstimatorConfig, theta_init: Vec<f64>, dt: f64) -> Result<Self> {
        let n = theta_init.len();
        cfg.validate(n)?;
        let ops: Vec<Operator> = cfg.delays.iter().map(|&d| Operator::Delay { d }).collect();
        Ok(Self {
            t_on: cfg.t_on,
            bank: OperatorBank::new(&ops, n, dt)?,
            state: ScalarEstimatorState::new(theta_init, cfg.gains.clone())?,
        })
    }

    pub fn t_on(&self) -> f64 {
        self.t_on
    }

    pub fn theta_hat(&self) -> &[f64] {
        &self.state.r_hat
    }

    pub fn delay_grids(&self) -> &[DelayGrid] {
        self.bank.delay_grids()
    }

    pub fn rounding_warnings(&self) -> Vec<String> {
        self.bank.rounding_warnings()
    }

    /// Records the sample in the delay history and builds `Y_e`, `Φ_e`,
    /// `ψ_φ = det Φ_e` and `Y = adj(Φ_e)·Y_e`. Must be called once per grid step.
    pub fn observe(&mut self, sample: &RegressorSample) -> Result<FrequencyDremSample> {
        let ext = self.bank.push(sample.y, &sample.phi)?;
        let mixed = mix(&ext);
        Ok(FrequencyDremSample {
            t: sample.t,
            y_e: ext.r_e,
            phi_e: ext.m_e,
            psi_phi: mixed.psi,
            y: mixed.r,
            warmup: ext.warmup,
        })
    }

    pub fn is_active(&self, sample: &FrequencyDremSample) -> bool {
        !sample.warmup && sample.t >= self.t_on
    }

    /// Advances each `θ̂ᵢ` over `[sample.t, sample.t + dt]`; gated off during
    /// warm-up and before `t_on`.
    pub fn step(&mut self, sample: &FrequencyDremSample, dt: f64) -> Result<bool> {
        if !self.is_active(sample) {
            return Ok(false);
        }
        let mixed = crate::regression::MixedRegression {
            psi: sample.psi_phi,
            r: sample.y.clone(),
        };
        self.state.step(&mixed, dt)?;
        Ok(true)
    }
}
