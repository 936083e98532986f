//! Generic linear-regression estimation for `ρ(t) = m(t)ᵀr`.
//!
//! Contains the vector gradient estimator and the dynamic regressor
//! extension and mixing (DREM) machinery: a bank of `q − 1` stable operators
//! builds a square extended system `R_e = M_e r`, and premultiplying by
//! `adj(M_e)` gives `q` decoupled scalar regressions `Rᵢ = ψ rᵢ` with
//! `ψ = det(M_e)`. Each scalar channel then runs its own gradient law,
//! whose error obeys `r̃ᵢ' = −kᵢψ²r̃ᵢ` and therefore never grows.

mod delay;
pub mod linalg;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::rk4::Rk4;

pub use delay::DelayLine;
pub use linalg::{adjugate, determinant};

/// Grid rounding of a delay larger than this is reported.
pub const DELAY_ROUNDING_REPORT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Operator {
    /// `x(t − d)`
    Delay { d: f64 },
    /// `α/(p + β)` applied to the regression
    FirstOrderFilter { alpha: f64, beta: f64 },
}

impl Operator {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Operator::Delay { d } if !(d > 0.0 && d.is_finite()) => Err(Error::InvalidOperator(
                format!("delay must be positive, got {d}"),
            )),
            Operator::FirstOrderFilter { alpha, beta }
                if alpha == 0.0 || !alpha.is_finite() || !(beta > 0.0 && beta.is_finite()) =>
            {
                Err(Error::InvalidOperator(format!(
                    "filter needs alpha != 0 and beta > 0, got alpha = {alpha}, beta = {beta}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Square extended regression `R_e = M_e r`. Row 0 is the instantaneous
/// regression, row `i` the output of operator `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedRegressor {
    pub r_e: DVector<f64>,
    pub m_e: DMatrix<f64>,
    /// Some delayed row had no history yet and reads zero.
    pub warmup: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedRegression {
    pub psi: f64,
    pub r: DVector<f64>,
}

/// `ψ = det(M_e)`, `R = adj(M_e)·R_e`.
pub fn mix(ext: &ExtendedRegressor) -> MixedRegression {
    let adj = adjugate(&ext.m_e);
    MixedRegression {
        psi: determinant(&ext.m_e),
        r: adj * &ext.r_e,
    }
}

#[derive(Debug, Clone)]
enum OperatorState {
    Delay { steps: usize },
    Filter { alpha: f64, beta: f64, x: Vec<f64> },
}

/// Realized delay after snapping to the simulation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayGrid {
    pub requested: f64,
    pub steps: usize,
    pub realized: f64,
}

impl DelayGrid {
    pub fn rounding(&self) -> f64 {
        (self.realized - self.requested).abs()
    }
}

/// Snaps a delay to the nearest multiple of `dt`.
pub fn snap_delay(d: f64, dt: f64) -> Result<DelayGrid> {
    let steps = (d / dt).round();
    if steps < 1.0 {
        return Err(Error::InvalidOperator(format!(
            "delay {d} is shorter than half a time step ({dt})"
        )));
    }
    let steps = steps as usize;
    Ok(DelayGrid {
        requested: d,
        steps,
        realized: steps as f64 * dt,
    })
}

/// The `q − 1` operators applied to a stream of `(ρ, m)` samples on a
/// uniform grid with step `dt`.
#[derive(Debug, Clone)]
pub struct OperatorBank {
    q: usize,
    dt: f64,
    ops: Vec<OperatorState>,
    history: DelayLine,
    grids: Vec<DelayGrid>,
    rk: Rk4,
}

impl OperatorBank {
    pub fn new(operators: &[Operator], q: usize, dt: f64) -> Result<Self> {
        if operators.len() + 1 != q {
            return Err(Error::Dimension {
                what: "operator bank",
                expected: q.saturating_sub(1),
                got: operators.len(),
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidSim(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let mut ops = Vec::with_capacity(operators.len());
        let mut grids = Vec::new();
        for op in operators {
            op.validate()?;
            ops.push(match *op {
                Operator::Delay { d } => {
                    let grid = snap_delay(d, dt)?;
                    if grids.iter().any(|g: &DelayGrid| g.steps == grid.steps) {
                        return Err(Error::DuplicateDelays);
                    }
                    grids.push(grid);
                    OperatorState::Delay { steps: grid.steps }
                }
                Operator::FirstOrderFilter { alpha, beta } => OperatorState::Filter {
                    alpha,
                    beta,
                    x: vec![0.0; q + 1],
                },
            });
        }
        let max_lag = grids.iter().map(|g| g.steps).max().unwrap_or(0);
        Ok(Self {
            q,
            dt,
            ops,
            history: DelayLine::new(max_lag + 1, q + 1),
            grids,
            rk: Rk4::new(q + 1),
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn delay_grids(&self) -> &[DelayGrid] {
        &self.grids
    }

    /// Delays whose grid rounding exceeds [`DELAY_ROUNDING_REPORT`].
    pub fn rounding_warnings(&self) -> Vec<String> {
        self.grids
            .iter()
            .filter(|g| g.rounding() > DELAY_ROUNDING_REPORT)
            .map(|g| {
                format!(
                    "delay {} rounded to {} ({} steps of {})",
                    g.requested, g.realized, g.steps, self.dt
                )
            })
            .collect()
    }

    /// Feeds the sample at the current grid time and returns the extended
    /// regressor for that time. Filter states then advance one step with the
    /// sample held constant.
    pub fn push(&mut self, rho: f64, m: &[f64]) -> Result<ExtendedRegressor> {
        if m.len() != self.q {
            return Err(Error::Dimension {
                what: "regressor",
                expected: self.q,
                got: m.len(),
            });
        }
        let q = self.q;
        self.history.push_with(|row| {
            row[0] = rho;
            row[1..].copy_from_slice(m);
        });

        let mut r_e = DVector::zeros(q);
        let mut m_e = DMatrix::zeros(q, q);
        r_e[0] = rho;
        for j in 0..q {
            m_e[(0, j)] = m[j];
        }
        let mut warmup = false;
        for (i, op) in self.ops.iter().enumerate() {
            let row = i + 1;
            let values: Option<&[f64]> = match op {
                OperatorState::Delay { steps } => self.history.lagged(*steps),
                OperatorState::Filter { x, .. } => Some(x),
            };
            match values {
                Some(v) => {
                    r_e[row] = v[0];
                    for j in 0..q {
                        m_e[(row, j)] = v[j + 1];
                    }
                }
                None => warmup = true,
            }
        }

        let dt = self.dt;
        for op in &mut self.ops {
            if let OperatorState::Filter { alpha, beta, x } = op {
                let (alpha, beta) = (*alpha, *beta);
                self.rk.step(0.0, dt, x, |_, s, ds| {
                    ds[0] = alpha * rho - beta * s[0];
                    for j in 0..q {
                        ds[j + 1] = alpha * m[j] - beta * s[j + 1];
                    }
                })?;
            }
        }

        Ok(ExtendedRegressor { r_e, m_e, warmup })
    }
}

/// Decoupled per-parameter estimators `r̂ᵢ' = kᵢψ(Rᵢ − ψr̂ᵢ)`.
#[derive(Debug, Clone)]
pub struct ScalarEstimatorState {
    pub r_hat: Vec<f64>,
    gains: Vec<f64>,
}

/// `(1 − e^{−x})/x`, accurate near zero.
#[inline]
fn one_minus_exp_over(x: f64) -> f64 {
    if x > 1e-8 {
        -(-x).exp_m1() / x
    } else {
        1.0 - 0.5 * x
    }
}

impl ScalarEstimatorState {
    pub fn new(r_hat: Vec<f64>, gains: Vec<f64>) -> Result<Self> {
        if r_hat.len() != gains.len() {
            return Err(Error::Dimension {
                what: "scalar estimator gains",
                expected: r_hat.len(),
                got: gains.len(),
            });
        }
        if gains.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
            return Err(Error::NonPositiveGain(gains));
        }
        Ok(Self { r_hat, gains })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// Integrates over `dt` with `ψ` and `R` held constant. With the inputs
    /// held, each channel is a linear ODE solved exactly:
    /// `r̂ᵢ ← r̂ᵢ + kᵢψ·dt·(Rᵢ − ψr̂ᵢ)·(1 − e^{−x})/x` with `x = kᵢψ²dt`.
    /// The error contracts by `e^{−x}` per step for any step size. Each
    /// component reads only its own state, gain, and `Rᵢ`.
    pub fn step(&mut self, mixed: &MixedRegression, dt: f64) -> Result<()> {
        if mixed.r.len() != self.r_hat.len() {
            return Err(Error::Dimension {
                what: "mixed regression",
                expected: self.r_hat.len(),
                got: mixed.r.len(),
            });
        }
        let psi = mixed.psi;
        if psi == 0.0 {
            return Ok(());
        }
        for i in 0..self.r_hat.len() {
            let k = self.gains[i];
            let x = k * psi * psi * dt;
            let next = self.r_hat[i]
                + k * psi * dt * (mixed.r[i] - psi * self.r_hat[i]) * one_minus_exp_over(x);
            if !next.is_finite() {
                return Err(Error::NonFinite { t: f64::NAN });
            }
            self.r_hat[i] = next;
        }
        Ok(())
    }
}

/// Coupled gradient estimator `r̂' = K m (ρ − mᵀr̂)`.
#[derive(Debug, Clone)]
pub struct VectorGradientState {
    pub r_hat: Vec<f64>,
    gain: DMatrix<f64>,
    km: Vec<f64>,
}

/// Symmetric (to 1e-12 relative) with a successful Cholesky factorization.
pub fn is_symmetric_positive_definite(m: &DMatrix<f64>) -> bool {
    if !m.is_square() || m.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let scale = m.abs().max().max(f64::MIN_POSITIVE);
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return false;
            }
        }
    }
    m.clone().cholesky().is_some()
}

impl VectorGradientState {
    pub fn new(r_hat: Vec<f64>, gain: DMatrix<f64>) -> Result<Self> {
        if gain.nrows() != r_hat.len() || gain.ncols() != r_hat.len() {
            return Err(Error::Dimension {
                what: "gradient gain",
                expected: r_hat.len(),
                got: gain.nrows(),
            });
        }
        if !is_symmetric_positive_definite(&gain) {
            return Err(Error::NotPositiveDefinite);
        }
        let q = r_hat.len();
        Ok(Self {
            r_hat,
            gain,
            km: vec![0.0; q],
        })
    }

    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// Integrates over `dt` with `(ρ, m)` held constant. The prediction
    /// error `e = ρ − mᵀr̂` then obeys `e' = −(mᵀKm)e`, so the step is exact:
    /// `r̂ ← r̂ + Km·e₀·(1 − e^{−c·dt})/c` with `c = mᵀKm`.
    pub fn step(&mut self, rho: f64, m: &[f64], dt: f64) -> Result<()> {
        let q = self.r_hat.len();
        if m.len() != q {
            return Err(Error::Dimension {
                what: "regressor",
                expected: q,
                got: m.len(),
            });
        }
        if m.iter().all(|v| *v == 0.0) {
            return Ok(());
        }
        for i in 0..q {
            self.km[i] = (0..q).map(|j| self.gain[(i, j)] * m[j]).sum();
        }
        let c: f64 = m.iter().zip(&self.km).map(|(a, b)| a * b).sum();
        let e0 = rho - m.iter().zip(&self.r_hat).map(|(a, b)| a * b).sum::<f64>();
        let scale = e0 * dt * one_minus_exp_over(c * dt);
        for i in 0..q {
            self.r_hat[i] += self.km[i] * scale;
        }
        if self.r_hat.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: f64::NAN });
        }
        Ok(())
    }
}

/// Cumulative trapezoidal `I(t) = ∫₀ᵗ ψ²` over a uniformly sampled trace.
pub fn excitation_integral(psi: &[f64], dt: f64) -> Result<Vec<f64>> {
    if psi.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut out = Vec::with_capacity(psi.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in psi.windows(2) {
        acc += 0.5 * dt * (w[0] * w[0] + w[1] * w[1]);
        out.push(acc);
    }
    Ok(out)
}
