//! State-variable filter in companion form.
//!
//! `ξ̇ = Aξ + Bu` with `A` the companion matrix of a Hurwitz polynomial
//! `a(s) = s^{2N} + a_{2N-1}s^{2N-1} + … + a₀` and `B = (0, …, 0, a₀)ᵀ`.
//! Each state is a filtered derivative of the input, `ξₖ = s^{k-1}·a₀/a(s)·u`,
//! which yields the regression `y = φᵀθ + ε` with
//! `y = Σ a_{i-1}ξᵢ − a₀u` and `φ = (ξ_{2N-1}, ξ_{2N-3}, …, ξ₁)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multisine::{MultisineSignal, SinusoidComponent};
use crate::poly;
use crate::sim::rk4::Rk4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvfConfig {
    pub n_freqs: usize,
    pub lambda: f64,
}

impl SvfConfig {
    pub fn new(n_freqs: usize, lambda: f64) -> Result<Self> {
        let cfg = Self { n_freqs, lambda };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_freqs == 0 {
            return Err(Error::InvalidCoefficients(
                "filter needs at least one frequency".into(),
            ));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::NonHurwitz(self.lambda));
        }
        Ok(())
    }
}

/// Companion realization of `a(s)`; stores only `a₀ … a_{2N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvfMatrices {
    a_coeffs: Vec<f64>,
}

/// One `(y, φ)` pair at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorSample {
    pub t: f64,
    pub y: f64,
    pub phi: Vec<f64>,
}

impl SvfMatrices {
    /// Companion form for `a(s) = (s + λ)^{2N}`.
    pub fn build(config: &SvfConfig) -> Result<Self> {
        config.validate()?;
        let order = 2 * config.n_freqs;
        // highest degree first, monic term dropped
        let desc = poly::expand_shifted_product(&vec![config.lambda; order]);
        Ok(Self {
            a_coeffs: desc.into_iter().rev().collect(),
        })
    }

    /// Uses explicit coefficients `a₀ … a_{2N-1}` of a Hurwitz polynomial.
    pub fn from_coeffs(a_coeffs: Vec<f64>) -> Result<Self> {
        if a_coeffs.is_empty() || !a_coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidCoefficients(format!(
                "need an even, nonzero number of coefficients, got {}",
                a_coeffs.len()
            )));
        }
        if a_coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidCoefficients("non-finite coefficient".into()));
        }
        let desc: Vec<f64> = a_coeffs.iter().rev().copied().collect();
        let roots = poly::monic_roots(&desc);
        if let Some(bad) = roots.iter().find(|z| z.re >= 0.0) {
            return Err(Error::InvalidCoefficients(format!(
                "polynomial is not Hurwitz (root {bad})"
            )));
        }
        Ok(Self { a_coeffs })
    }

    /// `a₀ … a_{2N-1}`, ascending powers of `s`.
    pub fn a_coeffs(&self) -> &[f64] {
        &self.a_coeffs
    }

    pub fn order(&self) -> usize {
        self.a_coeffs.len()
    }

    pub fn n_freqs(&self) -> usize {
        self.a_coeffs.len() / 2
    }

    pub fn a_matrix(&self) -> DMatrix<f64> {
        let n = self.order();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = -self.a_coeffs[j];
        }
        a
    }

    pub fn b_vector(&self) -> DVector<f64> {
        let mut b = DVector::zeros(self.order());
        b[self.order() - 1] = self.a_coeffs[0];
        b
    }

    fn check_dim(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.order() {
            return Err(Error::Dimension {
                what: "filter state",
                expected: self.order(),
                got: xi.len(),
            });
        }
        Ok(())
    }

    /// `Aξ + Bu`
    pub fn derivative(&self, xi: &[f64], u: f64) -> Result<Vec<f64>> {
        self.check_dim(xi)?;
        let mut out = vec![0.0; xi.len()];
        self.derivative_into(xi, u, &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn derivative_into(&self, xi: &[f64], u: f64, out: &mut [f64]) {
        let n = xi.len();
        out[..n - 1].copy_from_slice(&xi[1..]);
        let mut last = self.a_coeffs[0] * u;
        for (a, x) in self.a_coeffs.iter().zip(xi) {
            last -= a * x;
        }
        out[n - 1] = last;
    }

    /// `y = Σ a_{i-1}ξᵢ − a₀u`, which equals `−ξ̇_{2N}` without differentiating.
    #[inline]
    pub(crate) fn y_of(&self, xi: &[f64], u: f64) -> f64 {
        let mut y = -self.a_coeffs[0] * u;
        for (a, x) in self.a_coeffs.iter().zip(xi) {
            y += a * x;
        }
        y
    }

    /// `φ = (ξ_{2N-1}, ξ_{2N-3}, …, ξ₁)` (one-based state indices).
    #[inline]
    pub(crate) fn phi_into(&self, xi: &[f64], phi: &mut [f64]) {
        let n = self.n_freqs();
        for (k, p) in phi.iter_mut().enumerate().take(n) {
            *p = xi[2 * (n - 1 - k)];
        }
    }

    pub fn output(&self, xi: &[f64], u: f64, t: f64) -> Result<RegressorSample> {
        self.check_dim(xi)?;
        let mut phi = vec![0.0; self.n_freqs()];
        self.phi_into(xi, &mut phi);
        Ok(RegressorSample {
            t,
            y: self.y_of(xi, u),
            phi,
        })
    }

    /// `a(s)` at complex `s`, including the monic term.
    pub fn char_poly_at(&self, s: Complex64) -> Complex64 {
        let mut p = Complex64::new(1.0, 0.0);
        for &a in self.a_coeffs.iter().rev() {
            p = p * s + a;
        }
        p
    }

    /// Forced periodic response `ξ_ss(t)` to the given signal, i.e. the
    /// filter state once the initial-condition transient has died out.
    pub fn steady_state(&self, signal: &MultisineSignal, t: f64) -> Vec<f64> {
        let mut xi = vec![0.0; self.order()];
        for c in signal.components() {
            self.add_component_response(c, t, &mut xi);
        }
        xi
    }

    fn add_component_response(&self, c: &SinusoidComponent, t: f64, xi: &mut [f64]) {
        let jw = Complex64::new(0.0, c.frequency);
        let base = self.a_coeffs[0] / self.char_poly_at(jw);
        let mut g = base;
        for x in xi.iter_mut() {
            *x += c.amplitude * g.norm() * (c.frequency * t + c.phase + g.arg()).sin();
            g *= jw;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvfState {
    pub xi: Vec<f64>,
    pub t: f64,
}

/// Filter matrices together with their evolving state.
#[derive(Debug, Clone)]
pub struct Svf {
    matrices: SvfMatrices,
    state: SvfState,
    rk: Rk4,
}

impl Svf {
    /// Zero initial state at `t = 0`.
    pub fn new(matrices: SvfMatrices) -> Self {
        let order = matrices.order();
        Self::with_state(
            matrices,
            SvfState {
                xi: vec![0.0; order],
                t: 0.0,
            },
        )
        .expect("zero state has the right dimension")
    }

    pub fn with_state(matrices: SvfMatrices, state: SvfState) -> Result<Self> {
        matrices.check_dim(&state.xi)?;
        let rk = Rk4::new(matrices.order());
        Ok(Self {
            matrices,
            state,
            rk,
        })
    }

    pub fn matrices(&self) -> &SvfMatrices {
        &self.matrices
    }

    pub fn state(&self) -> &SvfState {
        &self.state
    }

    pub fn output(&self, u: f64) -> RegressorSample {
        self.matrices
            .output(&self.state.xi, u, self.state.t)
            .expect("state dimension is fixed")
    }

    /// Advances from `t` to `t + dt`, evaluating the input at every RK4 stage.
    pub fn step<U>(&mut self, t: f64, dt: f64, u: U) -> Result<()>
    where
        U: Fn(f64) -> f64,
    {
        let m = &self.matrices;
        self.rk.step(t, dt, &mut self.state.xi, |ts, x, dx| {
            m.derivative_into(x, u(ts), dx)
        })?;
        self.state.t = t + dt;
        Ok(())
    }
}
