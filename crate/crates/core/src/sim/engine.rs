use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freq_algebra::theta_from_frequencies;
use crate::freq_estimator::{
    DremEstimatorConfig, DremFrequencyEstimator, GradientEstimatorConfig,
    GradientFrequencyEstimator,
};
use crate::multisine::MultisineSignal;
use crate::sim::trace::{EstimatorKind, EstimatorTrace};
use crate::svf::{Svf, SvfMatrices};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 100.0,
            record_stride: 10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidSim(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidSim(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidSim("record_stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Warns when `dt > min(0.1/λ, 0.1/ω_max)`.
    pub fn step_warning(&self, lambda: f64, max_omega: f64) -> Option<String> {
        let limit = (0.1 / lambda).min(0.1 / max_omega);
        (self.dt > limit).then(|| {
            format!(
                "dt = {} exceeds the recommended {limit:.3e} for lambda = {lambda}, max frequency = {max_omega}",
                self.dt
            )
        })
    }
}

/// Everything needed for one simulation run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub signal: MultisineSignal,
    pub svf: SvfMatrices,
    pub gradient: Option<GradientEstimatorConfig>,
    pub drem: Option<DremEstimatorConfig>,
    pub sim: SimConfig,
    /// Defaults to zeros.
    pub theta_init: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub traces: Vec<EstimatorTrace>,
    pub warnings: Vec<String>,
}

impl RunOutput {
    pub fn trace(&self, kind: EstimatorKind) -> Option<&EstimatorTrace> {
        self.traces.iter().find(|t| t.kind == kind)
    }
}

struct Recorder<'a> {
    trace: EstimatorTrace,
    theta: &'a [f64],
}

impl Recorder<'_> {
    fn record(
        &mut self,
        t: f64,
        u: f64,
        y: f64,
        phi: &[f64],
        psi: Option<f64>,
        theta_hat: &[f64],
        gated: bool,
    ) {
        let tr = &mut self.trace;
        tr.times.push(t);
        tr.u.push(u);
        tr.y.push(y);
        for (col, p) in tr.phi.iter_mut().zip(phi) {
            col.push(*p);
        }
        if let (Some(col), Some(p)) = (tr.psi.as_mut(), psi) {
            col.push(p);
        }
        for i in 0..theta_hat.len() {
            tr.theta_hat[i].push(theta_hat[i]);
            tr.theta_tilde[i].push(theta_hat[i] - self.theta[i]);
        }
        tr.warmup.push(gated);
    }
}

/// Runs the filter and the configured estimators side by side on one
/// sample stream. Per grid step: evaluate `u`, form `(y, φ)`, update the
/// delay history, record, then advance the estimators (input held over the
/// step) and the filter (input evaluated at each RK4 stage).
pub fn run_experiment(exp: &Experiment) -> Result<RunOutput> {
    let n = exp.signal.len();
    if exp.svf.n_freqs() != n {
        return Err(Error::Dimension {
            what: "filter order (frequencies)",
            expected: n,
            got: exp.svf.n_freqs(),
        });
    }
    if exp.gradient.is_none() && exp.drem.is_none() {
        return Err(Error::InvalidEstimator("no estimator configured".into()));
    }
    exp.sim.validate()?;
    let theta = theta_from_frequencies(&exp.signal.frequencies())?;
    let theta_init = exp.theta_init.clone().unwrap_or_else(|| vec![0.0; n]);
    if theta_init.len() != n {
        return Err(Error::Dimension {
            what: "initial estimate",
            expected: n,
            got: theta_init.len(),
        });
    }

    let dt = exp.sim.dt;
    let mut warnings = Vec::new();
    let a = exp.svf.a_coeffs();
    // mean pole magnitude; equals λ for (s+λ)^{2N}
    let lambda = a[a.len() - 1] / a.len() as f64;
    warnings.extend(exp.sim.step_warning(lambda, exp.signal.max_frequency()));

    let mut gradient = exp
        .gradient
        .as_ref()
        .map(|cfg| GradientFrequencyEstimator::new(cfg, theta_init.clone()))
        .transpose()?;
    let mut drem = exp
        .drem
        .as_ref()
        .map(|cfg| DremFrequencyEstimator::new(cfg, theta_init.clone(), dt))
        .transpose()?;
    if let Some(d) = &drem {
        warnings.extend(d.rounding_warnings());
    }

    let n_steps = exp.sim.n_steps();
    let stride = exp.sim.record_stride;
    let rows = n_steps / stride + 1;
    let mut grad_rec = gradient.as_ref().map(|g| Recorder {
        trace: EstimatorTrace::new(
            EstimatorKind::Gradient,
            theta.clone(),
            theta_init.clone(),
            g.t_on(),
            dt,
            false,
            rows,
        ),
        theta: &theta,
    });
    let mut drem_rec = drem.as_ref().map(|d| Recorder {
        trace: EstimatorTrace::new(
            EstimatorKind::Drem,
            theta.clone(),
            theta_init.clone(),
            d.t_on(),
            dt,
            true,
            rows,
        ),
        theta: &theta,
    });

    let signal = &exp.signal;
    let mut svf = Svf::new(exp.svf.clone());
    for k in 0..=n_steps {
        let t = k as f64 * dt;
        let u = signal.evaluate(t);
        let mut sample = svf.output(u);
        sample.t = t;
        let drem_sample = drem.as_mut().map(|d| d.observe(&sample)).transpose()?;
        let record = k % stride == 0;

        if let (Some(g), Some(rec)) = (gradient.as_ref(), grad_rec.as_mut()) {
            if record {
                rec.record(
                    t,
                    u,
                    sample.y,
                    &sample.phi,
                    None,
                    g.theta_hat(),
                    !g.is_active(t),
                );
            }
        }
        if let (Some(d), Some(rec), Some(ds)) =
            (drem.as_ref(), drem_rec.as_mut(), drem_sample.as_ref())
        {
            if record {
                rec.record(
                    t,
                    u,
                    sample.y,
                    &sample.phi,
                    Some(ds.psi_phi),
                    d.theta_hat(),
                    !d.is_active(ds),
                );
            }
        }

        if k == n_steps {
            break;
        }
        let at_t = |e: Error| match e {
            Error::NonFinite { .. } => Error::NonFinite { t },
            other => other,
        };
        if let Some(g) = gradient.as_mut() {
            g.step(&sample, dt).map_err(at_t)?;
        }
        if let (Some(d), Some(ds)) = (drem.as_mut(), drem_sample.as_ref()) {
            d.step(ds, dt).map_err(at_t)?;
        }
        svf.step(t, dt, |ts| signal.evaluate(ts))?;
    }

    let mut traces = Vec::new();
    traces.extend(grad_rec.map(|r| r.trace));
    traces.extend(drem_rec.map(|r| r.trace));
    Ok(RunOutput { traces, warnings })
}
