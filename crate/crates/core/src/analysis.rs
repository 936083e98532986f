//! Excitation and convergence diagnostics over recorded traces.

use std::fmt::{self, Write as _};
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::multisine::SinusoidComponent;
use crate::regression::excitation_integral;
use crate::sim::EstimatorTrace;

/// Slack per comparison, relative to `|θᵢ|`, when checking that `|θ̃ᵢ|`
/// never increases.
pub const MONOTONIC_RTOL: f64 = 1e-6;
/// Relative error that counts as settled.
pub const SETTLE_RTOL: f64 = 1e-2;
/// Monotonicity is only checked this long after activation.
pub const MONOTONIC_GRACE: f64 = 1.0;
/// Excited iff the fitted slope exceeds this fraction of the squared
/// reference scale.
pub const EXCITATION_FLOOR: f64 = 1e-9;

/// Steady-state amplitude of `ξ₁` for one input component when
/// `a(s) = (s+λ)^{2N}`: `A·λ^{2N}/(λ² + ω²)^N`.
pub fn svf_steady_amplitude(lambda: f64, n_freqs: usize, component: &SinusoidComponent) -> f64 {
    let n = n_freqs as i32;
    let l2 = lambda * lambda;
    let w2 = component.frequency * component.frequency;
    component.amplitude * (l2 / (l2 + w2)).powi(n)
}

/// Linear growth rate of `∫ det²(Φ_e)` for two tones and one delay:
/// `½B₁²B₂²(ω₁² − ω₂²)²(1 − cos(dω₁)cos(dω₂))`.
pub fn c_lin_closed_form(b1: f64, b2: f64, omega1: f64, omega2: f64, d1: f64) -> f64 {
    let dw2 = omega1 * omega1 - omega2 * omega2;
    0.5 * b1 * b1 * b2 * b2 * dw2 * dw2 * (1.0 - (d1 * omega1).cos() * (d1 * omega2).cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayBound {
    Satisfied,
    Violated,
}

/// `d₁ < π / max(ω₁, ω₂)`. Sufficient for `det Φ_e ∉ L₂`, not necessary:
/// a violated bound does not mean the run is degenerate.
pub fn check_delay_bound(d1: f64, omegas: [f64; 2]) -> DelayBound {
    if d1 < std::f64::consts::PI / omegas[0].max(omegas[1]) {
        DelayBound::Satisfied
    } else {
        DelayBound::Violated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Excited,
    Degenerate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Excited => "excited",
            Verdict::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationReport {
    /// Least-squares slope of `I(t)` over the window.
    pub c_lin_empirical: f64,
    /// Fit intercept; absorbs the constant term of `I(t)`.
    pub intercept: f64,
    /// Largest absolute fit residual; bounds the periodic term.
    pub max_residual: f64,
    pub c_lin_closed_form: Option<f64>,
    pub psi_rms: f64,
    pub verdict: Verdict,
}

/// Uniformly sampled `ψ` starting at `t0`.
#[derive(Debug, Clone, Copy)]
pub struct PsiWindow<'a> {
    pub t0: f64,
    pub dt: f64,
    pub psi: &'a [f64],
}

impl PsiWindow<'_> {
    pub fn span(&self) -> f64 {
        self.psi.len().saturating_sub(1) as f64 * self.dt
    }
}

/// Fits `I(t) = C_lin·t + C₀` over the window.
///
/// `reference_scale` is the size `ψ` would have under full excitation (for
/// example `rms(φ)^N`); the verdict is `Excited` iff
/// `C_lin > EXCITATION_FLOOR·reference_scale²`.
pub fn fit_excitation(
    window: PsiWindow<'_>,
    min_span: f64,
    reference_scale: f64,
) -> Result<ExcitationReport> {
    if window.psi.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if window.span() < min_span || window.psi.len() < 2 {
        return Err(Error::WindowTooShort {
            span: window.span(),
            required: min_span,
        });
    }
    let integral = excitation_integral(window.psi, window.dt)?;
    let n = integral.len() as f64;
    let t_mean = 0.5 * (n - 1.0) * window.dt;
    let i_mean = integral.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (k, v) in integral.iter().enumerate() {
        let dt = k as f64 * window.dt - t_mean;
        sxy += dt * (v - i_mean);
        sxx += dt * dt;
    }
    let slope = (sxy / sxx).max(0.0);
    let intercept_rel = i_mean - slope * t_mean;
    let max_residual = integral
        .iter()
        .enumerate()
        .map(|(k, v)| (v - intercept_rel - slope * k as f64 * window.dt).abs())
        .fold(0.0, f64::max);
    let psi_rms = (window.psi.iter().map(|p| p * p).sum::<f64>() / n).sqrt();
    let verdict = if slope > EXCITATION_FLOOR * reference_scale * reference_scale {
        Verdict::Excited
    } else {
        Verdict::Degenerate
    };
    Ok(ExcitationReport {
        c_lin_empirical: slope,
        // shift back to absolute time
        intercept: intercept_rel - slope * window.t0,
        max_residual,
        c_lin_closed_form: None,
        psi_rms,
        verdict,
    })
}

/// `rms(φ)^N` over the rows at or after `t_start`, taken over all entries.
pub fn regressor_scale(trace: &EstimatorTrace, t_start: f64) -> f64 {
    let start = trace.times.partition_point(|t| *t < t_start);
    let mut sum = 0.0;
    let mut count = 0usize;
    for col in &trace.phi {
        for p in &col[start..] {
            sum += p * p;
            count += 1;
        }
    }
    if count == 0 {
        return 0.0;
    }
    (sum / count as f64).sqrt().powi(trace.n() as i32)
}

/// Excitation report for a DREM trace over `t ≥ t_start`. For two tones
/// the closed-form rate is filled in from the steady-state filter gains.
pub fn trace_excitation(
    trace: &EstimatorTrace,
    t_start: f64,
    min_span: f64,
    lambda: f64,
    components: &[SinusoidComponent],
    delays: &[f64],
) -> Result<ExcitationReport> {
    let psi = trace
        .psi
        .as_ref()
        .ok_or_else(|| Error::Config("trace carries no psi column".into()))?;
    let start = trace.times.partition_point(|t| *t < t_start);
    if start >= trace.len() {
        return Err(Error::WindowTooShort {
            span: 0.0,
            required: min_span,
        });
    }
    let window = PsiWindow {
        t0: trace.times[start],
        dt: trace.row_spacing(),
        psi: &psi[start..],
    };
    let mut report = fit_excitation(window, min_span, regressor_scale(trace, t_start))?;
    if components.len() == 2 && delays.len() == 1 {
        let b: Vec<f64> = components
            .iter()
            .map(|c| svf_steady_amplitude(lambda, 2, c))
            .collect();
        report.c_lin_closed_form = Some(c_lin_closed_form(
            b[0],
            b[1],
            components[0].frequency,
            components[1].frequency,
            delays[0],
        ));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `|θ̃ᵢ(t_end)|`
    pub final_error: Vec<f64>,
    /// Earliest `t ≥ t_on` after which the relative error stays below 1%;
    /// `None` when the run ends unsettled.
    pub settle_time: Vec<Option<f64>>,
    pub monotonic: Vec<bool>,
    /// `max |θ̃ᵢ(t)| / |θ̃ᵢ(t_on)|` over `t ≥ t_on`.
    pub overshoot_ratio: Vec<f64>,
}

pub fn summarize_convergence(trace: &EstimatorTrace, theta_true: &[f64]) -> ConvergenceReport {
    let n = theta_true.len();
    let on = trace.times.partition_point(|t| *t < trace.t_on);
    let mono_start = trace
        .times
        .partition_point(|t| *t <= trace.t_on + MONOTONIC_GRACE);
    let mut report = ConvergenceReport {
        final_error: Vec::with_capacity(n),
        settle_time: Vec::with_capacity(n),
        monotonic: Vec::with_capacity(n),
        overshoot_ratio: Vec::with_capacity(n),
    };
    for i in 0..n {
        let theta = theta_true[i];
        let err: Vec<f64> = trace.theta_hat[i]
            .iter()
            .map(|v| (v - theta).abs())
            .collect();
        report
            .final_error
            .push(err.last().copied().unwrap_or(f64::NAN));

        let scale = theta.abs().max(f64::MIN_POSITIVE);
        let settle = match err[on..].iter().rposition(|e| e / scale >= SETTLE_RTOL) {
            None if on < err.len() => Some(trace.times[on]),
            None => None,
            Some(last_bad) => trace.times.get(on + last_bad + 1).copied(),
        };
        report.settle_time.push(settle);

        report.monotonic.push(is_non_increasing(
            &err[mono_start.min(err.len())..],
            MONOTONIC_RTOL * theta.abs(),
        ));

        let start = err.get(on).copied().unwrap_or(0.0);
        let peak = err[on.min(err.len())..].iter().copied().fold(0.0, f64::max);
        report.overshoot_ratio.push(if start > 0.0 {
            peak / start
        } else if peak == 0.0 {
            1.0
        } else {
            f64::INFINITY
        });
    }
    report
}

/// `e(t₂) ≤ e(t₁) + slack` for every pair `t₂ > t₁`.
pub fn is_non_increasing(errors: &[f64], slack: f64) -> bool {
    let mut running_min = f64::INFINITY;
    for &e in errors {
        if e > running_min + slack {
            return false;
        }
        running_min = running_min.min(e);
    }
    true
}

/// Flat `name=value` metrics file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    entries: Vec<(String, String)>,
}

impl MetricReport {
    pub fn push(&mut self, name: impl Into<String>, value: impl fmt::Display) {
        self.entries.push((name.into(), value.to_string()));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn add_convergence(&mut self, r: &ConvergenceReport) {
        for i in 0..r.final_error.len() {
            let k = i + 1;
            self.push(format!("final_error_{k}"), fmt_float(r.final_error[i]));
            match r.settle_time[i] {
                Some(t) => self.push(format!("settle_time_{k}"), fmt_float(t)),
                None => self.push(format!("settle_time_{k}"), "unsettled"),
            }
            self.push(format!("monotonic_{k}"), r.monotonic[i]);
            self.push(
                format!("overshoot_ratio_{k}"),
                fmt_float(r.overshoot_ratio[i]),
            );
        }
    }

    pub fn add_excitation(&mut self, r: &ExcitationReport) {
        self.push("c_lin_empirical", fmt_float(r.c_lin_empirical));
        if let Some(c) = r.c_lin_closed_form {
            self.push("c_lin_closed_form", fmt_float(c));
        }
        self.push("psi_rms", fmt_float(r.psi_rms));
        self.push("verdict", r.verdict);
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "{k}={v}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            writeln!(s, "{k}={v}").expect("writing to a String");
        }
        s
    }
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::EstimatorKind;
    use std::f64::consts::PI;

    #[test]
    fn steady_amplitude_examples() {
        let c = SinusoidComponent::new(1.2, 2.0, 0.0);
        let b = svf_steady_amplitude(5.0, 2, &c);
        assert!((b - 1.2 * 625.0 / 841.0).abs() < 1e-15);
        assert!((b - 0.89180).abs() < 1e-5);

        let dc = SinusoidComponent {
            amplitude: 3.0,
            frequency: 0.0,
            phase: 0.0,
        };
        assert_eq!(svf_steady_amplitude(5.0, 2, &dc), 3.0);
        assert!((svf_steady_amplitude(1e6, 3, &c) - 1.2).abs() < 1e-9);
    }

    #[test]
    fn steady_amplitude_matches_frequency_response() {
        use crate::svf::{SvfConfig, SvfMatrices};
        use num_complex::Complex64;
        let m = SvfMatrices::build(&SvfConfig::new(2, 5.0).unwrap()).unwrap();
        let c = SinusoidComponent::new(1.2, 2.0, 0.0);
        let g = m.a_coeffs()[0] / m.char_poly_at(Complex64::new(0.0, 2.0));
        assert!((svf_steady_amplitude(5.0, 2, &c) - 1.2 * g.norm()).abs() < 1e-12);
    }

    #[test]
    fn c_lin_examples() {
        assert_eq!(c_lin_closed_form(1.0, 1.0, 2.0, 3.0, 0.0), 0.0);
        let v = c_lin_closed_form(1.0, 1.0, 2.0, 3.0, 0.3);
        let expected = 12.5 * (1.0 - 0.6f64.cos() * 0.9f64.cos());
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 6.0870).abs() < 1e-3, "{v}");
        assert_eq!(c_lin_closed_form(1.0, 2.0, 2.0, 2.0, 0.3), 0.0);
    }

    #[test]
    fn c_lin_symmetric_and_positive_under_bound() {
        let grid: Vec<f64> = (1..=20).map(|k| 0.5 * k as f64).collect();
        for &w1 in &grid {
            for &w2 in &grid {
                let a = c_lin_closed_form(0.7, 1.3, w1, w2, 0.1);
                let b = c_lin_closed_form(1.3, 0.7, w2, w1, 0.1);
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
                if w1 == w2 {
                    continue;
                }
                let bound = PI / w1.max(w2);
                for frac in [0.01, 0.3, 0.7, 0.999] {
                    let d = frac * bound;
                    assert_eq!(check_delay_bound(d, [w1, w2]), DelayBound::Satisfied);
                    assert!(
                        c_lin_closed_form(1.0, 1.0, w1, w2, d) > 0.0,
                        "{w1} {w2} {d}"
                    );
                }
            }
        }
    }

    #[test]
    fn delay_bound_examples() {
        assert_eq!(check_delay_bound(0.3, [2.0, 3.0]), DelayBound::Satisfied);
        assert_eq!(
            check_delay_bound(PI / 3.0, [2.0, 3.0]),
            DelayBound::Violated
        );
        assert_eq!(
            check_delay_bound(2.0 * PI, [2.0, 3.0]),
            DelayBound::Violated
        );
        // common period: rate vanishes
        assert!(c_lin_closed_form(1.0, 1.0, 2.0, 3.0, 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn fit_on_synthetic_psi() {
        let dt = 1e-3;
        let zeros = vec![0.0; 20_001];
        let r = fit_excitation(
            PsiWindow {
                t0: 0.0,
                dt,
                psi: &zeros,
            },
            10.0,
            1.0,
        )
        .unwrap();
        assert_eq!(r.c_lin_empirical, 0.0);
        assert_eq!(r.verdict, Verdict::Degenerate);

        let s: Vec<f64> = (0..=100_000).map(|k| (k as f64 * dt).sin()).collect();
        let r = fit_excitation(
            PsiWindow {
                t0: 0.0,
                dt,
                psi: &s,
            },
            10.0,
            1.0,
        )
        .unwrap();
        assert!(
            (r.c_lin_empirical - 0.5).abs() < 1e-3,
            "{}",
            r.c_lin_empirical
        );
        assert_eq!(r.verdict, Verdict::Excited);
        assert!((r.psi_rms - 0.5f64.sqrt()).abs() < 5e-3);

        assert!(matches!(
            fit_excitation(
                PsiWindow {
                    t0: 0.0,
                    dt,
                    psi: &s[..100]
                },
                10.0,
                1.0
            ),
            Err(Error::WindowTooShort { .. })
        ));
        assert!(matches!(
            fit_excitation(
                PsiWindow {
                    t0: 0.0,
                    dt,
                    psi: &[]
                },
                10.0,
                1.0
            ),
            Err(Error::EmptyTrace)
        ));
    }

    fn synthetic_trace(theta: f64, t_on: f64, err: impl Fn(f64) -> f64) -> EstimatorTrace {
        let dt = 1e-3;
        let times: Vec<f64> = (0..=10_000).map(|k| k as f64 * dt).collect();
        let hat: Vec<f64> = times.iter().map(|&t| theta + err(t)).collect();
        EstimatorTrace {
            kind: EstimatorKind::Drem,
            theta_true: vec![theta],
            theta_init: vec![hat[0]],
            t_on,
            dt,
            u: vec![0.0; times.len()],
            y: vec![0.0; times.len()],
            phi: vec![vec![0.0; times.len()]],
            psi: None,
            theta_tilde: vec![hat.iter().map(|h| h - theta).collect()],
            theta_hat: vec![hat],
            warmup: times.iter().map(|t| *t < t_on).collect(),
            times,
        }
    }

    #[test]
    fn convergence_of_exact_estimate() {
        let tr = synthetic_trace(2.0, 1.5, |_| 0.0);
        let r = summarize_convergence(&tr, &[2.0]);
        assert_eq!(r.final_error, vec![0.0]);
        assert_eq!(r.settle_time, vec![Some(1.5)]);
        assert_eq!(r.monotonic, vec![true]);
        assert_eq!(r.overshoot_ratio, vec![1.0]);
    }

    #[test]
    fn convergence_of_exponential() {
        let tr = synthetic_trace(1.0, 0.0, |t| -(-t).exp());
        let r = summarize_convergence(&tr, &[1.0]);
        let settle = r.settle_time[0].unwrap();
        assert!((settle - 100f64.ln()).abs() < 2e-3, "{settle}");
        assert!(r.monotonic[0]);
        assert!((r.overshoot_ratio[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn damped_oscillation_is_not_monotonic() {
        let tr = synthetic_trace(1.0, 0.0, |t| (-t).exp() * (10.0 * t).cos());
        let r = summarize_convergence(&tr, &[1.0]);
        assert!(!r.monotonic[0]);
    }

    #[test]
    fn unsettled_run() {
        let tr = synthetic_trace(1.0, 0.0, |_| -0.5);
        let r = summarize_convergence(&tr, &[1.0]);
        assert_eq!(r.settle_time, vec![None]);
    }

    #[test]
    fn report_format() {
        let mut rep = MetricReport::default();
        rep.push("verdict", Verdict::Degenerate);
        rep.push("c_lin_empirical", fmt_float(0.5));
        assert_eq!(
            rep.to_text(),
            "verdict=degenerate\nc_lin_empirical=5.0000000000000000e-1\n"
        );
        assert_eq!(rep.get("verdict"), Some("degenerate"));
    }
}
