//! Runs configurations and writes `<label>_<kind>.csv` traces and
//! `<label>_<kind>.report` metric files.

use std::f64::consts::TAU;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::analysis::{
    check_delay_bound, summarize_convergence, trace_excitation, DelayBound, MetricReport,
};
use crate::config::{EstimatorSelection, ExperimentConfig};
use crate::error::{Error, Result};
use crate::sim::{run_experiment, EstimatorKind, Experiment, RunOutput};
use crate::sweep::map_jobs;

/// Excitation fits need this many periods of the slowest tone.
pub const EXCITATION_PERIODS: f64 = 10.0;

/// Command-line style overrides applied on top of a config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub estimator: Option<EstimatorSelection>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(dt) = self.dt {
            cfg.sim.dt = dt;
        }
        if let Some(t) = self.t_end {
            cfg.sim.t_end = t;
        }
        if let Some(k) = self.estimator {
            cfg.estimator.kind = k;
        }
        if let Some(d) = &self.out_dir {
            cfg.output.directory = d.clone();
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub label: String,
    pub output: RunOutput,
    pub reports: Vec<(EstimatorKind, MetricReport)>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// Non-fatal findings about a validated experiment.
pub fn config_warnings(exp: &Experiment) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(d) = &exp.drem {
        let w = exp.signal.frequencies();
        if w.len() == 2 && check_delay_bound(d.delays[0], [w[0], w[1]]) == DelayBound::Violated {
            out.push(format!(
                "delay {} is not below pi / max frequency = {:.6}; the bound is sufficient, not necessary, so the run proceeds",
                d.delays[0],
                std::f64::consts::PI / w[0].max(w[1])
            ));
        }
    }
    out
}

pub fn build_reports(
    cfg: &ExperimentConfig,
    exp: &Experiment,
    out: &RunOutput,
) -> Vec<(EstimatorKind, MetricReport)> {
    out.traces
        .iter()
        .map(|tr| {
            let mut rep = MetricReport::default();
            rep.push("label", &cfg.label);
            rep.push("estimator", tr.kind);
            rep.push("n_freqs", tr.n());
            rep.push("dt", exp.sim.dt);
            rep.push("t_end", exp.sim.t_end);
            rep.push("t_on", tr.t_on);
            let final_hat = tr.final_theta_hat();
            for i in 0..tr.n() {
                rep.push(format!("theta_true_{}", i + 1), tr.theta_true[i]);
                rep.push(
                    format!("theta_hat_final_{}", i + 1),
                    format!("{:.16e}", final_hat[i]),
                );
                let rel = (final_hat[i] - tr.theta_true[i]).abs() / tr.theta_true[i].abs();
                rep.push(format!("relative_error_{}", i + 1), format!("{rel:.16e}"));
            }
            rep.add_convergence(&summarize_convergence(tr, &tr.theta_true));

            if let (EstimatorKind::Drem, Some(d)) = (tr.kind, &exp.drem) {
                let w = exp.signal.frequencies();
                if w.len() == 2 {
                    let b = check_delay_bound(d.delays[0], [w[0], w[1]]);
                    rep.push(
                        "delay_bound",
                        if b == DelayBound::Satisfied {
                            "satisfied"
                        } else {
                            "violated"
                        },
                    );
                }
                let min_span = EXCITATION_PERIODS * TAU / exp.signal.min_frequency();
                let lambda = cfg.lambda().unwrap_or(f64::NAN);
                match trace_excitation(
                    tr,
                    tr.t_on,
                    min_span,
                    lambda,
                    exp.signal.components(),
                    &d.delays,
                ) {
                    Ok(x) => rep.add_excitation(&x),
                    Err(e) => rep.push("verdict", format!("unavailable ({e})")),
                }
            }
            (tr.kind, rep)
        })
        .collect()
}

pub fn file_stem(label: &str, kind: EstimatorKind) -> String {
    format!("{label}_{kind}")
}

fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    out: &RunOutput,
    reports: &[(EstimatorKind, MetricReport)],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for tr in &out.traces {
        let path = dir.join(format!("{}.csv", file_stem(&cfg.label, tr.kind)));
        let mut w = BufWriter::new(File::create(&path)?);
        tr.write_csv(&mut w)?;
        w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        files.push(path);
    }
    if cfg.output.emit_reports {
        for (kind, rep) in reports {
            let path = dir.join(format!("{}.report", file_stem(&cfg.label, *kind)));
            rep.write_to(File::create(&path)?)?;
            files.push(path);
        }
    }
    Ok(files)
}

/// Validates, simulates and writes all outputs of one config.
pub fn run_config(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let exp = cfg.to_experiment()?;
    let mut warnings = config_warnings(&exp);
    let output = run_experiment(&exp)?;
    warnings.extend(output.warnings.iter().cloned());
    let reports = build_reports(cfg, &exp, &output);
    let files = write_outputs(&cfg.output.directory, cfg, &output, &reports)?;
    Ok(RunSummary {
        label: cfg.label.clone(),
        output,
        reports,
        warnings,
        files,
    })
}

pub fn run_config_file(path: &Path, overrides: &Overrides) -> Result<RunSummary> {
    let mut cfg = ExperimentConfig::load(path)?;
    overrides.apply(&mut cfg);
    run_config(&cfg)
}

/// Runs every config, at most `jobs` at a time. All configs are validated
/// before any simulation starts.
pub fn run_configs(configs: &[ExperimentConfig], jobs: Option<usize>) -> Result<Vec<RunSummary>> {
    for cfg in configs {
        cfg.to_experiment()?;
    }
    let mut labels: Vec<&str> = configs.iter().map(|c| c.label.as_str()).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config(
            "labels within one sweep must be unique".into(),
        ));
    }
    map_jobs(configs, jobs, run_config).into_iter().collect()
}

pub fn run_preset(
    name: &str,
    overrides: &Overrides,
    jobs: Option<usize>,
) -> Result<Vec<RunSummary>> {
    let mut configs = crate::presets::preset(name)?.configs;
    for c in &mut configs {
        overrides.apply(c);
    }
    run_configs(&configs, jobs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    fn short(name: &str, dir: &Path, t_end: f64) -> Vec<ExperimentConfig> {
        let ov = Overrides {
            t_end: Some(t_end),
            out_dir: Some(dir.to_path_buf()),
            ..Default::default()
        };
        let mut cfgs = preset(name).unwrap().configs;
        cfgs.iter_mut().for_each(|c| ov.apply(c));
        cfgs
    }

    #[test]
    fn writes_trace_and_report() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfgs = short("fig-drem-n2", dir.path(), 80.0);
        cfgs[0].estimator.kind = EstimatorSelection::Both;
        let s = run_configs(&cfgs, Some(1)).unwrap();
        assert_eq!(s[0].files.len(), 4);
        let report = fs::read_to_string(dir.path().join("fig-drem-n2_drem.report")).unwrap();
        assert!(report.contains("verdict=excited"), "{report}");
        assert!(report.contains("delay_bound=satisfied"));
        let csv = fs::read_to_string(dir.path().join("fig-drem-n2_gradient.csv")).unwrap();
        assert!(csv.starts_with("t,u,y,phi_1,phi_2,theta_hat_1"));
    }

    #[test]
    fn reports_can_be_disabled() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfgs = short("fig-drem-n2", dir.path(), 2.0);
        cfgs[0].output.emit_reports = false;
        let s = run_configs(&cfgs, None).unwrap();
        assert_eq!(s[0].files.len(), 1);
    }

    #[test]
    fn delay_bound_violation_warns_but_runs() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfgs = short("fig-drem-n2", dir.path(), 12.0);
        cfgs[0].estimator.drem.as_mut().unwrap().delays = vec![1.2];
        let s = run_configs(&cfgs, None).unwrap();
        assert!(s[0].warnings.iter().any(|w| w.contains("sufficient")));
        assert_eq!(s[0].reports[0].1.get("delay_bound"), Some("violated"));
    }

    #[test]
    fn short_window_is_reported_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let cfgs = short("fig-drem-n2", dir.path(), 10.0);
        let s = run_configs(&cfgs, None).unwrap();
        assert!(s[0].reports[0]
            .1
            .get("verdict")
            .unwrap()
            .starts_with("unavailable"));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfgs = short("fig-drem-n2", dir.path(), 1.0);
        cfgs.push(cfgs[0].clone());
        assert!(run_configs(&cfgs, None).is_err());
    }
}
