use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};

use multifreq::config::EstimatorSelection;
use multifreq::presets::{all_presets, preset};
use multifreq::runner::{run_config_file, run_preset, Overrides, RunSummary};
use multifreq::Error;

/// Estimate the frequencies of a multisine signal with gradient and DREM
/// estimators. Traces and metric reports are written to the output
/// directory; diagnostics go to stderr.
#[derive(Debug, Parser)]
#[command(name = "multifreq", version)]
#[command(group(ArgGroup::new("source").args(["preset", "config", "list_presets"]).required(true)))]
struct Cli {
    /// Named experiment (see --list-presets)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,

    /// TOML experiment file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Print the preset names and exit
    #[arg(long)]
    list_presets: bool,

    /// Output directory (overrides the config)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Integration step in seconds
    #[arg(long)]
    dt: Option<f64>,

    /// Simulated duration in seconds
    #[arg(long = "t-end")]
    t_end: Option<f64>,

    /// Which estimator(s) to run
    #[arg(long, value_parser = parse_selection)]
    estimator: Option<EstimatorSelection>,

    /// Maximum number of experiments run at once
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    /// Write the preset's config file(s) into DIR instead of running
    #[arg(long, value_name = "DIR", requires = "preset")]
    dump_config: Option<PathBuf>,
}

fn parse_selection(s: &str) -> Result<EstimatorSelection, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn report(summaries: &[RunSummary]) {
    for s in summaries {
        for w in &s.warnings {
            eprintln!("warning [{}]: {w}", s.label);
        }
        for f in &s.files {
            eprintln!("wrote {}", f.display());
        }
    }
}

fn dump(name: &str, overrides: &Overrides, dir: &PathBuf) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    for mut cfg in preset(name)?.configs {
        overrides.apply(&mut cfg);
        let path = dir.join(format!("{}.toml", cfg.label));
        fs::write(&path, cfg.to_toml_string()?)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    if cli.list_presets {
        for p in all_presets() {
            println!("{:<18} {}", p.name, p.description);
        }
        return Ok(());
    }
    let overrides = Overrides {
        dt: cli.dt,
        t_end: cli.t_end,
        estimator: cli.estimator,
        out_dir: cli.out.clone(),
    };
    let jobs = cli.jobs.map(|j| j as usize);
    if let Some(name) = &cli.preset {
        if let Some(dir) = &cli.dump_config {
            return dump(name, &overrides, dir);
        }
        report(&run_preset(name, &overrides, jobs)?);
    } else if let Some(path) = &cli.config {
        report(&[run_config_file(path, &overrides)?]);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
