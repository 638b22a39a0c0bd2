//! Configuration-driven experiments over `scz-core`.
//!
//! A config names a scenario and supplies its domain, ρ, measure, weight, kernel, ball family and
//! probes. Running it produces a [`report::Report`] (JSON) and tidy plot data (CSV with columns
//! `scenario,series,x,y`). Every random choice is seeded from the config, so reruns agree.

pub mod config;
pub mod report;
pub mod scenarios;

use config::{ConfigError, ExperimentConfig};
use rayon::prelude::*;
use report::{CheckRecord, PlotRow, Report};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Multiplies every tolerance (after per-quantity overrides).
    pub tolerance_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { tolerance_scale: 1.0 }
    }
}

pub struct Outcome {
    pub report: Report,
    pub plot: Vec<PlotRow>,
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "panic".into())
}

/// Runs every check of the configured scenario on the current rayon pool.
pub fn run_scenario(cfg: &ExperimentConfig, opts: &RunOptions) -> Outcome {
    let start = Instant::now();
    let entry = scenarios::find(&cfg.scenario).expect("validated scenario name");
    let checks = (entry.build)(Arc::new(cfg.clone()));
    let results: Vec<(CheckRecord, Vec<PlotRow>)> = checks
        .par_iter()
        .map(|check| {
            let t0 = Instant::now();
            let mut rec = scenarios::Recorder::new(&cfg.scenario, &cfg.tolerances, opts.tolerance_scale);
            let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| (check.run)(&mut rec)));
            let error = match outcome {
                Ok(Ok(())) => None,
                Ok(Err(e)) => Some(e.to_string()),
                Err(p) => Some(format!("panicked: {}", panic_message(p))),
            };
            let mut record = CheckRecord {
                name: check.name.clone(),
                anchor: check.anchor.clone(),
                pass: false,
                criteria: rec.criteria,
                constants: rec.constants,
                runtime_ms: t0.elapsed().as_millis() as u64,
                error,
            };
            record.pass = record.reevaluate();
            (record, rec.plot)
        })
        .collect();
    let mut records = Vec::with_capacity(results.len());
    let mut plot = Vec::new();
    for (r, p) in results {
        records.push(r);
        plot.extend(p);
    }
    let report = Report {
        scenario: cfg.scenario.clone(),
        description: entry.description.to_string(),
        pass: records.iter().all(|r| r.pass),
        tolerance_scale: opts.tolerance_scale,
        records,
        plot_data: None,
        runtime_ms: start.elapsed().as_millis() as u64,
    };
    Outcome { report, plot }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

/// Loads, runs and writes `<out>/<scenario>.json` and `<out>/<scenario>.csv`.
pub fn run_config_file(path: &Path, out: &Path, opts: &RunOptions) -> Result<Report, RunError> {
    let cfg = ExperimentConfig::load(path)?;
    let Outcome { mut report, plot } = run_scenario(&cfg, opts);
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |source| RunError::Output { path: p, source }
    };
    std::fs::create_dir_all(out).map_err(io(out))?;
    let csv_name = format!("{}.csv", cfg.scenario);
    let csv_path = out.join(&csv_name);
    report::write_plot_csv(&csv_path, &plot).map_err(io(&csv_path))?;
    report.plot_data = Some(csv_name);
    let json_path = out.join(format!("{}.json", cfg.scenario));
    report::write_report(&json_path, &report).map_err(io(&json_path))?;
    Ok(report)
}
