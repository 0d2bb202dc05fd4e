//! Config-driven experiments with CSV reports.
//!
//! Exit statuses: 0 all checks pass, 1 a check failed, 2 config error
//! (nothing written), 3 numerical failure (nothing written).

mod config;
mod experiments;
mod oracle;
mod report;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use config::{CoordBlock, ExperimentConfig, ExperimentKind, GridBlock, ModelBlock, ParamsBlock, PayoffBlock, TimeBlock};
pub use experiments::{execute, property_outcome, PropertyOutcome};
pub use oracle::{evaluate_oracle, ORACLE_NAMES};
pub use report::{emit_summary, num, Check, Cmp, Report, SUMMARY_FILE, SUMMARY_HEADER};

use crate::error::LabError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HOPFLAB_OUT";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `$HOPFLAB_OUT`, or `reports` when unset.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("reports"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    AssertionFailed = 1,
    ConfigError = 2,
    NumericalFailure = 3,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub name: String,
    pub status: Status,
    pub report: Option<Report>,
    pub path: Option<PathBuf>,
    /// Human-readable diagnostics.
    pub message: String,
}

fn failure(name: String, err: LabError) -> RunOutcome {
    let status = match err {
        LabError::Config(_) | LabError::Parameter(_) | LabError::UnknownPayoff(_) => Status::ConfigError,
        _ => Status::NumericalFailure,
    };
    RunOutcome { name, status, report: None, path: None, message: err.to_string() }
}

/// Runs one experiment and writes `<out_dir>/<output>` unless the config or
/// the numerics fail.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> RunOutcome {
    let report = match execute(cfg) {
        Ok(r) => r,
        Err(e) => return failure(cfg.name.clone(), e),
    };
    let path = out_dir.join(cfg.output_name());
    let text = report.to_csv(VERSION, cfg.seed, &cfg.digest());
    if let Err(e) = std::fs::create_dir_all(out_dir).and_then(|_| std::fs::write(&path, text)) {
        return RunOutcome {
            name: cfg.name.clone(),
            status: Status::NumericalFailure,
            report: Some(report),
            path: None,
            message: format!("cannot write {}: {e}", path.display()),
        };
    }
    let (status, message) = if report.passed() {
        (Status::Pass, format!("{}: PASS", cfg.name))
    } else {
        let failed: Vec<String> = report.failures().iter().map(|c| c.describe()).collect();
        (Status::AssertionFailed, format!("{}: FAIL {}", cfg.name, failed.join("; ")))
    };
    RunOutcome { name: cfg.name.clone(), status, report: Some(report), path: Some(path), message }
}

/// Loads and runs a config file.
pub fn run_path(config: &Path, out_dir: &Path) -> RunOutcome {
    match ExperimentConfig::load(config) {
        Ok(cfg) => run(&cfg, out_dir),
        Err(e) => failure(config.display().to_string(), e),
    }
}

/// Runs several config files on a pool of `jobs` threads; outcomes keep the
/// input order.
pub fn run_many(configs: &[PathBuf], out_dir: &Path, jobs: usize) -> Vec<RunOutcome> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build();
    match pool {
        Ok(pool) => pool.install(|| configs.par_iter().map(|c| run_path(c, out_dir)).collect()),
        Err(_) => configs.iter().map(|c| run_path(c, out_dir)).collect(),
    }
}

/// Highest status of a batch: any config error beats numerical failures,
/// which beat assertion failures.
pub fn combined_status(outcomes: &[RunOutcome]) -> Status {
    let codes: Vec<Status> = outcomes.iter().map(|o| o.status).collect();
    [Status::ConfigError, Status::NumericalFailure, Status::AssertionFailed]
        .into_iter()
        .find(|s| codes.contains(s))
        .unwrap_or(Status::Pass)
}
