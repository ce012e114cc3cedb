//! Command implementations behind the `orikit` binary.
//!
//! - `check-identities` runs the identity suite and prints a pass/fail table.
//! - `simulate` synthesizes a trajectory with sensor streams, runs the filter
//!   and writes `truth.csv`, `imu.csv`, `pose.csv`, `estimate.csv` and
//!   `summary.txt`.

pub mod config;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use orikit::checks::{self, CheckResult, Fault, SuiteConfig, SuiteSizes};
use orikit::experiment::{self, Outcome, Summary, BLOCK_NAMES};

pub use config::RunConfig;
use output::{imu_row, pose_row, state_row, write_csv, IMU_HEADER, POSE_HEADER, STATE_HEADER};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("run failed: {0}")]
    Run(#[from] orikit::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Io(_) => EXIT_IO,
            Self::Run(orikit::Error::InvalidTrajectory(_)) => EXIT_CONFIG,
            Self::Run(_) => EXIT_CHECK_FAILED,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckOptions {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub fault: Option<Fault>,
}

/// Runs the identity suite, writes the table to `out` and returns the exit
/// code together with the rows.
pub fn cmd_check(opts: &CheckOptions, out: &mut dyn Write) -> Result<(i32, Vec<CheckResult>), CliError> {
    let cfg = SuiteConfig {
        seed: opts.seed.unwrap_or(0),
        sizes: opts.samples.map_or_else(SuiteSizes::default, SuiteSizes::scaled),
        fault: opts.fault,
    };
    let results = checks::run_all(&cfg);
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    for r in &results {
        writeln!(out, "{r}").map_err(io)?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(out, "{} of {} checks passed", results.len() - failed, results.len()).map_err(io)?;
    let code = if failed == 0 { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok((code, results))
}

/// Loads the configuration from an explicit path, else from the path in
/// [`config::CONFIG_ENV`], else the built-in default.
pub fn resolve_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => match std::env::var_os(config::CONFIG_ENV) {
            Some(p) if !p.is_empty() => RunConfig::load(Path::new(&p)),
            _ => Ok(RunConfig::default()),
        },
    }
}

/// Runs the configured experiment and writes every output file into
/// `cfg.out_dir`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let outcome = experiment::run(&cfg.scenario())?;
    write_outputs(&cfg.out_dir, &outcome)?;
    Ok(outcome)
}

pub fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let truth_rows = outcome
        .truth
        .samples
        .iter()
        .zip(&outcome.true_states)
        .map(|(s, x)| state_row(s.t, x));
    write_csv(&dir.join("truth.csv"), &STATE_HEADER, truth_rows)?;
    write_csv(&dir.join("imu.csv"), &IMU_HEADER, outcome.imu.samples.iter().map(imu_row))?;
    write_csv(&dir.join("pose.csv"), &POSE_HEADER, outcome.poses.measurements.iter().map(pose_row))?;
    let est_rows = outcome.run.estimates.iter().map(|e| state_row(e.t, &e.mean));
    write_csv(&dir.join("estimate.csv"), &STATE_HEADER, est_rows)?;
    let path: PathBuf = dir.join("summary.txt");
    std::fs::write(&path, format!("{}\n", summary_line(&outcome.summary)))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn summary_line(s: &Summary) -> String {
    let rmse: Vec<String> = BLOCK_NAMES
        .iter()
        .zip(s.rmse)
        .map(|(n, r)| format!("{n}={r:.6e}"))
        .collect();
    format!(
        "rmse {} | nees mean={:.4} in_band={:.4} band=[{:.4}, {:.4}] updates={}",
        rmse.join(" "),
        s.nees.mean,
        s.nees.fraction_in_band,
        s.nees.band.0,
        s.nees.band.1,
        s.nees.count
    )
}
