//! Named, reproducible experiments: configuration, dispatch and reporting.
//!
//! A run validates its [`ExperimentConfig`], dispatches on the kind, and
//! writes `report.json` plus `series.csv` (and kind-specific tables) into its
//! output directory.

mod config;
mod experiments;
mod fields;
mod presets;
mod report;

use std::path::Path;
use std::time::Instant;

pub use config::{
    DecayPair, DecaySpec, EvolveSpec, ExperimentConfig, ExperimentKind, Exponent, FitSpec, GridSpec, GrowthSpec,
    InitialData, NormsSuiteSpec, PicardSpec, SolverSpec, SweepSpec, UlocSpec,
};
pub use experiments::{delta_sweep, Outcome, SweepMember, MU_TREND_SLACK};
pub use fields::{initial_field, random_localized, random_test_field, rng, Stream};
pub use presets::{preset, verify_suite, verify, SuiteEntry, SuiteReport};
pub use report::{render_series, render_table, Check, ExperimentReport, SeriesRow, SCHEMA_VERSION};

use crate::grid::GridError;
use crate::linsemi::LinsemiError;
use crate::norms::NormError;
use crate::solver::SolverError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid experiment configuration:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
    #[error("cannot parse config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Linsemi(#[from] LinsemiError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// Validates and runs `config` without touching the file system.
pub fn run_in_memory(config: &ExperimentConfig) -> Result<Outcome, LabError> {
    let problems = config.validate();
    if !problems.is_empty() {
        return Err(LabError::Invalid(problems));
    }
    let start = Instant::now();
    let mut outcome = experiments::execute(config)?;
    outcome.report.wall_clock_seconds = start.elapsed().as_secs_f64();
    outcome.report.finalize();
    Ok(outcome)
}

/// Runs `config`; with `out` set, writes `report.json`, `series.csv` and any
/// extra tables there.
pub fn run(config: &ExperimentConfig, out: Option<&Path>) -> Result<ExperimentReport, LabError> {
    let outcome = run_in_memory(config)?;
    match out {
        Some(dir) => write_outcome(dir, outcome),
        None => Ok(outcome.report),
    }
}

pub fn write_outcome(dir: &Path, outcome: Outcome) -> Result<ExperimentReport, LabError> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::Io(dir.display().to_string(), e))?;
    let Outcome {
        mut report,
        series,
        with_uloc,
        tables,
    } = outcome;
    report::write_file(dir, "series.csv", &render_series(&series, with_uloc))?;
    report.artifacts = vec!["report.json".into(), "series.csv".into()];
    for (name, contents) in &tables {
        report::write_file(dir, name, contents)?;
        report.artifacts.push(name.clone());
    }
    report::write_report(dir, &report)?;
    Ok(report)
}
