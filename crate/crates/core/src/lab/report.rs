//! Run reports and their on-disk form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::LabError;

pub const SCHEMA_VERSION: u32 = 1;

/// One acceptance check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `|measured - reference| <= tolerance`.
    pub fn within(name: &str, measured: f64, reference: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            reference,
            tolerance,
            pass: (measured - reference).abs() <= tolerance,
            detail: None,
        }
    }

    /// Passes when `|measured / reference - 1| <= tolerance`.
    pub fn relative(name: &str, measured: f64, reference: f64, tolerance: f64) -> Self {
        Check {
            pass: (measured / reference - 1.0).abs() <= tolerance,
            ..Self::within(name, measured, reference, tolerance)
        }
    }

    /// Passes when `measured <= bound + tolerance`.
    pub fn at_most(name: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        Check {
            pass: measured <= bound + tolerance,
            ..Self::within(name, measured, bound, tolerance)
        }
    }

    /// Passes when `measured >= bound - tolerance`.
    pub fn at_least(name: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        Check {
            pass: measured >= bound - tolerance,
            ..Self::within(name, measured, bound, tolerance)
        }
    }

    /// Boolean outcome recorded as 1/0 against reference 1.
    pub fn flag(name: &str, pass: bool) -> Self {
        Check {
            name: name.into(),
            measured: if pass { 1.0 } else { 0.0 },
            reference: 1.0,
            tolerance: 0.0,
            pass,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub name: String,
    pub kind: String,
    pub config: ExperimentConfig,
    pub measured: BTreeMap<String, f64>,
    /// Formula values evaluated at run time.
    pub reference: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    /// Structured per-kind output (fits, sweep tables, ...).
    pub details: serde_json::Value,
    pub notes: Vec<String>,
    pub pass: bool,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<String>,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            name: config.name.clone(),
            kind: config.kind.as_str().into(),
            config: config.clone(),
            measured: BTreeMap::new(),
            reference: BTreeMap::new(),
            checks: Vec::new(),
            details: serde_json::Value::Null,
            notes: Vec::new(),
            pass: true,
            wall_clock_seconds: 0.0,
            artifacts: Vec::new(),
        }
    }

    pub fn measure(&mut self, key: &str, value: f64) {
        self.measured.insert(key.into(), value);
    }

    pub fn refer(&mut self, key: &str, value: f64) {
        self.reference.insert(key.into(), value);
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn finalize(&mut self) {
        self.pass = self.checks.iter().all(|c| c.pass);
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// One row of `series.csv`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesRow {
    pub time: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub min: f64,
    pub uloc: Option<f64>,
}

/// Renders rows as CSV with 17 significant digits; the `uloc_p` column is
/// present when `with_uloc` is set.
pub fn render_series(rows: &[SeriesRow], with_uloc: bool) -> String {
    let mut out = String::from("time,l1,l2,linf,min");
    if with_uloc {
        out.push_str(",uloc_p");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.time, r.l1, r.l2, r.linf, r.min);
        if with_uloc {
            let _ = write!(out, ",{:.16e}", r.uloc.unwrap_or(f64::NAN));
        }
        out.push('\n');
    }
    out
}

/// Generic CSV table in the same number format.
pub fn render_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), LabError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| LabError::Io(path.display().to_string(), e))
}

pub(crate) fn write_report(dir: &Path, report: &ExperimentReport) -> Result<(), LabError> {
    let json = serde_json::to_string_pretty(report)?;
    write_file(dir, "report.json", &(json + "\n"))
}
