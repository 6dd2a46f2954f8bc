//! Built-in configurations and the full verification suite.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::*;
use super::report::{Check, SCHEMA_VERSION};
use super::{run_in_memory, write_outcome, LabError};
use crate::solver::Formulation;

fn gaussian(width: f64, amplitude: f64) -> InitialData {
    InitialData::Gaussian {
        center: None,
        width,
        amplitude: Some(amplitude),
        mass: None,
    }
}

fn grid(dim: usize, extent: f64, points: usize) -> GridSpec {
    GridSpec {
        dim,
        points,
        extent: Some(extent),
        resonant_min_extent: None,
    }
}

fn resonant(min_extent: f64, points: usize) -> GridSpec {
    GridSpec {
        dim: 1,
        points,
        extent: None,
        resonant_min_extent: Some(min_extent),
    }
}

fn horizon(t: f64) -> SolverSpec {
    SolverSpec {
        horizon: t,
        ..SolverSpec::default()
    }
}

/// Default configuration of each kind.
pub fn preset(kind: ExperimentKind) -> ExperimentConfig {
    let base = ExperimentConfig {
        name: kind.as_str().replace('_', "-"),
        kind,
        ..ExperimentConfig::default()
    };
    match kind {
        ExperimentKind::Dispersion => ExperimentConfig {
            background: 2.0,
            grid: grid(1, 200.0, 1024),
            ..base
        },
        ExperimentKind::Evolve => ExperimentConfig {
            background: 0.5,
            grid: grid(1, 200.0, 1024),
            initial: InitialData::Random {
                amplitude: 0.05,
                width: 3.0,
                modes: 4,
            },
            solver: horizon(200.0),
            fit: FitSpec {
                t_min: 5.0,
                ..FitSpec::default()
            },
            ..base
        },
        ExperimentKind::Decay => ExperimentConfig {
            background: 0.5,
            grid: grid(1, 400.0, 2048),
            initial: InitialData::Gaussian {
                center: None,
                width: 1.0,
                amplitude: None,
                mass: Some(1.0),
            },
            solver: horizon(200.0),
            fit: FitSpec {
                t_min: 5.0,
                t_max: Some(200.0),
                samples: 40,
                tolerance: Some(0.05),
            },
            decay: DecaySpec {
                mu: true,
                ..DecaySpec::default()
            },
            ..base
        },
        ExperimentKind::Growth => ExperimentConfig {
            background: 2.0,
            grid: resonant(300.0, 1024),
            initial: InitialData::Packet {
                k: None,
                width: 30.0,
                amplitude: 1e-4,
            },
            solver: horizon(150.0),
            fit: FitSpec {
                t_min: 5.0,
                tolerance: Some(0.05),
                ..FitSpec::default()
            },
            ..base
        },
        ExperimentKind::DeltaSweep => ExperimentConfig {
            background: 2.0,
            grid: resonant(300.0, 1024),
            initial: InitialData::Packet {
                k: None,
                width: 30.0,
                amplitude: 1.0,
            },
            solver: horizon(120.0),
            fit: FitSpec {
                tolerance: Some(0.1),
                ..FitSpec::default()
            },
            ..base
        },
        ExperimentKind::Picard => ExperimentConfig {
            background: 0.5,
            grid: grid(1, 40.0, 256),
            initial: gaussian(2.0, 0.2),
            solver: horizon(0.1),
            ..base
        },
        ExperimentKind::Positivity => ExperimentConfig {
            background: 0.0,
            grid: grid(2, 20.0, 64),
            initial: gaussian(1.5, 1.0),
            solver: SolverSpec {
                horizon: 5.0,
                formulation: Formulation::Raw,
                ..SolverSpec::default()
            },
            ..base
        },
        ExperimentKind::NormsSuite => ExperimentConfig {
            background: 0.0,
            grid: grid(1, 32.0, 256),
            ..base
        },
    }
}

fn named(mut cfg: ExperimentConfig, name: &str) -> ExperimentConfig {
    cfg.name = name.into();
    cfg
}

/// Every configuration run by `verify`, all with `seed`.
pub fn verify_suite(seed: u64) -> Vec<ExperimentConfig> {
    use ExperimentKind::*;
    let mut suite = Vec::new();
    for a in [1.5, 2.0, 4.0, 9.0] {
        let mut cfg = preset(Dispersion);
        cfg.background = a;
        suite.push(named(cfg, &format!("dispersion-a{a}")));
    }
    suite.push(named(preset(Decay), "decay-a0.5"));
    suite.push(named(preset(Growth), "growth-a2"));
    let mut g4 = preset(Growth);
    g4.background = 4.0;
    g4.grid = resonant(200.0, 1024);
    g4.initial = InitialData::Packet {
        k: None,
        width: 20.0,
        amplitude: 1e-4,
    };
    g4.solver.horizon = 40.0;
    g4.fit.t_min = 2.0;
    suite.push(named(g4, "growth-a4"));
    suite.push(named(preset(DeltaSweep), "delta-sweep-a2"));
    let mut control = preset(DeltaSweep);
    control.background = 0.5;
    control.grid = grid(1, 300.0, 1024);
    control.initial = gaussian(3.0, 1.0);
    control.solver.horizon = 100.0;
    suite.push(named(control, "delta-sweep-a0.5"));
    suite.push(named(preset(Evolve), "evolve-stable-a0.5"));
    let mut unstable = preset(Evolve);
    unstable.background = 2.0;
    unstable.solver.horizon = 30.0;
    suite.push(named(unstable, "evolve-control-a2"));
    for a in [0.5, 2.0] {
        let mut cfg = preset(Evolve);
        cfg.background = a;
        cfg.grid = grid(1, 100.0, 512);
        cfg.solver.horizon = 20.0;
        cfg.evolve.compare_formulations = true;
        suite.push(named(cfg, &format!("consistency-a{a}")));
    }
    suite.push(named(preset(Picard), "picard-a0.5"));
    suite.push(named(preset(Positivity), "positivity"));
    suite.push(named(preset(NormsSuite), "norms-suite"));
    let mut norms2 = preset(NormsSuite);
    norms2.grid = grid(2, 8.0, 32);
    norms2.norms.samples = 50;
    suite.push(named(norms2, "norms-suite-2d"));
    for cfg in &mut suite {
        cfg.seed = seed;
    }
    suite
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub kind: String,
    pub pass: bool,
    pub failed: Vec<Check>,
    pub error: Option<String>,
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub seed: u64,
    pub runs: Vec<SuiteEntry>,
    pub pass: bool,
    pub wall_clock_seconds: f64,
}

/// Runs the suite in parallel; with `out`, each run writes into `out/<name>`
/// and the summary goes to `out/report.json`.
pub fn verify(seed: u64, out: Option<&Path>) -> Result<SuiteReport, LabError> {
    let start = Instant::now();
    let runs: Vec<SuiteEntry> = verify_suite(seed)
        .par_iter()
        .map(|cfg| {
            let result = run_in_memory(cfg).and_then(|o| match out {
                Some(dir) => write_outcome(&dir.join(&cfg.name), o),
                None => Ok(o.report),
            });
            match result {
                Ok(report) => SuiteEntry {
                    name: cfg.name.clone(),
                    kind: cfg.kind.as_str().into(),
                    pass: report.pass,
                    failed: report.failed_checks().cloned().collect(),
                    error: None,
                    wall_clock_seconds: report.wall_clock_seconds,
                },
                Err(e) => SuiteEntry {
                    name: cfg.name.clone(),
                    kind: cfg.kind.as_str().into(),
                    pass: false,
                    failed: Vec::new(),
                    error: Some(e.to_string()),
                    wall_clock_seconds: 0.0,
                },
            }
        })
        .collect();
    let report = SuiteReport {
        schema_version: SCHEMA_VERSION,
        seed,
        pass: runs.iter().all(|r| r.pass),
        runs,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| LabError::Io(dir.display().to_string(), e))?;
        let json = serde_json::to_string_pretty(&report)?;
        super::report::write_file(dir, "report.json", &(json + "\n"))?;
    }
    Ok(report)
}
