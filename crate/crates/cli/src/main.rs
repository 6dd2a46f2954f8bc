use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use kslab::lab::{self, ExperimentConfig, ExperimentKind, ExperimentReport, SuiteReport};

#[derive(Parser, Debug)]
#[command(name = "kslab", version, about = "Keller-Segel pseudo-spectral simulator and stability lab")]
struct Cli {
    /// TOML experiment configuration (defaults to the built-in preset).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (defaults to out/<name>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized fields, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only report errors and the final verdict.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Dispersion relation, spectral abscissa and semigroup checks.
    Dispersion,
    /// Nonlinear evolution (perturbation or raw formulation).
    Evolve,
    /// Picard iteration of the mild formulation.
    Picard,
    /// Algebraic decay of the linearized semigroup.
    Decay,
    /// Exponential growth of an unstable packet.
    Growth,
    /// Escape times over a range of initial amplitudes.
    DeltaSweep,
    /// Runs every built-in experiment.
    Verify,
    /// Uniformly local norm checks.
    NormsSuite,
}

impl Command {
    fn kind(self) -> Option<ExperimentKind> {
        Some(match self {
            Command::Dispersion => ExperimentKind::Dispersion,
            Command::Evolve => ExperimentKind::Evolve,
            Command::Picard => ExperimentKind::Picard,
            Command::Decay => ExperimentKind::Decay,
            Command::Growth => ExperimentKind::Growth,
            Command::DeltaSweep => ExperimentKind::DeltaSweep,
            Command::NormsSuite => ExperimentKind::NormsSuite,
            Command::Verify => return None,
        })
    }

    fn accepts(self, kind: ExperimentKind) -> bool {
        match self {
            Command::Evolve => matches!(kind, ExperimentKind::Evolve | ExperimentKind::Positivity),
            other => other.kind() == Some(kind),
        }
    }
}

fn load_config(cli: &Cli, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_path(path).with_context(|| format!("reading {}", path.display()))?;
            if !cli.command.accepts(cfg.kind) {
                bail!(
                    "{} has kind {:?}, which the {:?} subcommand does not run",
                    path.display(),
                    cfg.kind.as_str(),
                    cli.command
                );
            }
            cfg
        }
        None => lab::preset(kind),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn print_report(report: &ExperimentReport, dir: &Path, quiet: bool) {
    if !quiet {
        for c in &report.checks {
            println!(
                "{} {:<36} measured={:.6e} reference={:.6e} tolerance={:.1e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.reference,
                c.tolerance
            );
        }
        for n in &report.notes {
            println!("note: {n}");
        }
    }
    println!(
        "{}: {} ({:.2}s, outputs in {})",
        report.name,
        if report.pass { "pass" } else { "FAIL" },
        report.wall_clock_seconds,
        dir.display()
    );
}

fn print_suite(report: &SuiteReport, dir: &Path, quiet: bool) {
    for run in &report.runs {
        if !quiet || !run.pass {
            println!(
                "{} {:<24} {:.2}s",
                if run.pass { "PASS" } else { "FAIL" },
                run.name,
                run.wall_clock_seconds
            );
        }
        if let Some(e) = &run.error {
            println!("     error: {e}");
        }
        for c in &run.failed {
            println!(
                "     {} measured={:.6e} reference={:.6e} tolerance={:.1e}",
                c.name, c.measured, c.reference, c.tolerance
            );
        }
    }
    println!(
        "verify: {} ({} runs, {:.1}s, outputs in {})",
        if report.pass { "pass" } else { "FAIL" },
        report.runs.len(),
        report.wall_clock_seconds,
        dir.display()
    );
}

fn execute(cli: &Cli) -> Result<bool> {
    match cli.command.kind() {
        None => {
            if cli.config.is_some() {
                bail!("verify runs the built-in suite and takes no --config");
            }
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out/verify"));
            let report = lab::verify(cli.seed.unwrap_or(0), Some(&dir))?;
            print_suite(&report, &dir, cli.quiet);
            Ok(report.pass)
        }
        Some(kind) => {
            let cfg = load_config(cli, kind)?;
            let dir = cli.out.clone().unwrap_or_else(|| Path::new("out").join(&cfg.name));
            log::info!("running {} ({}) into {}", cfg.name, cfg.kind.as_str(), dir.display());
            let report = lab::run(&cfg, Some(&dir))?;
            print_report(&report, &dir, cli.quiet);
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
