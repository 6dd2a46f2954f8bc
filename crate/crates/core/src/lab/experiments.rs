//! One runner per experiment kind.

use rayon::prelude::*;
use serde_json::json;

use super::config::{DecayPair, ExperimentConfig, ExperimentKind, InitialData, UlocSpec};
use super::fields::{initial_field, random_test_field, rng, Stream};
use super::report::{render_table, Check, ExperimentReport, SeriesRow};
use super::LabError;
use crate::grid::{Grid, RealField};
use crate::kernels::neg_laplace_k_conv;
use crate::linsemi::{
    apply_semigroup, fit_exponential, grad_semigroup_decay_probe, lattice_rate_tolerance,
    mu_l1_probe, peak_wavenumber, reference_decay_exponent, semigroup_decay_probe, spectral_abscissa, symbol_h,
    SemigroupSymbol,
};
use crate::norms::{check_cube_ball_sandwich, check_young_uloc, heat_propagate, heat_uloc_spotcheck, lp_norm, uloc_norm};
use crate::solver::{
    check_positivity, detect_blowup, evolve, picard_solve, BlowupStatus, Formulation, NormRecord, PicardConfig,
    RunStatus, SolverConfig, Trajectory,
};

/// Everything a run produces before it is written out.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub series: Vec<SeriesRow>,
    pub with_uloc: bool,
    /// Extra CSV files as `(file name, contents)`.
    pub tables: Vec<(String, String)>,
}

impl Outcome {
    fn new(config: &ExperimentConfig) -> Self {
        Outcome {
            report: ExperimentReport::new(config),
            series: Vec::new(),
            with_uloc: config.uloc.is_some(),
            tables: Vec::new(),
        }
    }
}

pub(crate) fn execute(config: &ExperimentConfig) -> Result<Outcome, LabError> {
    let grid = config.build_grid()?;
    match config.kind {
        ExperimentKind::Dispersion => dispersion(config, &grid),
        ExperimentKind::Evolve => evolve_run(config, &grid),
        ExperimentKind::Decay => decay(config, &grid),
        ExperimentKind::Growth => growth(config, &grid),
        ExperimentKind::DeltaSweep => delta_sweep_run(config, &grid),
        ExperimentKind::Picard => picard(config, &grid),
        ExperimentKind::Positivity => positivity(config, &grid),
        ExperimentKind::NormsSuite => norms_suite(config, &grid),
    }
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

fn row(record: &NormRecord, field: &RealField, uloc: Option<&UlocSpec>) -> Result<SeriesRow, LabError> {
    Ok(SeriesRow {
        time: record.time,
        l1: record.l1,
        l2: record.l2,
        linf: record.linf,
        min: record.min,
        uloc: match uloc {
            Some(u) => Some(uloc_norm(field, &u.norm_spec())?),
            None => None,
        },
    })
}

/// Rows at the saved snapshots of `traj`.
fn trajectory_rows(traj: &Trajectory, uloc: Option<&UlocSpec>) -> Result<Vec<SeriesRow>, LabError> {
    traj.times
        .iter()
        .zip(&traj.fields)
        .map(|(&t, f)| row(&NormRecord::of(t, f), f, uloc))
        .collect()
}

fn status_json(traj: &Trajectory) -> serde_json::Value {
    json!({
        "run_status": traj.status,
        "classification": detect_blowup(traj),
        "blowup_threshold": traj.blowup_threshold,
        "steps": traj.norm_series.len() - 1,
        "final_time": traj.final_time(),
    })
}

fn max_mean_drift(traj: &Trajectory) -> f64 {
    traj.norm_series
        .windows(2)
        .map(|w| (w[1].mean - w[0].mean).abs())
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------- dispersion

fn dispersion(config: &ExperimentConfig, grid: &Grid) -> Result<Outcome, LabError> {
    let mut out = Outcome::new(config);
    let r = &mut out.report;
    let a = config.background;
    let extent = grid.min_extent();

    let formula = if a > 1.0 { (a.sqrt() - 1.0).powi(2) } else { 0.0 };
    let abscissa = spectral_abscissa(a);
    r.refer("abscissa", formula);
    r.measure("abscissa", abscissa);
    r.check(Check::within("abscissa_formula", abscissa, formula, 1e-12));

    // Brute-force scan of -h over |k| in (0, 10].
    let (scan_rate, scan_k) = (1..=1_000_000u32)
        .map(|i| {
            let k = i as f64 * 1e-5;
            (-symbol_h(a, k * k), k)
        })
        .fold((f64::NEG_INFINITY, 0.0), |b, c| if c.0 > b.0 { c } else { b });
    // For A <= 1 the supremum 0 is approached as k -> 0 and not attained.
    let scan_sup = scan_rate.max(0.0);
    r.measure("scan_max_rate", scan_sup);
    r.check(Check::within("abscissa_vs_scan", abscissa, scan_sup, 1e-8));
    if let Ok(kstar) = peak_wavenumber(a) {
        r.refer("peak_wavenumber", kstar);
        r.measure("scan_peak_wavenumber", scan_k);
        r.check(Check::within("peak_vs_scan", scan_k, kstar, 1e-5));
    }

    let symbol = SemigroupSymbol::new(grid, a);
    let (lattice_rate, lattice_k) = symbol.max_lattice_rate();
    let eps = lattice_rate_tolerance(a, extent);
    r.refer("lattice_tolerance", eps);
    r.measure("lattice_max_rate", lattice_rate);
    r.measure("lattice_peak_k", lattice_k[0].hypot(lattice_k[1]));
    r.check(
        Check::within("lattice_max_rate", lattice_rate, abscissa, eps)
            .with_detail("top lattice rate within the lattice tolerance of the abscissa"),
    );
    r.check(Check::at_most("lattice_below_abscissa", lattice_rate, abscissa, 1e-12));

    semigroup_checks(config, grid, r)?;
    kernel_bound_checks(config, grid, r)?;

    let lattice = grid.lattice(0);
    let rows: Vec<Vec<f64>> = lattice
        .iter()
        .filter(|k| **k >= 0.0)
        .map(|&k| vec![k, -symbol_h(a, k * k)])
        .collect();
    out.tables.push(("dispersion.csv".into(), render_table(&["k", "rate"], &rows)));
    out.report.note("series.csv is header-only for this kind; the lattice dispersion relation is in dispersion.csv");
    Ok(out)
}

fn semigroup_checks(config: &ExperimentConfig, grid: &Grid, r: &mut ExperimentReport) -> Result<(), LabError> {
    use rand::Rng;
    let a = config.background;
    // Single lattice modes near |k| = 1 where exp(-t h) stays moderate.
    let dk = grid.wavenumber_spacing();
    let mut worst: f64 = 0.0;
    for m in [(1.0 / dk).round().max(1.0), (0.5 / dk).round().max(1.0)] {
        let k = m * dk;
        let mode = RealField::from_fn(grid, |x| (k * x[0]).cos());
        for t in [0.5, 1.0, 2.0] {
            let got = apply_semigroup(a, t, &mode)?;
            let expected = mode.scale((-t * symbol_h(a, k * k)).exp());
            worst = worst.max(got.sub(&expected)?.max_abs() / expected.max_abs());
        }
    }
    r.check(Check::at_most("semigroup_single_mode", worst, 0.0, 1e-12));

    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let mut g = rng(config.seed, Stream::Semigroup, i);
        let s = g.random_range(0.0..2.0);
        let t = g.random_range(0.0..2.0);
        let v = random_test_field(grid, &mut g);
        let two = apply_semigroup(a, s, &apply_semigroup(a, t, &v)?)?;
        let one = apply_semigroup(a, s + t, &v)?;
        worst = worst.max(two.sub(&one)?.max_abs() / one.max_abs());
    }
    r.check(Check::at_most("semigroup_composition", worst, 0.0, 1e-11));

    // A = 1 is the threshold: S_1(t) is an L^2 contraction.
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let v = random_test_field(grid, &mut rng(config.seed, Stream::Semigroup, 1000 + i));
        let base = lp_norm(&v, 2.0)?;
        for t in [0.1, 1.0, 10.0] {
            let evolved = lp_norm(&apply_semigroup(1.0, t, &v)?, 2.0)?;
            worst = worst.max(evolved / base - 1.0);
        }
    }
    r.check(Check::at_most("threshold_l2_nonexpansive", worst, 0.0, 1e-12));
    Ok(())
}

fn kernel_bound_checks(config: &ExperimentConfig, grid: &Grid, r: &mut ExperimentReport) -> Result<(), LabError> {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let v = random_test_field(grid, &mut rng(config.seed, Stream::Samples, 5000 + i));
        let ratio = lp_norm(&neg_laplace_k_conv(&v), 2.0)? / lp_norm(&v, 2.0)?;
        worst = worst.max(ratio);
    }
    r.measure("kernel_bound_max_ratio", worst);
    r.check(Check::at_most("kernel_bound_random", worst, 1.0, 1e-12));

    // The top lattice modes: ratios increase towards 1 and the remaining gap
    // is the lattice value 1/(1+k_max^2).
    let lattice = grid.lattice(0);
    let top: Vec<f64> = lattice.iter().rev().copied().filter(|k| *k > 0.0).take(5).collect();
    let mut ratios = Vec::new();
    for &k in top.iter().rev() {
        let mode = RealField::from_fn(grid, |x| (k * x[0]).cos());
        ratios.push(lp_norm(&neg_laplace_k_conv(&mode), 2.0)? / lp_norm(&mode, 2.0)?);
    }
    let kmax = top[0];
    let gap = 1.0 - ratios.last().copied().unwrap_or(0.0);
    let eps = lattice_rate_tolerance(config.background, grid.min_extent());
    r.measure("kernel_bound_top_gap", gap);
    r.refer("kernel_bound_top_gap", 1.0 / (1.0 + kmax * kmax));
    r.check(Check::within("kernel_bound_top_mode", gap, 1.0 / (1.0 + kmax * kmax), eps));
    r.check(Check::flag(
        "kernel_bound_monotone_approach",
        ratios.windows(2).all(|w| w[1] >= w[0]) && ratios.iter().all(|x| *x <= 1.0),
    ));
    Ok(())
}

// ---------------------------------------------------------------- evolve

fn evolve_run(config: &ExperimentConfig, grid: &Grid) -> Result<Outcome, LabError> {
    let mut out = Outcome::new(config);
    let a = config.background;
    let formulation = config.solver.formulation;
    let w0 = initial_field(grid, a, &config.initial, config.seed)?;
    let scfg = config.solver_config(grid, formulation, w0.mean());
    let traj = evolve(&w0, &scfg)?;
    let r = &mut out.report;
    r.measure("dt", scfg.dt);
    r.measure("mean_drift_per_step", max_mean_drift(&traj));
    r.check(Check::at_most("mean_conserved", max_mean_drift(&traj), 0.0, 1e-12));

    let classification = detect_blowup(&traj);
    let first = traj.norm_series[0].linf;
    let last = traj.norm_series.last().map_or(first, |x| x.linf);
    r.measure("linf_initial", first);
    r.measure("linf_final", last);
    // Stability dichotomy for the perturbation of the constant state A.
    if formulation == Formulation::Perturbation {
        if a < 1.0 {
            r.check(Check::flag("no_blowup", matches!(classification, BlowupStatus::Global)));
            let late: Vec<f64> = traj
                .norm_series
                .iter()
                .filter(|x| x.time >= config.fit.t_min)
                .map(|x| x.linf)
                .collect();
            let increases = late.windows(2).filter(|w| w[1] > w[0]).count();
            r.measure("sup_increases_after_t_min", increases as f64);
            r.check(
                Check::flag("sup_decreasing_after_t_min", increases == 0)
                    .with_detail(format!("||v||_inf non-increasing for t >= {}", config.fit.t_min)),
            );
        } else if a > 1.0 {
            r.check(Check::flag("perturbation_grows", last > first));
        }
    }
    if formulation == Formulation::Raw && w0.min() >= 0.0 {
        let pos = check_positivity(&traj, scfg.positivity_tol);
        r.measure("min_u", pos.min_value);
        r.check(Check::at_least("positivity", pos.min_value, pos.floor, 0.0));
    }

    if config.evolve.compare_formulations {
        let (other_w0, other_form) = match formulation {
            Formulation::Perturbation => (w0.add_constant(a), Formulation::Raw),
            Formulation::Raw => (w0.add_constant(-a), Formulation::Perturbation),
        };
        let ocfg = SolverConfig {
            formulation: other_form,
            background: if other_form == Formulation::Raw { 0.0 } else { a },
            ..scfg.clone()
        };
        let other = evolve(&other_w0, &ocfg)?;
        let (pert, raw) = match formulation {
            Formulation::Perturbation => (&traj, &other),
            Formulation::Raw => (&other, &traj),
        };
        let mut worst: f64 = 0.0;
        for (p, u) in pert.fields.iter().zip(&raw.fields) {
            let diff = u.add_constant(-a).sub(p)?.max_abs();
            worst = worst.max(diff / p.max_abs().max(f64::MIN_POSITIVE));
        }
        r.measure("formulation_max_relative_difference", worst);
        r.check(Check::at_most(
            "formulation_consistency",
            worst,
            0.0,
            config.evolve.consistency_tol,
        ));
    }
    r.details = status_json(&traj);
    out.series = trajectory_rows(&traj, config.uloc.as_ref())?;
    Ok(out)
}

// ---------------------------------------------------------------- decay

fn admissible(dim: usize, pair: DecayPair) -> bool {
    let n = dim as f64;
    pair.q.0 <= n && pair.p.0 > n && pair.p.0 <= 2.0 * pair.q.0
}

fn decay(config: &ExperimentConfig, grid: &Grid) -> Result<Outcome, LabError> {
    let mut out = Outcome::new(config);
    let a = config.background;
    let v0 = initial_field(grid, a, &config.initial, config.seed)?;
    let t_max = config.fit.t_max.unwrap_or(config.solver.horizon);
    let times = logspace(config.fit.t_min, t_max, config.fit.samples);
    let tol = config.fit.tolerance.unwrap_or(0.05);
    let dim = grid.dim();
    let primary = config.decay.primary;
    let reference = reference_decay_exponent(dim, primary.p.0, primary.q.0);
    let r = &mut out.report;
    r.refer("decay_exponent", reference);

    if config.decay.heat_control {
        let fit = semigroup_decay_probe(0.0, primary.p.0, primary.q.0, &v0, &times)?;
        r.measure("heat_decay_exponent", fit.exponent);
        r.check(Check::within("heat_control_exponent", fit.exponent, reference, config.decay.heat_tolerance));
    }
    let fit = semigroup_decay_probe(a, primary.p.0, primary.q.0, &v0, &times)?;
    r.measure("decay_exponent", fit.exponent);
    r.measure("decay_fit_residual", fit.residual);
    r.check(Check::within("decay_exponent", fit.exponent, reference, tol));

    let mut pairs = Vec::new();
    for pair in &config.decay.pairs {
        let f = semigroup_decay_probe(a, pair.p.0, pair.q.0, &v0, &times)?;
        let bound = reference_decay_exponent(dim, pair.p.0, pair.q.0);
        pairs.push(json!({
            "p": super::config::Exponent(pair.p.0),
            "q": super::config::Exponent(pair.q.0),
            "fitted": f.exponent,
            "bound_exponent": bound,
            "consistent_with_bound": f.exponent <= bound + tol,
            "admissible": admissible(dim, *pair),
        }));
    }
    let mut details = json!({ "primary_fit": fit, "pairs": pairs });

    if config.decay.gradient {
        let g = grad_semigroup_decay_probe(a, primary.p.0, primary.q.0, &v0, &times)?;
        r.refer("gradient_decay_exponent", reference - 0.5);
        r.measure("gradient_decay_exponent", g.exponent);
        r.check(Check::within("gradient_decay_exponent", g.exponent, reference - 0.5, tol));
        details["gradient_fit"] = json!(g);
    }

    if config.decay.mu {
        let mu_times = logspace(config.decay.mu_t_min, config.decay.mu_t_max, config.decay.mu_samples);
        let samples = mu_l1_probe(grid, a, &mu_times)?;
        let sup = samples.iter().map(|s| s.l1).fold(0.0, f64::max);
        r.measure("mu_l1_sup", sup);
        r.check(Check::flag("mu_l1_finite", sup.is_finite()));
        // Trend over the last decade, as the slope against ln t.
        let start = config.decay.mu_t_max / 10.0;
        let tail: Vec<(f64, f64)> = samples.iter().filter(|s| s.t >= start).map(|s| (s.t.ln(), s.l1)).collect();
        let slope = ols_slope(&tail);
        r.measure("mu_l1_last_decade_slope", slope);
        r.check(
            Check::at_most("mu_l1_no_upward_trend", slope, 0.0, MU_TREND_SLACK)
                .with_detail("slope of ||mu(t)||_1 against ln t over the last decade"),
        );
        if samples.iter().any(|s| s.warning) {
            r.note("mu kernel reaches the box boundary at late times; enlarge the box");
        }
        details["mu"] = json!(samples);
    }
    r.details = details;

    for &t in &times {
        let f = apply_semigroup(a, t, &v0)?;
        out.series.push(row(&NormRecord::of(t, &f), &f, config.uloc.as_ref())?);
    }
    Ok(out)
}

/// Allowed positive slope for the mu trend check (rounding only).
pub const MU_TREND_SLACK: f64 = 1e-9;

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

// ---------------------------------------------------------------- growth

fn growth(config: &ExperimentConfig, grid: &Grid) -> Result<Outcome, LabError> {
    let mut out = Outcome::new(config);
    let a = config.background;
    let v0 = initial_field(grid, a, &config.initial, config.seed)?;
    let mut scfg = config.solver_config(grid, Formulation::Perturbation, v0.mean());
    let stop = config.growth.stop_fraction * a;
    scfg.stop_above = Some(stop);
    let traj = evolve(&v0, &scfg)?;
    let t_end = match traj.status {
        RunStatus::Stopped { time } | RunStatus::Blowup { time } => time,
        RunStatus::Completed => traj.final_time(),
    };
    let t_hi = config.fit.t_max.map_or(t_end, |t| t.min(t_end));
    let (t, l2): (Vec<f64>, Vec<f64>) = traj
        .norm_series
        .iter()
        .filter(|x| x.time >= config.fit.t_min && x.time <= t_hi && x.linf <= stop)
        .map(|x| (x.time, x.l2))
        .unzip();
    let fit = fit_exponential(&t, &l2)?;
    let abscissa = spectral_abscissa(a);
    let r = &mut out.report;
    r.refer("abscissa", abscissa);
    r.measure("growth_rate", fit.exponent);
    r.measure("fit_residual", fit.residual);
    r.measure("window_end", t_hi);
    r.check(Check::relative("growth_rate", fit.exponent, abscissa, config.fit.tolerance.unwrap_or(0.05)));
    match traj.status {
        RunStatus::Stopped { time } => r.note(format!("||v||_inf passed {stop} at t = {time}")),
        RunStatus::Completed => r.note(format!("horizon reached before ||v||_inf passed {stop}")),
        RunStatus::Blowup { time } => r.note(format!("blow-up threshold crossed at t = {time}")),
    }
    r.details = json!({ "fit": fit, "status": status_json(&traj) });
    out.series = trajectory_rows(&traj, config.uloc.as_ref())?;
    Ok(out)
}

// ---------------------------------------------------------------- delta sweep

/// Outcome of one member of a delta sweep.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SweepMember {
    pub delta: f64,
    /// First time with `||v||_2 >= target` (log-linear interpolation).
    pub crossing_time: Option<f64>,
    pub terminal_l2: f64,
    pub blew_up: bool,
}

fn crossing_time(series: &[NormRecord], target: f64) -> Option<f64> {
    series.windows(2).find(|w| w[1].l2 >= target).map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.l2 >= target {
            return a.time;
        }
        let s = (target.ln() - a.l2.ln()) / (b.l2.ln() - a.l2.ln());
        a.time + s * (b.time - a.time)
    })
}

/// Runs the sweep without writing anything; `base` must be a
/// `delta_sweep` config (its `sweep` section is overridden by the arguments).
pub fn delta_sweep(
    background: f64,
    deltas: &[f64],
    target: f64,
    base: &ExperimentConfig,
) -> Result<ExperimentReport, LabError> {
    let mut cfg = base.clone();
    cfg.kind = ExperimentKind::DeltaSweep;
    cfg.background = background;
    cfg.sweep.deltas = deltas.to_vec();
    cfg.sweep.target = target;
    let problems = cfg.validate();
    if !problems.is_empty() {
        return Err(LabError::Invalid(problems));
    }
    let mut out = execute(&cfg)?;
    out.report.finalize();
    Ok(out.report)
}

fn delta_sweep_run(config: &ExperimentConfig, grid: &Grid) -> Result<Outcome, LabError> {
    let mut out = Outcome::new(config);
    let a = config.background;
    let target = config.sweep.target;
    let shape = initial_field(grid, a, &config.initial, config.seed)?;
    let shape = shape.scale(1.0 / lp_norm(&shape, 2.0)?);
    let runs: Vec<Result<(SweepMember, Trajectory), LabError>> = config
        .sweep
        .deltas
        .par_iter()
        .map(|&delta| {
            let v0 = shape.scale(delta);
            let mut scfg = config.solver_config(grid, Formulation::Perturbation, v0.mean());
            scfg.stop_l2_above = Some(target);
            let traj = evolve(&v0, &scfg)?;
            let member = SweepMember {
                delta,
                crossing_time: crossing_time(&traj.norm_series, target),
                terminal_l2: traj.norm_series.last().map_or(0.0, |x| x.l2),
                blew_up: matches!(traj.status, RunStatus::Blowup { .. }),
            };
            Ok((member, traj))
        })
        .collect();
    let mut members = Vec::new();
    let mut trajectories = Vec::new();
    for run in runs {
        let (m, traj) = run?;
        members.push(m);
        trajectories.push(traj);
    }
    let smallest = members
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.delta.total_cmp(&y.1.delta))
        .map(|(i, _)| trajectories.swap_remove(i));
    let r = &mut out.report;
    let abscissa = spectral_abscissa(a);
    r.refer("abscissa", abscissa);
    for m in &members {
        if m.blew_up && m.crossing_time.is_none() {
            r.note(format!("delta = {:e} blew up before reaching the target; excluded", m.delta));
        }
    }
    let reached: Vec<&SweepMember> = members.iter().filter(|m| m.crossing_time.is_some()).collect();
    if a > 1.0 {
        r.refer("escape_slope", 1.0 / abscissa);
        r.check(Check::flag("all_reach_target", reached.len() == members.len()));
        let min_terminal = members.iter().map(|m| m.terminal_l2).fold(f64::INFINITY, f64::min);
        r.measure("min_terminal_l2", min_terminal);
        r.check(Check::at_least("terminal_amplitude_at_least_target", min_terminal, target, 0.0));
        let points: Vec<(f64, f64)> = reached
            .iter()
            .map(|m| ((1.0 / m.delta).ln(), m.crossing_time.unwrap_or(f64::NAN)))
            .collect();
        if points.len() >= 2 {
            let slope = ols_slope(&points);
            r.measure("escape_slope", slope);
            r.measure("escape_rate", 1.0 / slope);
            r.check(Check::relative(
                "escape_rate",
                1.0 / slope,
                abscissa,
                config.fit.tolerance.unwrap_or(0.1),
            ));
        } else {
            r.check(Check::flag("escape_rate", false).with_detail("fewer than two runs reached the target"));
        }
    } else {
        r.check(Check::flag("stability_consistent", reached.is_empty()));
        if reached.is_empty() {
            r.note("no perturbation reached the target: consistent with stability");
        }
    }
    let table: Vec<Vec<f64>> = members
        .iter()
        .map(|m| {
            vec![
                m.delta,
                m.crossing_time.unwrap_or(f64::NAN),
                m.terminal_l2,
                if m.crossing_time.is_some() { 1.0 } else { 0.0 },
            ]
        })
        .collect();
    out.tables.push((
        "sweep.csv".into(),
        render_table(&["delta", "crossing_time", "terminal_l2", "reached"], &table),
    ));
    r.details = json!({ "members": members });
    r.note("series.csv holds the run with the smallest delta");
    if let Some(traj) = smallest {
        out.series = trajectory_rows(&traj, config.uloc.as_ref())?;
    }
    Ok(out)
}

// ---------------------------------------------------------------- picard

fn picard(config: &ExperimentConfig, grid: &Grid) -> Result<Outcome, LabError> {
    let mut out = Outcome::new(config);
    let a = config.background;
    let v0 = initial_field(grid, a, &config.initial, config.seed)?;
    let spec = &config.picard;
    let pcfg = PicardConfig {
        background: a,
        horizon: config.solver.horizon,
        substeps: spec.substeps,
        max_iter: spec.max_iter,
        tol: spec.tol,
        p: spec.p.0,
        dealias: config.solver.dealias,
    };
    let result = picard_solve(&v0, &pcfg)?;
    let r = &mut out.report;
    let tail_ratio = result.ratios.iter().skip(1).copied().fold(0.0, f64::max);
    r.measure("max_ratio_from_second", tail_ratio);
    if let Some(first) = result.ratios.first() {
        r.measure("first_ratio", *first);
    }
    r.measure("iterations", result.distances.len() as f64);
    r.check(Check::flag("contracting", result.contracting).with_detail(if result.contracting {
        "all successive-iterate ratios below 1".to_string()
    } else {
        "ratio >= 1 or divergence: the horizon is too long for a contraction".to_string()
    }));
    r.check(Check::at_most("contraction_ratio", tail_ratio, spec.contraction_limit, 0.0));
    r.check(Check::flag("converged", result.converged));

    let mut scfg = config.solver_config(grid, Formulation::Perturbation, v0.mean());
    scfg.dt = config.solver.horizon / spec.etd_steps as f64;
    let etd = evolve(&v0, &scfg)?;
    let reference = etd.final_field();
    let rel = lp_norm(&reference.sub(&result.final_field)?, 2.0)? / lp_norm(reference, 2.0)?.max(f64::MIN_POSITIVE);
    r.measure("picard_vs_etd_relative_l2", rel);
    r.check(Check::at_most("picard_vs_etd", rel, 0.0, spec.agreement));
    r.details = json!({
        "distances": result.distances,
        "ratios": result.ratios,
        "converged": result.converged,
        "contracting": result.contracting,
    });
    out.series = result
        .final_series
        .iter()
        .map(|rec| SeriesRow {
            time: rec.time,
            l1: rec.l1,
            l2: rec.l2,
            linf: rec.linf,
            min: rec.min,
            uloc: None,
        })
        .collect();
    out.with_uloc = false;
    if config.uloc.is_some() {
        out.report.note("uloc column is not available for picard runs");
    }
    Ok(out)
}

// ---------------------------------------------------------------- positivity

fn positivity(config: &ExperimentConfig, grid: &Grid) -> Result<Outcome, LabError> {
    let mut out = Outcome::new(config);
    let u0 = initial_field(grid, config.background, &config.initial, config.seed)?;
    let r = &mut out.report;
    if u0.min() < 0.0 {
        r.note("u0 has negative values: the positivity statement does not apply, violations are only reported");
    }
    let scfg = config.solver_config(grid, Formulation::Raw, u0.mean());
    let traj = evolve(&u0, &scfg)?;
    let report = check_positivity(&traj, scfg.positivity_tol);
    r.measure("min_u", report.min_value);
    r.measure("min_time", report.min_time);
    r.refer("floor", report.floor);
    r.check(
        Check::at_least("positivity", report.min_value, report.floor, 0.0)
            .with_detail(format!("{} violating steps", report.violations.len())),
    );
    r.check(Check::at_most("mean_conserved", max_mean_drift(&traj), 0.0, 1e-12));
    r.details = json!({
        "status": status_json(&traj),
        "violations": report.violations.iter().take(20).collect::<Vec<_>>(),
    });
    out.series = trajectory_rows(&traj, config.uloc.as_ref())?;
    Ok(out)
}

// ---------------------------------------------------------------- norms suite

fn norms_suite(config: &ExperimentConfig, grid: &Grid) -> Result<Outcome, LabError> {
    let mut out = Outcome::new(config);
    let spec = &config.norms;
    let fields: Vec<RealField> = (0..spec.samples as u64)
        .map(|i| random_test_field(grid, &mut rng(config.seed, Stream::Samples, i)))
        .collect();

    struct Sample {
        sandwich_ok: usize,
        sandwich_total: usize,
        worst_sandwich: f64,
        young: Option<(bool, f64)>,
        heat_ok: usize,
        heat_total: usize,
        heat_ratio: f64,
    }
    let samples: Vec<Result<Sample, LabError>> = fields
        .par_iter()
        .map(|f| {
            let mut s = Sample {
                sandwich_ok: 0,
                sandwich_total: 0,
                worst_sandwich: 0.0,
                young: None,
                heat_ok: 0,
                heat_total: 0,
                heat_ratio: 0.0,
            };
            for p in &spec.sandwich_p {
                let rep = check_cube_ball_sandwich(f, p.0)?;
                s.sandwich_total += 1;
                s.sandwich_ok += rep.pass as usize;
                let tight = (rep.lhs / rep.mid).max(rep.mid / rep.rhs);
                s.worst_sandwich = s.worst_sandwich.max(tight);
            }
            if grid.dim() == 1 {
                let y = check_young_uloc(f, spec.young_p.0, spec.young_q.0, spec.young_r.0)?;
                s.young = Some((y.pass, y.empirical_constant));
            }
            for &t in &spec.heat_times {
                let h = heat_uloc_spotcheck(f, spec.heat_p.0, spec.heat_p.0, t)?;
                s.heat_total += 1;
                s.heat_ok += h.pass as usize;
                s.heat_ratio = s.heat_ratio.max(h.ratio);
            }
            Ok(s)
        })
        .collect();
    let samples = samples.into_iter().collect::<Result<Vec<_>, _>>()?;
    let r = &mut out.report;

    let ok: usize = samples.iter().map(|s| s.sandwich_ok).sum();
    let total: usize = samples.iter().map(|s| s.sandwich_total).sum();
    r.measure("sandwich_passes", ok as f64);
    r.measure("sandwich_worst_tightness", samples.iter().map(|s| s.worst_sandwich).fold(0.0, f64::max));
    r.check(Check::flag("cube_ball_sandwich", ok == total).with_detail(format!("{ok}/{total} field-exponent pairs")));

    if grid.dim() == 1 {
        let young: Vec<(bool, f64)> = samples.iter().filter_map(|s| s.young).collect();
        let passes = young.iter().filter(|y| y.0).count();
        let empirical = young.iter().map(|y| y.1).fold(0.0, f64::max);
        let r_exp = spec.young_r.0;
        let constant = 90.0 * crate::kernels::bessel_gradient_norm_1d(1.0)
            + 54.0 * crate::kernels::bessel_gradient_norm_1d(r_exp);
        r.refer("young_constant", constant);
        r.measure("young_empirical_constant", empirical);
        r.check(
            Check::flag("young_uloc", passes == young.len())
                .with_detail(format!("{passes}/{} fields; empirical constant {empirical:.6}", young.len())),
        );
    } else {
        r.note("the Young-type uloc check is one-dimensional; skipped");
    }

    let heat_ok: usize = samples.iter().map(|s| s.heat_ok).sum();
    let heat_total: usize = samples.iter().map(|s| s.heat_total).sum();
    let heat_ratio = samples.iter().map(|s| s.heat_ratio).fold(0.0, f64::max);
    r.measure("heat_max_ratio", heat_ratio);
    r.check(
        Check::flag("heat_uloc_contraction", heat_ok == heat_total)
            .with_detail(format!("{heat_ok}/{heat_total}; C = 1 with slack {}", crate::norms::HEAT_CONTRACTION_SLACK)),
    );

    // Heat flow of a comb: bounded, non-decaying data.
    let comb = initial_field(
        grid,
        0.0,
        &InitialData::Comb {
            period: 4.0,
            width: 0.5,
            amplitude: 1.0,
        },
        config.seed,
    )?;
    let uloc = config.uloc.unwrap_or(UlocSpec {
        p: spec.heat_p,
        radius: 1.0,
        shape: crate::norms::WindowShape::Ball,
        stride: 1,
    });
    out.with_uloc = true;
    let mut times = vec![0.0];
    times.extend(spec.heat_times.iter().copied());
    for t in times {
        let f = if t == 0.0 { comb.clone() } else { heat_propagate(&comb, t) };
        out.series.push(row(&NormRecord::of(t, &f), &f, Some(&uloc))?);
    }
    out.report.note("series.csv follows the heat flow of a period-4 comb");
    Ok(out)
}
