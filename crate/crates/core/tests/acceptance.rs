//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero on failure.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kslab::grid::{forward_transform, make_grid, Grid, RealField};
use kslab::kernels::neg_laplace_k_conv;
use kslab::lab::{self, ExperimentKind};
use kslab::linsemi::{
    apply_semigroup, build_near_eigenmode, lattice_rate_tolerance, mu_l1_probe, peak_wavenumber, resonant_extent,
    spectral_abscissa,
};
use kslab::norms::{check_cube_ball_sandwich, check_young_uloc, heat_uloc_spotcheck, lp_norm};
use kslab::solver::{
    check_positivity, detect_blowup, dt_max, evolve, picard_solve, BlowupStatus, Formulation, PicardConfig,
    RunStatus, SolverConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn h(a: f64, k: f64) -> f64 {
    k * k - a * k * k / (1.0 + k * k)
}

fn ols(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn random_field(g: &Grid, rng: &mut ChaCha8Rng) -> RealField {
    let dim = g.dim();
    let modes: Vec<([f64; 2], f64, f64)> = (0..rng.random_range(1..=6))
        .map(|_| {
            let mut k = [0.0; 2];
            for (a, slot) in k.iter_mut().enumerate().take(dim) {
                *slot = TAU * rng.random_range(0..=16) as f64 / g.extent(a);
            }
            (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..TAU))
        })
        .collect();
    let bumps: Vec<([f64; 2], f64, f64)> = (0..rng.random_range(0..=3))
        .map(|_| {
            let mut c = [0.0; 2];
            for (a, slot) in c.iter_mut().enumerate().take(dim) {
                *slot = rng.random_range(0.0..g.extent(a));
            }
            (c, rng.random_range(0.3..2.0), rng.random_range(-3.0..3.0))
        })
        .collect();
    RealField::from_fn(g, |x| {
        let w: f64 = modes.iter().map(|(k, a, p)| a * (k[0] * x[0] + k[1] * x[1] + p).cos()).sum();
        let b: f64 = bumps
            .iter()
            .map(|(c, s, a)| {
                let d = g.periodic_displacement(x, *c);
                a * (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * s * s)).exp()
            })
            .sum();
        w + b
    })
}

fn gaussian(g: &Grid, amplitude: f64, width: f64) -> RealField {
    let c = g.center();
    RealField::from_fn(g, |x| {
        let r2: f64 = (0..g.dim()).map(|a| (x[a] - c[a]).powi(2)).sum();
        amplitude * (-r2 / (2.0 * width * width)).exp()
    })
}

fn abscissa() -> Outcome {
    let mut formula_err: f64 = 0.0;
    let mut scan_err: f64 = 0.0;
    for a in [1.5, 2.0, 4.0, 9.0] {
        let formula = (f64::sqrt(a) - 1.0).powi(2);
        let scan = (1..=1_000_000).map(|i| -h(a, i as f64 * 1e-5)).fold(f64::NEG_INFINITY, f64::max);
        formula_err = formula_err.max((spectral_abscissa(a) - formula).abs());
        scan_err = scan_err.max((spectral_abscissa(a) - scan).abs());
    }
    Outcome {
        pass: formula_err <= 1e-12 && scan_err <= 1e-8,
        detail: format!("formula err {formula_err:.1e} (<= 1e-12), scan err {scan_err:.1e} (<= 1e-8)"),
    }
}

fn semigroup_exactness() -> Outcome {
    let g = make_grid(1, 20.0 * PI, 256).unwrap();
    let mut mode_err: f64 = 0.0;
    let mut field_err: f64 = 0.0;
    for a in [0.5, 2.0, 4.0] {
        for m in [3usize, 10, 20] {
            let k = m as f64 * TAU / g.extent(0);
            let v = RealField::from_fn(&g, |x| (k * x[0] + 0.3).cos());
            let vh = forward_transform(&v).coefficients()[m];
            for t in [0.25, 1.0, 2.0] {
                let got = apply_semigroup(a, t, &v).unwrap();
                let factor = (-t * h(a, k)).exp();
                let gh = forward_transform(&got).coefficients()[m];
                mode_err = mode_err.max((gh - vh * factor).norm() / (vh * factor).norm());
                // Sampling roundoff in the other modes is not damped; the sup
                // comparison is only meaningful while it stays below the tolerance.
                if factor >= 1e-2 {
                    field_err = field_err.max(got.sub(&v.scale(factor)).unwrap().max_abs() / factor);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut comp_err: f64 = 0.0;
    for _ in 0..50 {
        let a = rng.random_range(0.0..4.0);
        let s = rng.random_range(0.0..2.0);
        let t = rng.random_range(0.0..2.0);
        let v = random_field(&g, &mut rng);
        let two = apply_semigroup(a, s, &apply_semigroup(a, t, &v).unwrap()).unwrap();
        let one = apply_semigroup(a, s + t, &v).unwrap();
        comp_err = comp_err.max(two.sub(&one).unwrap().max_abs() / one.max_abs());
    }
    Outcome {
        pass: mode_err <= 1e-12 && field_err <= 1e-12 && comp_err <= 1e-11,
        detail: format!(
            "single mode coefficient {mode_err:.1e}, field {field_err:.1e} (<= 1e-12), composition {comp_err:.1e} (<= 1e-11)"
        ),
    }
}

fn decay_rate() -> Outcome {
    let g = make_grid(1, 400.0, 2048).unwrap();
    let w: f64 = 1.0;
    let v0 = gaussian(&g, 1.0 / (w * TAU.sqrt()), w);
    let times: Vec<f64> = (0..40).map(|i| (5f64.ln() + (40f64.ln()) * i as f64 / 39.0).exp()).collect();
    let fit = |a: f64| {
        let y: Vec<f64> = times.iter().map(|&t| apply_semigroup(a, t, &v0).unwrap().max_abs().ln()).collect();
        let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
        ols(&x, &y)
    };
    let heat = fit(0.0);
    let heat_ok = (heat + 0.5).abs() <= 0.02;
    let stable = fit(0.5);
    let ok = (stable + 0.5).abs() <= 0.05;
    Outcome {
        pass: heat_ok && ok,
        detail: format!("heat {heat:.4} (-0.5 +- 0.02), A=0.5 {stable:.4} (-0.5 +- 0.05)"),
    }
}

fn threshold_nonexpansive() -> Outcome {
    let g = make_grid(1, 50.0, 512).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let v = random_field(&g, &mut rng);
        let base = lp_norm(&v, 2.0).unwrap();
        for t in [0.1, 1.0, 10.0] {
            worst = worst.max(lp_norm(&apply_semigroup(1.0, t, &v).unwrap(), 2.0).unwrap() - base);
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("max ||S_1 v||_2 - ||v||_2 = {worst:.1e} (<= 1e-12)"),
    }
}

fn growth_rate(a: f64, min_extent: f64, width: f64, horizon: f64, t_min: f64) -> (f64, f64) {
    let kstar = peak_wavenumber(a).unwrap();
    let g = make_grid(1, resonant_extent(kstar, min_extent), 1024).unwrap();
    let v0 = build_near_eigenmode(&g, a, 1e-4, width).unwrap();
    let cfg = SolverConfig {
        stop_above: Some(0.1 * a),
        ..SolverConfig::for_grid(&g, a, horizon)
    };
    let traj = evolve(&v0, &cfg).unwrap();
    let (t, y): (Vec<f64>, Vec<f64>) = traj
        .norm_series
        .iter()
        .filter(|r| r.time >= t_min && r.linf <= 0.1 * a)
        .map(|r| (r.time, r.l2.ln()))
        .unzip();
    let reference = (a.sqrt() - 1.0).powi(2);
    (ols(&t, &y), reference)
}

fn instability_rate() -> Outcome {
    let (r2, a2) = growth_rate(2.0, 300.0, 30.0, 150.0, 5.0);
    let (r4, a4) = growth_rate(4.0, 200.0, 20.0, 40.0, 2.0);
    let e2 = (r2 / a2 - 1.0).abs();
    let e4 = (r4 / a4 - 1.0).abs();
    Outcome {
        pass: e2 <= 0.05 && e4 <= 0.05,
        detail: format!("A=2 rate {r2:.5} vs {a2:.7} ({:.2}%), A=4 rate {r4:.5} vs {a4} ({:.2}%)", 100.0 * e2, 100.0 * e4),
    }
}

fn delta_independence() -> Outcome {
    let base = lab::preset(ExperimentKind::DeltaSweep);
    let report = lab::delta_sweep(2.0, &[1e-2, 1e-3, 1e-4, 1e-5], 0.05, &base).unwrap();
    let reached = report.checks.iter().find(|c| c.name == "all_reach_target").is_some_and(|c| c.pass);
    let slope = report.measured.get("escape_slope").copied().unwrap_or(f64::NAN);
    let reference = 1.0 / (f64::sqrt(2.0) - 1.0).powi(2);
    let err = (slope / reference - 1.0).abs();
    Outcome {
        pass: reached && err <= 0.1,
        detail: format!("all reached: {reached}, slope {slope:.4} vs 1/a = {reference:.4} ({:.2}%)", 100.0 * err),
    }
}

fn nonlinear_stability() -> Outcome {
    let g = make_grid(1, 200.0, 1024).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = g.center();
    let terms: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| (rng.random_range(-0.3..0.3), rng.random_range(-1.0..1.0), rng.random_range(0.0..TAU)))
        .collect();
    let v0 = RealField::from_fn(&g, |x| {
        let d = x[0] - c[0];
        let m: f64 = terms.iter().map(|(k, a, p)| a * (k * d + p).cos()).sum();
        0.05 * (-d * d / 18.0).exp() * (1.0 + 0.125 * m)
    });
    let stable = evolve(&v0, &SolverConfig::for_grid(&g, 0.5, 200.0)).unwrap();
    let late: Vec<f64> = stable.norm_series.iter().filter(|r| r.time >= 5.0).map(|r| r.linf).collect();
    let monotone = late.windows(2).all(|w| w[1] <= w[0]);
    let global = stable.status == RunStatus::Completed && detect_blowup(&stable) == BlowupStatus::Global;
    let control = evolve(&v0, &SolverConfig::for_grid(&g, 2.0, 30.0)).unwrap();
    let grows = control.final_field().max_abs() > 10.0 * v0.max_abs();
    Outcome {
        pass: monotone && global && grows,
        detail: format!(
            "A=0.5 sup {:.3e} -> {:.3e}, monotone after t=5: {monotone}, global: {global}; A=2 control sup -> {:.3e}",
            v0.max_abs(),
            stable.final_field().max_abs(),
            control.final_field().max_abs()
        ),
    }
}

fn picard_contraction() -> Outcome {
    let g = make_grid(1, 40.0, 256).unwrap();
    let v0 = gaussian(&g, 0.2, 2.0);
    let cfg = PicardConfig {
        background: 0.5,
        horizon: 0.1,
        substeps: 64,
        ..PicardConfig::default()
    };
    let result = picard_solve(&v0, &cfg).unwrap();
    let tail = result.ratios.iter().skip(1).copied().fold(0.0, f64::max);
    let etd = evolve(
        &v0,
        &SolverConfig {
            background: 0.5,
            dt: 0.1 / 400.0,
            horizon: 0.1,
            ..SolverConfig::default()
        },
    )
    .unwrap();
    let reference = etd.final_field();
    let rel = lp_norm(&reference.sub(&result.final_field).unwrap(), 2.0).unwrap() / lp_norm(reference, 2.0).unwrap();
    Outcome {
        pass: result.converged && tail <= 0.5 && rel <= 1e-4,
        detail: format!("max ratio from iterate 2 {tail:.2e} (<= 0.5), Picard vs ETD {rel:.1e} (<= 1e-4)"),
    }
}

fn positivity() -> Outcome {
    let g = make_grid(2, 20.0, 64).unwrap();
    let u0 = gaussian(&g, 1.0, 1.5);
    let traj = evolve(&u0, &SolverConfig::raw_for_grid(&g, u0.mean(), 5.0)).unwrap();
    let report = check_positivity(&traj, 1e-8);
    let floor = -1e-8 * u0.max_abs();
    let min = traj.norm_series.iter().map(|r| r.min).fold(f64::INFINITY, f64::min);
    Outcome {
        pass: min >= floor && report.pass,
        detail: format!("min u = {min:.3e} (>= {floor:.0e}) over {} steps", traj.norm_series.len()),
    }
}

fn formulation_consistency() -> Outcome {
    let g = make_grid(1, 100.0, 512).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let v0 = {
        let f = random_field(&g, &mut rng);
        let env = gaussian(&g, 0.05 / f.max_abs(), 6.0);
        f.mul(&env).unwrap()
    };
    let mut worst: f64 = 0.0;
    for a in [0.5, 2.0] {
        let dt = 0.25 * dt_max(&g, a + v0.mean());
        let pert = evolve(&v0, &SolverConfig { dt, ..SolverConfig::for_grid(&g, a, 20.0) }).unwrap();
        let raw_cfg = SolverConfig {
            dt,
            formulation: Formulation::Raw,
            ..SolverConfig::raw_for_grid(&g, a + v0.mean(), 20.0)
        };
        let raw = evolve(&v0.add_constant(a), &raw_cfg).unwrap();
        for (p, u) in pert.fields.iter().zip(&raw.fields) {
            worst = worst.max(u.add_constant(-a).sub(p).unwrap().max_abs() / p.max_abs());
        }
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("max relative |(u - A) - v| = {worst:.1e} (<= 1e-8)"),
    }
}

fn norms_suite() -> Outcome {
    let g1 = make_grid(1, 32.0, 256).unwrap();
    let g2 = make_grid(2, 8.0, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut sandwich = 0;
    for i in 0..200 {
        let g = if i % 4 == 3 { &g2 } else { &g1 };
        let f = random_field(g, &mut rng);
        if [1.0, 2.0, f64::INFINITY].iter().all(|&p| check_cube_ball_sandwich(&f, p).unwrap().pass) {
            sandwich += 1;
        }
    }
    let mut young = 0;
    let mut empirical: f64 = 0.0;
    let mut constant = 0.0;
    let mut heat = 0;
    let mut heat_ratio: f64 = 0.0;
    for _ in 0..50 {
        let f = random_field(&g1, &mut rng);
        let y = check_young_uloc(&f, 2.0, 2.0, 1.0).unwrap();
        constant = y.constant;
        empirical = empirical.max(y.empirical_constant);
        young += y.pass as usize;
        for t in [0.1, 1.0, 5.0] {
            let r = heat_uloc_spotcheck(&f, 2.0, 2.0, t).unwrap();
            heat_ratio = heat_ratio.max(r.ratio);
            heat += (r.ratio <= 1.0 + 1e-9) as usize;
        }
    }
    Outcome {
        pass: sandwich == 200 && young == 50 && (constant - 144.0f64).abs() < 1e-12 && heat == 150,
        detail: format!(
            "sandwich {sandwich}/200, Young {young}/50 (C = {constant}, empirical {empirical:.4}), heat {heat}/150 (max ratio {heat_ratio:.6})"
        ),
    }
}

fn kernel_bound() -> Outcome {
    let g = make_grid(1, 50.0, 512).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let v = random_field(&g, &mut rng);
        worst = worst.max(lp_norm(&neg_laplace_k_conv(&v), 2.0).unwrap() / lp_norm(&v, 2.0).unwrap());
    }
    let kmax = PI * 512.0 / 50.0;
    let mut ratios = Vec::new();
    for m in [64.0, 128.0, 192.0, 256.0] {
        let k = m * TAU / 50.0;
        let mode = RealField::from_fn(&g, |x| (k * x[0]).cos());
        ratios.push(lp_norm(&neg_laplace_k_conv(&mode), 2.0).unwrap() / lp_norm(&mode, 2.0).unwrap());
    }
    let gap = 1.0 - ratios[3];
    let eps = lattice_rate_tolerance(0.0, 50.0);
    let approach = ratios.windows(2).all(|w| w[1] > w[0]) && (gap - 1.0 / (1.0 + kmax * kmax)).abs() <= eps;
    Outcome {
        pass: worst <= 1.0 + 1e-12 && approach,
        detail: format!("max ratio {worst:.6} (<= 1), top-mode gap {gap:.3e} vs 1/(1+k_max^2) within {eps:.1e}"),
    }
}

fn mu_bound() -> Outcome {
    let g = make_grid(1, 512.0, 2048).unwrap();
    let times: Vec<f64> = (0..30).map(|i| 100f64.powf(i as f64 / 29.0)).collect();
    let samples = mu_l1_probe(&g, 0.5, &times).unwrap();
    let sup = samples.iter().map(|s| s.l1).fold(0.0, f64::max);
    let (x, y): (Vec<f64>, Vec<f64>) = samples.iter().filter(|s| s.t >= 10.0).map(|s| (s.t.ln(), s.l1)).unzip();
    let slope = ols(&x, &y);
    Outcome {
        pass: sup.is_finite() && slope <= 0.0 && !samples.iter().any(|s| s.warning),
        detail: format!("sup ||mu(t)||_1 = {sup:.6}, last-decade slope vs ln t {slope:.2e} (<= 0)"),
    }
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 13] = [
        ("spectral abscissa formula", 1.0, abscissa),
        ("semigroup exactness", 5.0, semigroup_exactness),
        ("stability decay rate", 30.0, decay_rate),
        ("A=1 non-expansiveness", 5.0, threshold_nonexpansive),
        ("nonlinear instability rate", 60.0, instability_rate),
        ("delta-independence of escape", 120.0, delta_independence),
        ("nonlinear stability", 30.0, nonlinear_stability),
        ("Picard contraction", 30.0, picard_contraction),
        ("positivity", 30.0, positivity),
        ("formulation consistency", 30.0, formulation_consistency),
        ("norms suite", 60.0, norms_suite),
        ("kernel bound", 5.0, kernel_bound),
        ("mu-kernel uniform bound", 30.0, mu_bound),
    ];
    let mut failures = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed().as_secs_f64();
        let pass = outcome.pass && elapsed < *budget;
        failures += (!pass) as usize;
        println!(
            "{} {:>2} {name}: {} [{elapsed:.2}s < {budget}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
