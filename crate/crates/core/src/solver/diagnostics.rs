//! Post-hoc classification of trajectories.

use serde::{Deserialize, Serialize};

use super::etd::{RunStatus, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub time: f64,
    pub position: [f64; 2],
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub tol: f64,
    /// `-tol * ||u0||_inf`.
    pub floor: f64,
    pub min_value: f64,
    pub min_time: f64,
    pub violations: Vec<Violation>,
    pub pass: bool,
}

/// Checks `min u >= -tol ||u0||_inf` at every recorded step. For a
/// perturbation trajectory the background is added back first.
pub fn check_positivity(traj: &Trajectory, tol: f64) -> PositivityReport {
    let grid = traj.grid().clone();
    let u0_sup = traj.fields[0].values().iter().map(|v| (v + traj.offset).abs()).fold(0.0, f64::max);
    let floor = -tol * u0_sup;
    let mut report = PositivityReport {
        tol,
        floor,
        min_value: f64::INFINITY,
        min_time: 0.0,
        violations: Vec::new(),
        pass: true,
    };
    for r in &traj.norm_series {
        let value = r.min + traj.offset;
        if value < report.min_value {
            report.min_value = value;
            report.min_time = r.time;
        }
        if value < floor {
            report.violations.push(Violation {
                time: r.time,
                position: grid.position(r.argmin),
                value,
            });
        }
    }
    report.pass = report.violations.is_empty();
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum BlowupStatus {
    Global,
    Blowup { time: f64 },
    Indeterminate,
}

/// Fraction of the run examined for late growth.
pub const TAIL_FRACTION: f64 = 0.2;

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mt, my) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (sxy, sxx) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mt) * (p.1 - my), b + (p.0 - mt).powi(2)));
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

/// Threshold crossings are blow-up; a run stopped early, or one whose
/// `ln ||u||_inf` is still rising without slowing over the last fifth of the
/// horizon, is indeterminate; everything else is global.
pub fn detect_blowup(traj: &Trajectory) -> BlowupStatus {
    match traj.status {
        RunStatus::Blowup { time } => return BlowupStatus::Blowup { time },
        RunStatus::Stopped { .. } => return BlowupStatus::Indeterminate,
        RunStatus::Completed => {}
    }
    let series = &traj.norm_series;
    let end = series.last().map_or(0.0, |r| r.time);
    let start = end * (1.0 - TAIL_FRACTION);
    let tail: Vec<(f64, f64)> = series
        .iter()
        .filter(|r| r.time >= start && r.linf > 0.0)
        .map(|r| (r.time, (r.linf + traj.offset.abs()).ln()))
        .collect();
    if tail.len() < 4 {
        return BlowupStatus::Global;
    }
    let (first, second) = tail.split_at(tail.len() / 2);
    let (s1, s2) = (slope(first), slope(second));
    if s2 > 0.0 && s2 >= 0.9 * s1 {
        BlowupStatus::Indeterminate
    } else {
        BlowupStatus::Global
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, RealField};
    use crate::linsemi::resonant_extent;
    use crate::solver::{evolve, SolverConfig};

    fn bump(g: &crate::grid::Grid, amplitude: f64, width: f64) -> RealField {
        let c = g.center();
        RealField::from_fn(g, |x| {
            let r2: f64 = (0..g.dim()).map(|a| (x[a] - c[a]).powi(2)).sum();
            amplitude * (-r2 / (2.0 * width * width)).exp()
        })
    }

    #[test]
    fn constant_keeps_its_minimum() {
        let g = make_grid(1, 20.0, 64).unwrap();
        let traj = evolve(&RealField::constant(&g, 0.7), &SolverConfig::raw_for_grid(&g, 0.7, 1.0)).unwrap();
        let r = check_positivity(&traj, 1e-8);
        assert!(r.pass);
        assert!((r.min_value - 0.7).abs() < 1e-12);
    }

    #[test]
    fn nonnegative_bump_stays_nonnegative() {
        let g = make_grid(2, 20.0, 64).unwrap();
        let u0 = bump(&g, 0.5, 1.5);
        let traj = evolve(&u0, &SolverConfig::raw_for_grid(&g, u0.mean(), 2.0)).unwrap();
        let r = check_positivity(&traj, 1e-8);
        assert!(r.pass, "{:?}", r.violations.first());
    }

    #[test]
    fn negative_dip_is_reported() {
        let g = make_grid(1, 20.0, 128).unwrap();
        let u0 = bump(&g, 1.0, 1.0).combine(1.0, &RealField::constant(&g, -0.01), 1.0).unwrap();
        let traj = evolve(&u0, &SolverConfig::raw_for_grid(&g, u0.mean(), 0.5)).unwrap();
        let r = check_positivity(&traj, 1e-8);
        assert!(!r.pass);
        let v = r.violations[0];
        assert_eq!(v.time, 0.0);
        assert!(v.value < 0.0);
    }

    #[test]
    fn small_stable_data_is_global() {
        let g = make_grid(1, 60.0, 256).unwrap();
        let traj = evolve(&bump(&g, 0.05, 2.0), &SolverConfig::for_grid(&g, 0.5, 50.0)).unwrap();
        assert_eq!(detect_blowup(&traj), BlowupStatus::Global);
    }

    #[test]
    fn run_ending_mid_growth_is_indeterminate() {
        let g = make_grid(1, resonant_extent(1.0, 60.0), 256).unwrap();
        let v0 = RealField::from_fn(&g, |x| 1e-8 * x[0].cos());
        let traj = evolve(&v0, &SolverConfig::for_grid(&g, 4.0, 5.0)).unwrap();
        assert_eq!(traj.status, RunStatus::Completed);
        assert_eq!(detect_blowup(&traj), BlowupStatus::Indeterminate);
    }

    #[test]
    fn concentrated_mass_blows_up() {
        // Mass 40 >> 8 pi in 2D.
        let g = make_grid(2, 10.0, 64).unwrap();
        let width: f64 = 0.5;
        let u0 = bump(&g, 40.0 / (2.0 * std::f64::consts::PI * width * width), width);
        let cfg = SolverConfig {
            blowup_threshold: Some(20.0 * u0.max_abs()),
            ..SolverConfig::raw_for_grid(&g, u0.mean(), 5.0)
        };
        let traj = evolve(&u0, &cfg).unwrap();
        match detect_blowup(&traj) {
            BlowupStatus::Blowup { time } => assert!(time > 0.0 && time < 5.0),
            other => panic!("{other:?}"),
        }
    }
}
