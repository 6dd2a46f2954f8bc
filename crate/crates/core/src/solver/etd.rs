//! Exponential time differencing for the perturbation and the raw equation.
//!
//! Both formulations are stepped as `w_t = c(k) w + N(w)` in Fourier space
//! with an exactly integrated linear symbol `c = -h_B`:
//!
//! * perturbation form (`w = v`, `B = A + mean(v0)`): `N(v)` is
//!   `-div(v grad K*v)` less the part linear in the conserved mean;
//! * raw form (`w = u`, `B = mean(u0)`): `N(u)` is the quadratic remainder of
//!   the drift about the conserved mean. With `B = 0` this is the plain heat
//!   propagator.
//!
//! The mean of the state is carried by the `k = 0` coefficient, on which both
//! `c` and `N` vanish identically, so it is conserved to rounding.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rhs::DriftOperator;
use super::SolverError;
use crate::grid::{forward_transform, inverse_transform, Grid, RealField, SpectralField};
use crate::linsemi::symbol_h;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Etd1,
    #[default]
    EtdRk2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Evolve `v = u - A`.
    #[default]
    Perturbation,
    /// Evolve `u` itself.
    Raw,
}

pub const DEFAULT_BLOWUP_FACTOR: f64 = 1e6;
pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Background constant `A` (perturbation form only).
    pub background: f64,
    pub dt: f64,
    pub horizon: f64,
    pub dealias: bool,
    pub scheme: Scheme,
    pub formulation: Formulation,
    pub positivity_tol: f64,
    /// Absolute sup-norm threshold; `None` means `blowup_factor * ||w0||_inf`.
    pub blowup_threshold: Option<f64>,
    pub blowup_factor: f64,
    /// Store every `save_stride`-th field; 0 picks about 50 snapshots.
    pub save_stride: usize,
    /// Stop (without flagging blow-up) once `||w||_inf` exceeds this value.
    pub stop_above: Option<f64>,
    /// Stop once `||w||_2` exceeds this value.
    pub stop_l2_above: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            background: 0.0,
            dt: 0.01,
            horizon: 1.0,
            dealias: true,
            scheme: Scheme::EtdRk2,
            formulation: Formulation::Perturbation,
            positivity_tol: DEFAULT_POSITIVITY_TOL,
            blowup_threshold: None,
            blowup_factor: DEFAULT_BLOWUP_FACTOR,
            save_stride: 0,
            stop_above: None,
            stop_l2_above: None,
        }
    }
}

/// Step-size bound `0.5 * min(1 / (max_k (-h_B)_+ + 1), dx^2)`.
pub fn dt_max(grid: &Grid, linear_background: f64) -> f64 {
    let growth = (0..grid.len())
        .map(|i| {
            let k = grid.wavevector(i);
            (-symbol_h(linear_background, k[0] * k[0] + k[1] * k[1])).max(0.0)
        })
        .fold(0.0, f64::max);
    let dx = grid.min_spacing();
    0.5 * (1.0 / (growth + 1.0)).min(dx * dx)
}

impl SolverConfig {
    /// Perturbation-form config at the default step `0.25 * dt_max`.
    pub fn for_grid(grid: &Grid, background: f64, horizon: f64) -> Self {
        SolverConfig {
            background,
            dt: 0.25 * dt_max(grid, background),
            horizon,
            ..Self::default()
        }
    }

    /// Raw-form config for initial data with mean `mean`.
    pub fn raw_for_grid(grid: &Grid, mean: f64, horizon: f64) -> Self {
        SolverConfig {
            background: 0.0,
            dt: 0.25 * dt_max(grid, mean),
            horizon,
            formulation: Formulation::Raw,
            ..Self::default()
        }
    }

    /// Lists every violated constraint for a run on `grid` whose linear
    /// symbol uses `linear_background`.
    pub fn violations(&self, grid: &Grid, linear_background: f64) -> Vec<String> {
        let mut v = Vec::new();
        if !self.background.is_finite() {
            v.push(format!("background {} must be finite", self.background));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            v.push(format!("horizon {} must be positive", self.horizon));
        }
        let bound = dt_max(grid, linear_background);
        if !(self.dt > 0.0) {
            v.push(format!("dt {} must be positive", self.dt));
        } else if self.dt > bound * (1.0 + 1e-12) {
            v.push(format!("dt {} exceeds the stability bound dt_max = {bound}", self.dt));
        }
        if !(self.positivity_tol >= 0.0) {
            v.push(format!("positivity_tol {} must be non-negative", self.positivity_tol));
        }
        if !(self.blowup_factor > 0.0) {
            v.push(format!("blowup_factor {} must be positive", self.blowup_factor));
        }
        if let Some(t) = self.blowup_threshold {
            if !(t > 0.0) {
                v.push(format!("blowup_threshold {t} must be positive"));
            }
        }
        v
    }

    fn linear_background(&self, w0: &RealField) -> f64 {
        match self.formulation {
            Formulation::Perturbation => self.background + w0.mean(),
            Formulation::Raw => w0.mean(),
        }
    }

    /// Constant added to the state to recover `u`.
    fn offset(&self) -> f64 {
        match self.formulation {
            Formulation::Perturbation => self.background,
            Formulation::Raw => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub time: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub min: f64,
    /// Flat node index of the minimum.
    pub argmin: usize,
    pub mean: f64,
}

impl NormRecord {
    pub fn of(time: f64, f: &RealField) -> Self {
        let cell = f.grid().cell_volume();
        let (mut l1, mut l2, mut linf, mut sum) = (0.0, 0.0, 0.0f64, 0.0);
        let (mut min, mut argmin) = (f64::INFINITY, 0);
        for (i, &v) in f.values().iter().enumerate() {
            l1 += v.abs();
            l2 += v * v;
            linf = linf.max(v.abs());
            sum += v;
            if v < min {
                min = v;
                argmin = i;
            }
        }
        NormRecord {
            time,
            l1: l1 * cell,
            l2: (l2 * cell).sqrt(),
            linf,
            min,
            argmin,
            mean: sum / f.values().len() as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// Sup-norm crossed the blow-up threshold (or a value went non-finite).
    Blowup { time: f64 },
    /// `stop_above` or `stop_l2_above` reached.
    Stopped { time: f64 },
}

/// Time series of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub formulation: Formulation,
    /// `A` for the perturbation form, 0 for the raw form.
    pub offset: f64,
    pub times: Vec<f64>,
    pub fields: Vec<RealField>,
    /// One record per step, including `t = 0`.
    pub norm_series: Vec<NormRecord>,
    pub status: RunStatus,
    pub blowup_threshold: f64,
}

impl Trajectory {
    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    pub fn final_field(&self) -> &RealField {
        self.fields.last().expect("trajectory stores the initial field")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory stores the initial time")
    }

    /// Series of `(time, record)` pairs at the saved snapshots.
    pub fn saved_records(&self) -> impl Iterator<Item = &NormRecord> {
        let times = &self.times;
        self.norm_series
            .iter()
            .filter(move |r| times.binary_search_by(|t| t.partial_cmp(&r.time).unwrap()).is_ok())
    }
}

/// Per-mode ETD weights for step `dt` and linear symbol `c`.
struct EtdWeights {
    decay: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
}

// (e^z - 1)/z and (e^z - 1 - z)/z^2, with Taylor series near 0.
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        z.exp_m1() / z
    }
}

fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z * z * z * z / 720.0
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

impl EtdWeights {
    fn new(symbol: &[f64], dt: f64) -> Self {
        let z: Vec<f64> = symbol.iter().map(|c| c * dt).collect();
        EtdWeights {
            decay: z.iter().map(|z| z.exp()).collect(),
            phi1: z.iter().map(|&z| dt * phi1(z)).collect(),
            phi2: z.iter().map(|&z| dt * phi2(z)).collect(),
        }
    }
}

struct Stepper {
    drift: DriftOperator,
    linear_background: f64,
    offset: f64,
    neg_laplace_k: Vec<f64>,
    weights: EtdWeights,
    scheme: Scheme,
}

impl Stepper {
    /// `N(w)`: everything except the exactly integrated linear part.
    fn nonlinear(&self, what: &SpectralField) -> SpectralField {
        let mut out = self.drift.quadratic_divergence(what);
        // Mean-field coefficient not absorbed into the linear symbol.
        let excess = self.offset + what.coefficients()[0].re - self.linear_background;
        for ((o, c), m) in out
            .coefficients_mut()
            .iter_mut()
            .zip(what.coefficients())
            .zip(&self.neg_laplace_k)
        {
            *o = -*o + c * (excess * m);
        }
        out
    }

    fn step(&self, what: &SpectralField) -> SpectralField {
        let w = &self.weights;
        let n0 = self.nonlinear(what);
        let mut a = what.clone();
        for (i, c) in a.coefficients_mut().iter_mut().enumerate() {
            *c = *c * w.decay[i] + n0.coefficients()[i] * w.phi1[i];
        }
        match self.scheme {
            Scheme::Etd1 => a,
            Scheme::EtdRk2 => {
                let n1 = self.nonlinear(&a);
                for (i, c) in a.coefficients_mut().iter_mut().enumerate() {
                    let dn: Complex64 = n1.coefficients()[i] - n0.coefficients()[i];
                    *c += dn * w.phi2[i];
                }
                a
            }
        }
    }
}

/// Integrates from `w0` (a perturbation `v0` or the raw density `u0`
/// depending on `config.formulation`) up to `config.horizon`.
pub fn evolve(w0: &RealField, config: &SolverConfig) -> Result<Trajectory, SolverError> {
    let grid = w0.grid().clone();
    let linear_background = config.linear_background(w0);
    let problems = config.violations(&grid, linear_background);
    if !problems.is_empty() {
        return Err(SolverError::InvalidConfig(problems));
    }
    if !w0.is_finite() {
        return Err(SolverError::InvalidConfig(vec!["initial field is not finite".into()]));
    }
    let symbol: Vec<f64> = grid.radial_table(|k2| -symbol_h(linear_background, k2));
    let drift = DriftOperator::new(&grid, config.dealias);
    let stepper = Stepper {
        neg_laplace_k: drift.neg_laplace_k().to_vec(),
        drift,
        linear_background,
        offset: config.offset(),
        weights: EtdWeights::new(&symbol, config.dt),
        scheme: config.scheme,
    };

    let steps = (config.horizon / config.dt).round().max(1.0) as usize;
    let save_stride = if config.save_stride == 0 {
        (steps / 50).max(1)
    } else {
        config.save_stride
    };
    let threshold = config
        .blowup_threshold
        .unwrap_or(config.blowup_factor * w0.max_abs());

    let mut traj = Trajectory {
        formulation: config.formulation,
        offset: config.offset(),
        times: vec![0.0],
        fields: vec![w0.clone()],
        norm_series: vec![NormRecord::of(0.0, w0)],
        status: RunStatus::Completed,
        blowup_threshold: threshold,
    };
    let mut what = forward_transform(w0);
    for n in 1..=steps {
        let t = n as f64 * config.dt;
        what = stepper.step(&what);
        let w = inverse_transform(&what);
        if !w.is_finite() {
            traj.status = RunStatus::Blowup { time: t };
            break;
        }
        let record = NormRecord::of(t, &w);
        traj.norm_series.push(record);
        let blown = record.linf > threshold;
        let stopped = config.stop_above.is_some_and(|s| record.linf > s)
            || config.stop_l2_above.is_some_and(|s| record.l2 > s);
        if n % save_stride == 0 || n == steps || blown || stopped {
            traj.times.push(t);
            traj.fields.push(w);
        }
        if blown {
            traj.status = RunStatus::Blowup { time: t };
            break;
        }
        if stopped {
            traj.status = RunStatus::Stopped { time: t };
            break;
        }
    }
    Ok(traj)
}
