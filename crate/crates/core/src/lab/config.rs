//! Experiment configuration, loadable from TOML.

use std::fmt;
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LabError;
use crate::grid::{Grid, MIN_POINTS};
use crate::linsemi::{peak_wavenumber, resonant_extent};
use crate::norms::{NormSpec, WindowShape};
use crate::solver::{dt_max, Formulation, Scheme, SolverConfig, DEFAULT_BLOWUP_FACTOR, DEFAULT_POSITIVITY_TOL};

/// A Lebesgue exponent in `[1, inf]`; `inf` is written as the string `"inf"`
/// in JSON and as the float `inf` in TOML.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E>(self, v: f64) -> Result<Exponent, E> {
                Ok(Exponent(v))
            }
            fn visit_i64<E>(self, v: i64) -> Result<Exponent, E> {
                Ok(Exponent(v as f64))
            }
            fn visit_u64<E>(self, v: u64) -> Result<Exponent, E> {
                Ok(Exponent(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exponent, E> {
                match v {
                    "inf" | "infinity" => Ok(Exponent(f64::INFINITY)),
                    _ => v.parse().map(Exponent).map_err(|_| E::custom(format!("bad exponent {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Dispersion,
    Evolve,
    Decay,
    Growth,
    DeltaSweep,
    Picard,
    Positivity,
    NormsSuite,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Dispersion => "dispersion",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Decay => "decay",
            ExperimentKind::Growth => "growth",
            ExperimentKind::DeltaSweep => "delta_sweep",
            ExperimentKind::Picard => "picard",
            ExperimentKind::Positivity => "positivity",
            ExperimentKind::NormsSuite => "norms_suite",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub points: usize,
    #[serde(default)]
    pub extent: Option<f64>,
    /// Use the smallest side `>= resonant_min_extent` that puts the peak
    /// wavenumber `k*` on the lattice (needs `A > 1`).
    pub resonant_min_extent: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            dim: 1,
            points: 1024,
            extent: Some(200.0),
            resonant_min_extent: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `amplitude exp(-|x - center|^2 / (2 width^2))`; `mass` overrides the
    /// amplitude with the value giving that integral.
    Gaussian {
        #[serde(default)]
        center: Option<Vec<f64>>,
        width: f64,
        #[serde(default)]
        amplitude: Option<f64>,
        #[serde(default)]
        mass: Option<f64>,
    },
    /// Mean-free Gaussian-envelope plane wave `cos(k (x_0 - c_0))`; `k`
    /// defaults to the most unstable wavenumber.
    Packet {
        #[serde(default)]
        k: Option<f64>,
        width: f64,
        amplitude: f64,
    },
    /// Periodic train of Gaussian bumps along every axis.
    Comb { period: f64, width: f64, amplitude: f64 },
    Constant { value: f64 },
    /// Seeded smooth localized field: a Gaussian envelope modulated by a few
    /// random low-frequency cosines.
    Random {
        amplitude: f64,
        width: f64,
        #[serde(default = "default_modes")]
        modes: usize,
    },
    Zero,
}

fn default_modes() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    /// Explicit step; otherwise `dt_fraction * dt_max`.
    pub dt: Option<f64>,
    pub dt_fraction: f64,
    pub horizon: f64,
    pub scheme: Scheme,
    pub dealias: bool,
    pub formulation: Formulation,
    pub positivity_tol: f64,
    pub blowup_factor: f64,
    pub blowup_threshold: Option<f64>,
    pub save_stride: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            dt: None,
            dt_fraction: 0.25,
            horizon: 10.0,
            scheme: Scheme::EtdRk2,
            dealias: true,
            formulation: Formulation::Perturbation,
            positivity_tol: DEFAULT_POSITIVITY_TOL,
            blowup_factor: DEFAULT_BLOWUP_FACTOR,
            blowup_threshold: None,
            save_stride: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSpec {
    pub t_min: f64,
    pub t_max: Option<f64>,
    /// Number of log-spaced probe times where the run samples them itself.
    pub samples: usize,
    /// Acceptance tolerance; each kind has its own default.
    pub tolerance: Option<f64>,
}

impl Default for FitSpec {
    fn default() -> Self {
        FitSpec {
            t_min: 0.0,
            t_max: None,
            samples: 40,
            tolerance: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayPair {
    /// Exponent of the measured norm.
    pub p: Exponent,
    /// Exponent of the data norm.
    pub q: Exponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySpec {
    /// Pair whose fitted exponent is checked against the reference.
    pub primary: DecayPair,
    /// Further pairs, fitted and reported only.
    pub pairs: Vec<DecayPair>,
    /// Run the same probe at `A = 0` first.
    pub heat_control: bool,
    pub heat_tolerance: f64,
    /// Also fit `|grad S_A(t) v0|`.
    pub gradient: bool,
    /// Probe `||mu_A(t)||_1` over `[mu_t_min, mu_t_max]` (needs `0 <= A < 1`).
    pub mu: bool,
    pub mu_t_min: f64,
    pub mu_t_max: f64,
    pub mu_samples: usize,
}

impl Default for DecaySpec {
    fn default() -> Self {
        let pair = |p: f64, q: f64| DecayPair {
            p: Exponent(p),
            q: Exponent(q),
        };
        DecaySpec {
            primary: pair(f64::INFINITY, 1.0),
            pairs: vec![pair(1.0, 1.0), pair(2.0, 1.0), pair(2.0, 2.0), pair(f64::INFINITY, 2.0)],
            heat_control: true,
            heat_tolerance: 0.02,
            gradient: false,
            mu: false,
            mu_t_min: 1.0,
            mu_t_max: 100.0,
            mu_samples: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthSpec {
    /// The fit window ends once `||v||_inf > stop_fraction * A`.
    pub stop_fraction: f64,
}

impl Default for GrowthSpec {
    fn default() -> Self {
        GrowthSpec { stop_fraction: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub deltas: Vec<f64>,
    /// `||v||_2` to reach.
    pub target: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            deltas: vec![1e-2, 1e-3, 1e-4, 1e-5],
            target: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardSpec {
    pub substeps: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub p: Exponent,
    /// Bound on successive-iterate ratios from the second ratio on.
    pub contraction_limit: f64,
    /// Relative `L^2` agreement with the ETD run at `t = T`.
    pub agreement: f64,
    /// ETD steps used for the comparison run.
    pub etd_steps: usize,
}

impl Default for PicardSpec {
    fn default() -> Self {
        PicardSpec {
            substeps: 64,
            max_iter: 30,
            tol: 1e-12,
            p: Exponent(2.0),
            contraction_limit: 0.5,
            agreement: 1e-4,
            etd_steps: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsSuiteSpec {
    pub samples: usize,
    pub sandwich_p: Vec<Exponent>,
    pub young_p: Exponent,
    pub young_q: Exponent,
    pub young_r: Exponent,
    pub heat_p: Exponent,
    pub heat_times: Vec<f64>,
}

impl Default for NormsSuiteSpec {
    fn default() -> Self {
        NormsSuiteSpec {
            samples: 200,
            sandwich_p: vec![Exponent(1.0), Exponent(2.0), Exponent(f64::INFINITY)],
            young_p: Exponent(2.0),
            young_q: Exponent(2.0),
            young_r: Exponent(1.0),
            heat_p: Exponent(2.0),
            heat_times: vec![0.1, 0.5, 1.0, 2.0, 5.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSpec {
    /// Also run the other formulation and compare pointwise.
    pub compare_formulations: bool,
    pub consistency_tol: f64,
}

impl Default for EvolveSpec {
    fn default() -> Self {
        EvolveSpec {
            compare_formulations: false,
            consistency_tol: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UlocSpec {
    pub p: Exponent,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "ball")]
    pub shape: WindowShape,
    #[serde(default = "stride_one")]
    pub stride: usize,
}

fn one() -> f64 {
    1.0
}
fn ball() -> WindowShape {
    WindowShape::Ball
}
fn stride_one() -> usize {
    1
}

impl UlocSpec {
    pub fn norm_spec(&self) -> NormSpec {
        NormSpec {
            p: self.p.0,
            window_radius: self.radius,
            window_shape: self.shape,
            stride: self.stride,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Background constant `A`.
    pub background: f64,
    pub grid: GridSpec,
    pub initial: InitialData,
    pub solver: SolverSpec,
    pub fit: FitSpec,
    /// Adds a `uloc_p` column to the series.
    pub uloc: Option<UlocSpec>,
    pub evolve: EvolveSpec,
    pub decay: DecaySpec,
    pub growth: GrowthSpec,
    pub sweep: SweepSpec,
    pub picard: PicardSpec,
    pub norms: NormsSuiteSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            kind: ExperimentKind::Evolve,
            seed: 0,
            background: 0.5,
            grid: GridSpec::default(),
            initial: InitialData::Gaussian {
                center: None,
                width: 2.0,
                amplitude: Some(0.1),
                mass: None,
            },
            solver: SolverSpec::default(),
            fit: FitSpec::default(),
            uloc: None,
            evolve: EvolveSpec::default(),
            decay: DecaySpec::default(),
            growth: GrowthSpec::default(),
            sweep: SweepSpec::default(),
            picard: PicardSpec::default(),
            norms: NormsSuiteSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, LabError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(path.display().to_string(), e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Box side after resolving `resonant_min_extent`.
    pub fn resolved_extent(&self) -> Result<f64, String> {
        match (self.grid.resonant_min_extent, self.grid.extent) {
            (Some(_), Some(_)) => Err("grid.extent and grid.resonant_min_extent are mutually exclusive".into()),
            (Some(min), None) => {
                let k = peak_wavenumber(self.background).map_err(|e| format!("grid.resonant_min_extent: {e}"))?;
                Ok(resonant_extent(k, min))
            }
            (None, Some(l)) => Ok(l),
            (None, None) => Err("grid.extent or grid.resonant_min_extent is required".into()),
        }
    }

    pub fn build_grid(&self) -> Result<Grid, LabError> {
        let extent = self.resolved_extent().map_err(|e| LabError::Invalid(vec![e]))?;
        let extents = vec![extent; self.grid.dim];
        let points = vec![self.grid.points; self.grid.dim];
        Ok(Grid::new(&extents, &points)?)
    }

    /// Linear background entering the stability bound of the main run.
    fn linear_background(&self) -> f64 {
        match self.kind {
            ExperimentKind::Positivity => 0.0,
            _ => self.background,
        }
    }

    /// Solver settings for the main run on `grid`; `mean` is the mean of the
    /// evolved variable.
    pub fn solver_config(&self, grid: &Grid, formulation: Formulation, mean: f64) -> SolverConfig {
        let linear = match formulation {
            Formulation::Perturbation => self.background + mean,
            Formulation::Raw => mean,
        };
        let dt = self
            .solver
            .dt
            .unwrap_or_else(|| self.solver.dt_fraction * dt_max(grid, linear));
        SolverConfig {
            background: match formulation {
                Formulation::Perturbation => self.background,
                Formulation::Raw => 0.0,
            },
            dt,
            horizon: self.solver.horizon,
            dealias: self.solver.dealias,
            scheme: self.solver.scheme,
            formulation,
            positivity_tol: self.solver.positivity_tol,
            blowup_threshold: self.solver.blowup_threshold,
            blowup_factor: self.solver.blowup_factor,
            save_stride: self.solver.save_stride,
            stop_above: None,
            stop_l2_above: None,
        }
    }

    /// Every violated precondition; empty means the config can run.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let a = self.background;
        if !a.is_finite() {
            v.push(format!("background {a} must be finite"));
        }
        if !(1..=2).contains(&self.grid.dim) {
            v.push(format!("grid.dim {} must be 1 or 2", self.grid.dim));
        }
        if self.grid.points < MIN_POINTS || self.grid.points % 2 != 0 {
            v.push(format!("grid.points {} must be even and at least {MIN_POINTS}", self.grid.points));
        }
        let extent = match self.resolved_extent() {
            Ok(l) if l > 0.0 && l.is_finite() => Some(l),
            Ok(l) => {
                v.push(format!("grid extent {l} must be positive"));
                None
            }
            Err(e) => {
                v.push(e);
                None
            }
        };
        v.extend(self.validate_initial(extent));
        let solver = &self.solver;
        if !(solver.horizon > 0.0 && solver.horizon.is_finite()) {
            v.push(format!("solver.horizon {} must be positive", solver.horizon));
        }
        if !(solver.dt_fraction > 0.0 && solver.dt_fraction <= 1.0) {
            v.push(format!("solver.dt_fraction {} must lie in (0, 1]", solver.dt_fraction));
        }
        if let Some(dt) = solver.dt {
            if !(dt > 0.0) {
                v.push(format!("solver.dt {dt} must be positive"));
            } else if v.is_empty() {
                if let Ok(grid) = self.build_grid() {
                    let bound = dt_max(&grid, self.linear_background());
                    if dt > bound * (1.0 + 1e-12) {
                        v.push(format!("solver.dt {dt} exceeds the stability bound dt_max = {bound}"));
                    }
                }
            }
        }
        if !(solver.positivity_tol >= 0.0) {
            v.push(format!("solver.positivity_tol {} must be non-negative", solver.positivity_tol));
        }
        if !(solver.blowup_factor > 0.0) {
            v.push(format!("solver.blowup_factor {} must be positive", solver.blowup_factor));
        }
        if let Some(u) = &self.uloc {
            if !(u.p.0 >= 1.0) {
                v.push(format!("uloc.p {} must be at least 1", u.p.0));
            }
            if let Some(l) = extent {
                if !(u.radius > 0.0 && u.radius < l / 4.0) {
                    v.push(format!("uloc.radius {} must lie in (0, L/4)", u.radius));
                }
            }
            if u.stride == 0 {
                v.push("uloc.stride must be at least 1".into());
            }
        }
        if !(self.fit.t_min >= 0.0) {
            v.push(format!("fit.t_min {} must be non-negative", self.fit.t_min));
        }
        if let Some(t_max) = self.fit.t_max {
            if !(t_max > self.fit.t_min) {
                v.push(format!("fit.t_max {t_max} must exceed fit.t_min {}", self.fit.t_min));
            }
        }
        v.extend(self.validate_kind(extent));
        v
    }

    fn validate_initial(&self, extent: Option<f64>) -> Vec<String> {
        let mut v = Vec::new();
        let positive = |name: &str, x: f64, v: &mut Vec<String>| {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("initial.{name} {x} must be positive"));
            }
        };
        let finite = |name: &str, x: f64, v: &mut Vec<String>| {
            if !x.is_finite() {
                v.push(format!("initial.{name} {x} must be finite"));
            }
        };
        match &self.initial {
            InitialData::Gaussian {
                center,
                width,
                amplitude,
                mass,
            } => {
                positive("width", *width, &mut v);
                match (amplitude, mass) {
                    (Some(a), None) => finite("amplitude", *a, &mut v),
                    (None, Some(m)) => finite("mass", *m, &mut v),
                    _ => v.push("initial: give exactly one of amplitude and mass".into()),
                }
                if let Some(c) = center {
                    if c.len() != self.grid.dim {
                        v.push(format!("initial.center has {} entries, grid.dim is {}", c.len(), self.grid.dim));
                    }
                }
            }
            InitialData::Packet { k, width, amplitude } => {
                positive("width", *width, &mut v);
                finite("amplitude", *amplitude, &mut v);
                match k {
                    Some(k) => positive("k", *k, &mut v),
                    None => {
                        if let Err(e) = peak_wavenumber(self.background) {
                            v.push(format!("initial.k defaults to k*: {e}"));
                        } else if let Some(l) = extent {
                            let kstar = peak_wavenumber(self.background).unwrap_or(1.0);
                            if !(10.0 * width <= l && *width >= 5.0 / kstar) {
                                v.push(format!(
                                    "initial.width {width} must satisfy 5/k* = {} <= width <= L/10 = {}",
                                    5.0 / kstar,
                                    l / 10.0
                                ));
                            }
                        }
                    }
                }
            }
            InitialData::Comb {
                period,
                width,
                amplitude,
            } => {
                positive("period", *period, &mut v);
                positive("width", *width, &mut v);
                finite("amplitude", *amplitude, &mut v);
            }
            InitialData::Constant { value } => finite("value", *value, &mut v),
            InitialData::Random { amplitude, width, modes } => {
                finite("amplitude", *amplitude, &mut v);
                positive("width", *width, &mut v);
                if *modes == 0 {
                    v.push("initial.modes must be at least 1".into());
                }
            }
            InitialData::Zero => {}
        }
        v
    }

    fn validate_kind(&self, extent: Option<f64>) -> Vec<String> {
        let mut v = Vec::new();
        let a = self.background;
        match self.kind {
            ExperimentKind::Growth => {
                if !(a > 1.0) {
                    v.push(format!("growth needs A > 1, got {a}"));
                }
                let f = self.growth.stop_fraction;
                if !(f > 0.0 && f <= 1.0) {
                    v.push(format!("growth.stop_fraction {f} must lie in (0, 1]"));
                }
            }
            ExperimentKind::DeltaSweep => {
                let d = &self.sweep.deltas;
                if d.len() < 2 || d.iter().any(|x| !(*x > 0.0)) {
                    v.push("sweep.deltas needs at least two positive values".into());
                } else {
                    let hi = d.iter().copied().fold(0.0, f64::max);
                    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
                    if hi / lo < 100.0 * (1.0 - 1e-12) {
                        v.push(format!("sweep.deltas span {:.2} decades, need at least 2", (hi / lo).log10()));
                    }
                    if self.sweep.target <= hi {
                        v.push(format!("sweep.target {} must exceed every delta", self.sweep.target));
                    }
                }
                if !(self.sweep.target > 0.0) {
                    v.push(format!("sweep.target {} must be positive", self.sweep.target));
                } else if a > 1.0 && self.sweep.target > 0.1 * a {
                    v.push(format!("sweep.target {} exceeds the weakly nonlinear range 0.1 A = {}", self.sweep.target, 0.1 * a));
                }
                if a > 1.0 && !matches!(self.initial, InitialData::Packet { .. }) {
                    v.push("delta_sweep seeds a packet; set initial.type = \"packet\"".into());
                }
            }
            ExperimentKind::Decay => {
                if !(0.0..1.0).contains(&a) {
                    v.push(format!("decay needs 0 <= A < 1, got {a}"));
                }
                let exps = std::iter::once(self.decay.primary).chain(self.decay.pairs.iter().copied());
                for pair in exps {
                    if !(pair.q.0 >= 1.0 && pair.q.0 <= pair.p.0) {
                        v.push(format!("decay pair (p={}, q={}) needs 1 <= q <= p", pair.p.0, pair.q.0));
                    }
                }
                if self.fit.samples < 2 {
                    v.push("fit.samples must be at least 2".into());
                }
                if !(self.fit.t_min > 0.0) {
                    v.push("decay needs fit.t_min > 0".into());
                }
                if self.decay.mu && !(self.decay.mu_t_min >= 1.0 && self.decay.mu_t_max > self.decay.mu_t_min) {
                    v.push("decay.mu needs 1 <= mu_t_min < mu_t_max".into());
                }
            }
            ExperimentKind::Picard => {
                if self.picard.substeps == 0 || self.picard.max_iter == 0 || self.picard.etd_steps == 0 {
                    v.push("picard.substeps, max_iter and etd_steps must be positive".into());
                }
                if !(self.picard.p.0 >= 1.0) {
                    v.push(format!("picard.p {} must be at least 1", self.picard.p.0));
                }
            }
            ExperimentKind::NormsSuite => {
                if let Some(l) = extent {
                    if (l - l.round()).abs() > 1e-9 * l.max(1.0) || l.round() < 5.0 {
                        v.push(format!("norms_suite needs an integer extent of at least 5, got {l}"));
                    }
                }
                if self.norms.samples == 0 {
                    v.push("norms.samples must be at least 1".into());
                }
                if self.norms.heat_times.iter().any(|t| !(*t > 0.0)) {
                    v.push("norms.heat_times must be positive".into());
                }
            }
            ExperimentKind::Positivity => {
                if self.solver.formulation != Formulation::Raw {
                    v.push("positivity runs the raw formulation; set solver.formulation = \"raw\"".into());
                }
            }
            ExperimentKind::Dispersion | ExperimentKind::Evolve => {}
        }
        v
    }
}
