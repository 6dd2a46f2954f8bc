//! Picard iteration for the mild (Duhamel) form of the perturbation equation
//!
//! ```text
//! v(t) = S_A(t) v0 - int_0^t S_A(t - s) div(v grad K*v)(s) ds
//! ```
//!
//! The integral is a composite trapezoid on `M` equal substeps. On a lattice
//! the multiplier `i k e^{-(t-s) h}` is bounded, so no singular quadrature is
//! needed.

use serde::{Deserialize, Serialize};

use super::etd::NormRecord;
use super::rhs::DriftOperator;
use super::SolverError;
use crate::grid::{forward_transform, inverse_transform, RealField, SpectralField};
use crate::linsemi::SemigroupSymbol;
use crate::norms::lp_norm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardConfig {
    pub background: f64,
    pub horizon: f64,
    pub substeps: usize,
    pub max_iter: usize,
    /// Stop once successive iterates differ by less than `tol * ||v^0||`.
    pub tol: f64,
    /// Exponent of the spatial norm in the sup-in-time distance.
    pub p: f64,
    pub dealias: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            background: 0.0,
            horizon: 0.1,
            substeps: 64,
            max_iter: 30,
            tol: 1e-12,
            p: 2.0,
            dealias: true,
        }
    }
}

impl PicardConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !self.background.is_finite() {
            v.push(format!("background {} must be finite", self.background));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            v.push(format!("horizon {} must be positive", self.horizon));
        }
        if self.substeps == 0 {
            v.push("substeps must be at least 1".into());
        }
        if self.max_iter == 0 {
            v.push("max_iter must be at least 1".into());
        }
        if !(self.tol >= 0.0) {
            v.push(format!("tol {} must be non-negative", self.tol));
        }
        if !(self.p >= 1.0) {
            v.push(format!("p {} must be at least 1", self.p));
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct PicardResult {
    /// Quadrature nodes `0, T/M, ..., T`.
    pub times: Vec<f64>,
    /// `v^m(T)` for every iterate computed, starting with `S_A(T) v0`.
    pub iterates: Vec<RealField>,
    /// `sup_t ||v^{m+1}(t) - v^m(t)||_p`.
    pub distances: Vec<f64>,
    /// `distances[m + 1] / distances[m]`.
    pub ratios: Vec<f64>,
    /// No ratio reached 1 and every iterate stayed finite.
    pub contracting: bool,
    pub converged: bool,
    pub final_field: RealField,
    /// Norms of the last iterate at the quadrature nodes.
    pub final_series: Vec<NormRecord>,
}

impl PicardResult {
    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios.iter().copied().reduce(f64::max)
    }
}

// Distances beyond this are treated as divergence.
const DIVERGENCE_LIMIT: f64 = 1e12;

pub fn picard_solve(v0: &RealField, config: &PicardConfig) -> Result<PicardResult, SolverError> {
    let problems = config.violations();
    if !problems.is_empty() {
        return Err(SolverError::InvalidConfig(problems));
    }
    if !v0.is_finite() {
        return Err(SolverError::InvalidConfig(vec!["initial field is not finite".into()]));
    }
    let grid = v0.grid().clone();
    let m = config.substeps;
    let step = config.horizon / m as f64;
    let times: Vec<f64> = (0..=m).map(|i| i as f64 * step).collect();
    let symbol = SemigroupSymbol::new(&grid, config.background);
    // powers[n] = e^{-n step h}
    let powers: Vec<Vec<f64>> = (0..=m).map(|n| symbol.propagator(n as f64 * step)).collect();
    let drift = DriftOperator::new(&grid, config.dealias);

    let v0hat = forward_transform(v0);
    let free: Vec<SpectralField> = powers.iter().map(|e| v0hat.multiply(e)).collect();
    let to_phys = |path: &[SpectralField]| -> Vec<RealField> { path.iter().map(inverse_transform).collect() };

    let mut path = free.clone();
    let mut phys = to_phys(&path);
    let scale = phys
        .iter()
        .map(|f| lp_norm(f, config.p))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut iterates = vec![phys[m].clone()];
    let mut distances = Vec::new();
    let mut converged = false;
    let mut finite = true;

    for _ in 0..config.max_iter {
        let forcing: Vec<SpectralField> = path.iter().map(|v| drift.drift_divergence(v)).collect();
        let mut next = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let mut acc = free[i].clone();
            for j in 0..=i {
                if i == 0 {
                    break;
                }
                let w = if j == 0 || j == i { 0.5 * step } else { step };
                let e = &powers[i - j];
                for ((a, d), ek) in acc.coefficients_mut().iter_mut().zip(forcing[j].coefficients()).zip(e) {
                    *a -= *d * (w * ek);
                }
            }
            next.push(acc);
        }
        let next_phys = to_phys(&next);
        let mut dist: f64 = 0.0;
        for (a, b) in next_phys.iter().zip(&phys) {
            dist = dist.max(lp_norm(&a.sub(b)?, config.p)?);
        }
        iterates.push(next_phys[m].clone());
        distances.push(dist);
        path = next;
        phys = next_phys;
        if !dist.is_finite() || dist > DIVERGENCE_LIMIT * scale.max(1.0) {
            finite = false;
            break;
        }
        if dist <= config.tol * scale {
            converged = true;
            break;
        }
    }
    let ratios: Vec<f64> = distances
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    let contracting = finite && ratios.iter().all(|&r| r < 1.0);
    let final_series = times.iter().zip(&phys).map(|(&t, f)| NormRecord::of(t, f)).collect();
    Ok(PicardResult {
        times,
        final_field: phys[m].clone(),
        iterates,
        distances,
        ratios,
        contracting,
        converged,
        final_series,
    })
}
