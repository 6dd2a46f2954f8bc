//! Lebesgue and uniformly local Lebesgue norms on periodic grids.
//!
//! The uniformly local norm
//!
//! ```text
//! ||f||_{uloc p} = sup_x ( int_{W_rho(x)} |f(y)|^p dy )^(1/p)
//! ```
//!
//! is evaluated with window centres on grid nodes (every `stride`-th node per
//! axis) and windows discretised by node membership: a node belongs to the
//! window when its minimum-image distance to the centre is at most `rho`. A
//! coarse stride can only underestimate the sup.
//!
//! Besides the norms themselves this module carries numeric checks of three
//! inequalities from the local existence theory: the ball/cube equivalence,
//! the Young-type bound for `grad K *`, and uloc contractivity of the heat
//! semigroup.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{forward_transform, inverse_transform, RealField};
use crate::kernels::{bessel_gradient_norm_1d, grad_k_conv};

const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("exponent p = {0} must satisfy p >= 1")]
    InvalidExponent(f64),
    #[error("window radius {radius} must be positive and below extent/4 = {limit}")]
    WindowTooLarge { radius: f64, limit: f64 },
    #[error("window stride must be at least 1")]
    InvalidStride,
    #[error("box extent {0} is not an integer; the unit-cube mesh cannot tile it")]
    NonIntegerExtent(f64),
    #[error("exponents p={p}, q={q}, r={r} violate 1 + 1/p = 1/q + 1/r with 1 <= q <= p, r >= 1")]
    ExponentRelation { p: f64, q: f64, r: f64 },
    #[error("this check is only available in {expected}D, got {got}D")]
    UnsupportedDimension { expected: usize, got: usize },
    #[error("time {0} must be positive")]
    NonPositiveTime(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowShape {
    Ball,
    Cube,
}

/// Exponent and window geometry of a uniformly local norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    /// `f64::INFINITY` selects the max norm.
    pub p: f64,
    pub window_radius: f64,
    pub window_shape: WindowShape,
    pub stride: usize,
}

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec {
            p: 2.0,
            window_radius: 1.0,
            window_shape: WindowShape::Ball,
            stride: 1,
        }
    }
}

impl NormSpec {
    pub fn with_p(p: f64) -> Self {
        NormSpec { p, ..Self::default() }
    }
}

fn check_exponent(p: f64) -> Result<(), NormError> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(NormError::InvalidExponent(p))
    }
}

/// `(sum |f|^p dV)^(1/p)`, or `max |f|` for `p = inf`.
pub fn lp_norm(f: &RealField, p: f64) -> Result<f64, NormError> {
    check_exponent(p)?;
    Ok(lp_of_values(f.values().iter().copied(), p, f.grid().cell_volume()))
}

fn lp_of_values(values: impl Iterator<Item = f64>, p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        values.map(f64::abs).sum::<f64>() * cell
    } else if p == 2.0 {
        (values.map(|v| v * v).sum::<f64>() * cell).sqrt()
    } else {
        (values.map(|v| v.abs().powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }
}

/// Integer node offsets making up a window of the given shape and radius.
fn window_offsets(f: &RealField, radius: f64, shape: WindowShape) -> Vec<[i64; 2]> {
    let g = f.grid();
    let dim = g.dim();
    let reach: Vec<i64> = (0..dim)
        .map(|a| (radius / g.spacing(a) * (1.0 + MEMBERSHIP_TOL)).floor() as i64)
        .collect();
    let r1 = if dim == 2 { reach[1] } else { 0 };
    let limit = radius * (1.0 + MEMBERSHIP_TOL);
    let mut out = Vec::new();
    for d0 in -reach[0]..=reach[0] {
        for d1 in -r1..=r1 {
            let y0 = d0 as f64 * g.spacing(0);
            let y1 = if dim == 2 { d1 as f64 * g.spacing(1) } else { 0.0 };
            let inside = match shape {
                WindowShape::Ball => (y0 * y0 + y1 * y1).sqrt() <= limit,
                WindowShape::Cube => y0.abs().max(y1.abs()) <= limit,
            };
            if inside {
                out.push([d0, d1]);
            }
        }
    }
    out
}

/// Local `L^p` norm of every window whose centre lies on the stride lattice.
pub fn window_norms(f: &RealField, spec: &NormSpec) -> Result<Vec<f64>, NormError> {
    check_exponent(spec.p)?;
    let g = f.grid();
    if spec.stride == 0 {
        return Err(NormError::InvalidStride);
    }
    let limit = g.min_extent() / 4.0;
    if !(spec.window_radius > 0.0 && spec.window_radius < limit) {
        return Err(NormError::WindowTooLarge {
            radius: spec.window_radius,
            limit,
        });
    }
    let offsets = window_offsets(f, spec.window_radius, spec.window_shape);
    let dim = g.dim();
    let n0 = g.points(0) as i64;
    let n1 = if dim == 2 { g.points(1) as i64 } else { 1 };
    let centers: Vec<[i64; 2]> = (0..n0)
        .step_by(spec.stride)
        .flat_map(|i0| (0..n1).step_by(spec.stride).map(move |i1| [i0, i1]))
        .collect();
    let values = f.values();
    let cell = g.cell_volume();
    let p = spec.p;
    Ok(centers
        .par_iter()
        .map(|c| {
            let samples = offsets.iter().map(|d| {
                let i0 = (c[0] + d[0]).rem_euclid(n0);
                let i1 = (c[1] + d[1]).rem_euclid(n1);
                values[(i0 * n1 + i1) as usize]
            });
            lp_of_values(samples, p, cell)
        })
        .collect())
}

/// Uniformly local `L^p` norm.
pub fn uloc_norm(f: &RealField, spec: &NormSpec) -> Result<f64, NormError> {
    Ok(window_norms(f, spec)?.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub p: f64,
    /// `3^-n sup_x ||f||_{L^p(B_1(x))}`
    pub lhs: f64,
    /// `sup_k ||f||_{L^p(Q_1/2(k))}` over integer lattice points `k`
    pub mid: f64,
    /// `2^n sup_x ||f||_{L^p(B_1(x))}`
    pub rhs: f64,
    pub pass: bool,
}

const SANDWICH_SLACK: f64 = 1e-9;

/// Nearest integers to `y` on a circle of integer length `period`; both
/// neighbours are returned when `y` sits on a half-integer.
fn cube_owners(y: f64, period: i64) -> ([i64; 2], usize) {
    let lower = y.floor();
    let frac = y - lower;
    let tie = (frac - 0.5).abs() <= MEMBERSHIP_TOL * y.abs().max(1.0);
    let wrap = |k: f64| (k as i64).rem_euclid(period);
    if tie {
        ([wrap(lower), wrap(lower + 1.0)], 2)
    } else if frac < 0.5 {
        ([wrap(lower), 0], 1)
    } else {
        ([wrap(lower + 1.0), 0], 1)
    }
}

/// Local `L^p` norms over the closed unit cubes centred at the integer lattice.
pub fn cube_mesh_norms(f: &RealField, p: f64) -> Result<Vec<f64>, NormError> {
    check_exponent(p)?;
    let g = f.grid();
    let dim = g.dim();
    let mut periods = [1i64; 2];
    for (axis, period) in periods.iter_mut().enumerate().take(dim) {
        let l = g.extent(axis);
        if (l - l.round()).abs() > 1e-9 || l.round() < 1.0 {
            return Err(NormError::NonIntegerExtent(l));
        }
        *period = l.round() as i64;
    }
    let mut acc = vec![0.0f64; (periods[0] * periods[1]) as usize];
    for (i, &v) in f.values().iter().enumerate() {
        let x = g.position(i);
        let (o0, c0) = cube_owners(x[0], periods[0]);
        let (o1, c1) = if dim == 2 {
            cube_owners(x[1], periods[1])
        } else {
            ([0, 0], 1)
        };
        let contribution = if p.is_infinite() { v.abs() } else { v.abs().powf(p) };
        for &a in &o0[..c0] {
            for &b in &o1[..c1] {
                let slot = &mut acc[(a * periods[1] + b) as usize];
                if p.is_infinite() {
                    *slot = slot.max(contribution);
                } else {
                    *slot += contribution;
                }
            }
        }
    }
    let cell = g.cell_volume();
    Ok(acc
        .into_iter()
        .map(|s| if p.is_infinite() { s } else { (s * cell).powf(1.0 / p) })
        .collect())
}

/// Evaluates both sides of the ball/cube equivalence of uniformly local norms.
pub fn check_cube_ball_sandwich(f: &RealField, p: f64) -> Result<SandwichReport, NormError> {
    let mid = cube_mesh_norms(f, p)?.into_iter().fold(0.0, f64::max);
    let ball = uloc_norm(f, &NormSpec::with_p(p))?;
    let n = f.grid().dim() as i32;
    let lhs = 3f64.powi(-n) * ball;
    let rhs = 2f64.powi(n) * ball;
    let slack = SANDWICH_SLACK * ball.max(f64::MIN_POSITIVE);
    Ok(SandwichReport {
        p,
        lhs,
        mid,
        rhs,
        pass: lhs <= mid + slack && mid <= rhs + slack,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YoungReport {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// `||grad K * f||_{uloc p}`
    pub lhs: f64,
    /// `||f||_{uloc q}`
    pub data_norm: f64,
    /// `90 ||K'||_1 + 54 ||K'||_r`
    pub constant: f64,
    pub rhs: f64,
    /// `lhs / data_norm` (0 for vanishing data)
    pub empirical_constant: f64,
    pub pass: bool,
}

/// Young-type bound `||K' * f||_{uloc p} <= (90||K'||_1 + 54||K'||_r) ||f||_{uloc q}` in 1D.
pub fn check_young_uloc(f: &RealField, p: f64, q: f64, r: f64) -> Result<YoungReport, NormError> {
    let dim = f.grid().dim();
    if dim != 1 {
        return Err(NormError::UnsupportedDimension { expected: 1, got: dim });
    }
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let relation_ok = (1.0 + inv(p) - inv(q) - inv(r)).abs() < 1e-12;
    if !(relation_ok && q >= 1.0 && q <= p && r >= 1.0) {
        return Err(NormError::ExponentRelation { p, q, r });
    }
    let grad = grad_k_conv(f);
    let lhs = uloc_norm(&grad[0], &NormSpec::with_p(p))?;
    let data_norm = uloc_norm(f, &NormSpec::with_p(q))?;
    let constant = 90.0 * bessel_gradient_norm_1d(1.0) + 54.0 * bessel_gradient_norm_1d(r);
    let rhs = constant * data_norm;
    let empirical_constant = if data_norm > 0.0 { lhs / data_norm } else { 0.0 };
    Ok(YoungReport {
        p,
        q,
        r,
        lhs,
        data_norm,
        constant,
        rhs,
        empirical_constant,
        pass: lhs <= rhs * (1.0 + 1e-12) + 1e-14,
    })
}

/// Exact spectral heat propagator `exp(t Laplace)`.
pub fn heat_propagate(f: &RealField, t: f64) -> RealField {
    let fh = forward_transform(f);
    inverse_transform(&fh.multiply(&f.grid().radial_table(|k2| (-t * k2).exp())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatReport {
    pub p: f64,
    pub q: f64,
    pub t: f64,
    /// `||exp(t Laplace) f||_{uloc p}`
    pub lhs: f64,
    /// `||f||_{uloc q}`
    pub data_norm: f64,
    pub ratio: f64,
    /// `ratio / (1 + t^{-(n/2)(1/q - 1/p)})`, the smallest admissible constant.
    pub empirical_constant: f64,
    pub pass: bool,
}

pub const HEAT_CONTRACTION_SLACK: f64 = 1e-9;

/// Heat semigroup in uloc spaces: for `p = q` the bound must hold with `C = 1`.
pub fn heat_uloc_spotcheck(f: &RealField, p: f64, q: f64, t: f64) -> Result<HeatReport, NormError> {
    check_exponent(q)?;
    if q > p {
        return Err(NormError::ExponentRelation { p, q, r: f64::NAN });
    }
    if !(t > 0.0) {
        return Err(NormError::NonPositiveTime(t));
    }
    let evolved = heat_propagate(f, t);
    let lhs = uloc_norm(&evolved, &NormSpec::with_p(p))?;
    let data_norm = uloc_norm(f, &NormSpec::with_p(q))?;
    let ratio = if data_norm > 0.0 { lhs / data_norm } else { 0.0 };
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let n = f.grid().dim() as f64;
    let shape = 1.0 + t.powf(-(n / 2.0) * (inv(q) - inv(p)));
    let pass = if p == q {
        lhs <= data_norm * (1.0 + HEAT_CONTRACTION_SLACK)
    } else {
        ratio.is_finite()
    };
    Ok(HeatReport {
        p,
        q,
        t,
        lhs,
        data_norm,
        ratio,
        empirical_constant: ratio / shape,
        pass,
    })
}
