//! Linearisation around a constant state `A`.
//!
//! Perturbations `v` of `u = A` evolve to first order by
//! `v_t = Laplace v - A Laplace K * v`, whose solution operator `S_A(t)` is the
//! Fourier multiplier `exp(-t h(k))` with
//!
//! ```text
//! h(k) = |k|^2 - A |k|^2 / (1 + |k|^2).
//! ```
//!
//! `-h` is the dispersion relation. Its supremum over `k` (the spectral
//! abscissa) is `0` for `A <= 1` and `(sqrt(A) - 1)^2` for `A > 1`, attained
//! at `|k|^2 = sqrt(A) - 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{forward_transform, inverse_transform, Grid, GridError, RealField, SpectralField};
use crate::norms::{lp_norm, NormError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinsemiError {
    #[error("time {0} must be non-negative")]
    NegativeTime(f64),
    #[error("A = {0} has no growing mode; a peak wavenumber needs A > 1")]
    NoUnstableMode(f64),
    #[error("A = {0} is outside the admissible range {1}")]
    BackgroundOutOfRange(f64, &'static str),
    #[error("exponents must satisfy 1 <= q <= p, got p={p}, q={q}")]
    ExponentOrder { p: f64, q: f64 },
    #[error("packet width {width} does not fit the box (needs 10 widths <= {extent}) or is below 5/k* = {min_width}")]
    PacketWidth {
        width: f64,
        extent: f64,
        min_width: f64,
    },
    #[error("at t = {t} a fraction {fraction:.3e} of the mass sits in the boundary band (limit {limit:.0e})")]
    Contaminated { t: f64, fraction: f64, limit: f64 },
    #[error("probe times must be >= 1, got {0}")]
    TimeBelowOne(f64),
    #[error("a rate fit needs at least two positive samples with t_min < t_max")]
    DegenerateFit,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// `h(k)` as a function of `|k|^2`.
pub fn symbol_h(background: f64, k2: f64) -> f64 {
    k2 - background * k2 / (1.0 + k2)
}

/// Linear growth rate `-h(k)` of a mode with wavenumber magnitude `k`.
pub fn dispersion_rate(background: f64, k: f64) -> f64 {
    -symbol_h(background, k * k)
}

/// Supremum of the dispersion relation over the continuum.
pub fn spectral_abscissa(background: f64) -> f64 {
    if background > 1.0 {
        let s = background.sqrt() - 1.0;
        s * s
    } else {
        0.0
    }
}

/// Continuum maximiser `|k*| = sqrt(sqrt(A) - 1)` of the dispersion relation.
pub fn peak_wavenumber(background: f64) -> Result<f64, LinsemiError> {
    if background > 1.0 {
        Ok((background.sqrt() - 1.0).sqrt())
    } else {
        Err(LinsemiError::NoUnstableMode(background))
    }
}

/// Worst-case shortfall of the lattice maximum of `-h` below the continuum
/// abscissa on a box of side `extent`: `|d^2(-h)/dk^2| <= 2 + 2|A|` and some
/// lattice point lies within `pi/L` of `k*`.
pub fn lattice_rate_tolerance(background: f64, extent: f64) -> f64 {
    let half_step = std::f64::consts::PI / extent;
    (1.0 + background.abs()) * half_step * half_step
}

/// Smallest box side `L >= min_extent` with `k` exactly on the lattice.
pub fn resonant_extent(k: f64, min_extent: f64) -> f64 {
    let period = 2.0 * std::f64::consts::PI / k;
    (min_extent / period).ceil().max(1.0) * period
}

/// Decay exponent `-(n/2)(1/q - 1/p)` of `||S_A(t)||_{q -> p}`.
pub fn reference_decay_exponent(dim: usize, p: f64, q: f64) -> f64 {
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    -(dim as f64 / 2.0) * (inv(q) - inv(p))
}

/// Tabulated `h(k)` on a grid lattice.
#[derive(Clone, Debug)]
pub struct SemigroupSymbol {
    background: f64,
    grid: Grid,
    h: Vec<f64>,
}

impl SemigroupSymbol {
    pub fn new(grid: &Grid, background: f64) -> Self {
        SemigroupSymbol {
            background,
            grid: grid.clone(),
            h: grid.radial_table(|k2| symbol_h(background, k2)),
        }
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// `exp(-t h(k))`.
    pub fn propagator(&self, t: f64) -> Vec<f64> {
        self.h.iter().map(|h| (-t * h).exp()).collect()
    }

    /// Largest growth rate `-h` over the lattice, with the mode attaining it.
    pub fn max_lattice_rate(&self) -> (f64, [f64; 2]) {
        let (idx, rate) = self
            .h
            .iter()
            .enumerate()
            .map(|(i, h)| (i, -h))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        (rate, self.grid.wavevector(idx))
    }

    pub fn evolve_spectral(&self, vhat: &SpectralField, t: f64) -> SpectralField {
        vhat.multiply(&self.propagator(t))
    }
}

fn check_time(t: f64) -> Result<(), LinsemiError> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(LinsemiError::NegativeTime(t))
    }
}

/// `S_A(t) v0`.
pub fn apply_semigroup(background: f64, t: f64, v0: &RealField) -> Result<RealField, LinsemiError> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(v0.clone());
    }
    let symbol = SemigroupSymbol::new(v0.grid(), background);
    Ok(inverse_transform(&symbol.evolve_spectral(&forward_transform(v0), t)))
}

/// `grad S_A(t) v0`, one field per axis.
pub fn apply_grad_semigroup(background: f64, t: f64, v0: &RealField) -> Result<Vec<RealField>, LinsemiError> {
    check_time(t)?;
    let grid = v0.grid();
    let symbol = SemigroupSymbol::new(grid, background);
    let evolved = symbol.evolve_spectral(&forward_transform(v0), t);
    Ok((0..grid.dim())
        .map(|axis| inverse_transform(&evolved.multiply_imag(&grid.derivative_table(axis))))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    /// `y ~ prefactor * t^exponent`
    Algebraic,
    /// `y ~ prefactor * exp(exponent * t)`
    Exponential,
}

/// Least-squares rate fitted to a log-transformed series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS residual in log space.
    pub residual: f64,
    pub window: (f64, f64),
    pub kind: RateKind,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Fits `values ~ C t^alpha` over samples with `t > 0`, `value > 0`.
pub fn fit_power_law(times: &[f64], values: &[f64]) -> Result<RateFit, LinsemiError> {
    fit(times, values, RateKind::Algebraic)
}

/// Fits `values ~ C exp(lambda t)` over samples with `value > 0`.
pub fn fit_exponential(times: &[f64], values: &[f64]) -> Result<RateFit, LinsemiError> {
    fit(times, values, RateKind::Exponential)
}

fn fit(times: &[f64], values: &[f64], kind: RateKind) -> Result<RateFit, LinsemiError> {
    let (x, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **v > 0.0 && (kind == RateKind::Exponential || **t > 0.0))
        .map(|(&t, &v)| {
            let xt = match kind {
                RateKind::Algebraic => t.ln(),
                RateKind::Exponential => t,
            };
            (xt, v.ln())
        })
        .unzip();
    if x.len() < 2 {
        return Err(LinsemiError::DegenerateFit);
    }
    let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(t_min < t_max) {
        return Err(LinsemiError::DegenerateFit);
    }
    let (slope, intercept, residual) = least_squares(&x, &y);
    Ok(RateFit {
        exponent: slope,
        prefactor: intercept.exp(),
        residual,
        window: (t_min, t_max),
        kind,
    })
}

pub const BOUNDARY_MASS_LIMIT: f64 = 0.01;

/// Fraction of `int |f|` lying farther than `0.4 L` (per axis, minimum image)
/// from `center`.
pub fn boundary_mass_fraction(f: &RealField, center: [f64; 2]) -> f64 {
    let g = f.grid();
    let mut total = 0.0;
    let mut outer = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        let d = g.periodic_displacement(g.position(i), center);
        let far = (0..g.dim()).any(|a| d[a].abs() > 0.4 * g.extent(a));
        total += v.abs();
        if far {
            outer += v.abs();
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

/// Location of `max |f|`.
pub fn peak_location(f: &RealField) -> [f64; 2] {
    let (idx, _) = f
        .values()
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best });
    f.grid().position(idx)
}

fn decay_probe(
    background: f64,
    p: f64,
    q: f64,
    v0: &RealField,
    times: &[f64],
    gradient: bool,
) -> Result<RateFit, LinsemiError> {
    if background >= 1.0 {
        return Err(LinsemiError::BackgroundOutOfRange(background, "A < 1"));
    }
    if !(q >= 1.0 && q <= p) {
        return Err(LinsemiError::ExponentOrder { p, q });
    }
    let grid = v0.grid();
    let symbol = SemigroupSymbol::new(grid, background);
    let v0hat = forward_transform(v0);
    let center = peak_location(v0);
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        check_time(t)?;
        let evolved = symbol.evolve_spectral(&v0hat, t);
        let field = inverse_transform(&evolved);
        let fraction = boundary_mass_fraction(&field, center);
        if fraction > BOUNDARY_MASS_LIMIT {
            return Err(LinsemiError::Contaminated {
                t,
                fraction,
                limit: BOUNDARY_MASS_LIMIT,
            });
        }
        let norm = if gradient {
            let mut sq = vec![0.0; grid.len()];
            for axis in 0..grid.dim() {
                let d = inverse_transform(&evolved.multiply_imag(&grid.derivative_table(axis)));
                for (s, v) in sq.iter_mut().zip(d.values()) {
                    *s += v * v;
                }
            }
            let magnitude = RealField::from_raw(grid, sq.into_iter().map(f64::sqrt).collect());
            lp_norm(&magnitude, p)?
        } else {
            lp_norm(&field, p)?
        };
        norms.push(norm);
    }
    fit_power_law(times, &norms)
}

/// Fits the algebraic decay of `||S_A(t) v0||_p` over `times`; compare the
/// exponent with [`reference_decay_exponent`]`(n, p, q)` for `v0` in `L^q`.
pub fn semigroup_decay_probe(
    background: f64,
    p: f64,
    q: f64,
    v0: &RealField,
    times: &[f64],
) -> Result<RateFit, LinsemiError> {
    decay_probe(background, p, q, v0, times, false)
}

/// Same as [`semigroup_decay_probe`] for `|grad S_A(t) v0|`; the reference
/// exponent is shifted by `-1/2`.
pub fn grad_semigroup_decay_probe(
    background: f64,
    p: f64,
    q: f64,
    v0: &RealField,
    times: &[f64],
) -> Result<RateFit, LinsemiError> {
    decay_probe(background, p, q, v0, times, true)
}

/// Gaussian-envelope plane wave at the most unstable wavenumber, centred in
/// the box, with its mean removed.
pub fn build_near_eigenmode(
    grid: &Grid,
    background: f64,
    amplitude: f64,
    width: f64,
) -> Result<RealField, LinsemiError> {
    let k = peak_wavenumber(background)?;
    let extent = grid.min_extent();
    let min_width = 5.0 / k;
    if !(width > 0.0 && 10.0 * width <= extent && width >= min_width) {
        return Err(LinsemiError::PacketWidth {
            width,
            extent,
            min_width,
        });
    }
    let c = grid.center();
    let dim = grid.dim();
    let packet = RealField::from_fn(grid, |x| {
        let r2: f64 = (0..dim).map(|a| (x[a] - c[a]).powi(2)).sum();
        amplitude * (-r2 / (2.0 * width * width)).exp() * (k * (x[0] - c[0])).cos()
    });
    let mean = packet.mean();
    Ok(packet.add_constant(-mean))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuSample {
    pub t: f64,
    /// `||mu_A(t)||_1`
    pub l1: f64,
    pub boundary_mass: f64,
    /// Boundary mass above [`MU_BOUNDARY_WARN`]: the box is too small for this `t`.
    pub warning: bool,
}

pub const MU_BOUNDARY_WARN: f64 = 1e-6;

/// Physical-space kernel `mu_A(t) = F^-1[exp(-t h)]`, centred in the box.
pub fn mu_kernel(grid: &Grid, background: f64, t: f64) -> RealField {
    let symbol = SemigroupSymbol::new(grid, background);
    let c = grid.center();
    let volume = grid.volume();
    let coefficients = (0..grid.len())
        .map(|i| {
            let k = grid.wavevector(i);
            let phase = -(k[0] * c[0] + k[1] * c[1]);
            rustfft::num_complex::Complex64::from_polar((-t * symbol.h()[i]).exp() / volume, phase)
        })
        .collect();
    let hat = SpectralField::new(grid, coefficients).expect("length matches grid");
    inverse_transform(&hat)
}

/// `||mu_A(t)||_1` over `times`, for `A` in `[0, 1)` and `t >= 1`.
pub fn mu_l1_probe(grid: &Grid, background: f64, times: &[f64]) -> Result<Vec<MuSample>, LinsemiError> {
    if !(0.0..1.0).contains(&background) {
        return Err(LinsemiError::BackgroundOutOfRange(background, "0 <= A < 1"));
    }
    times
        .iter()
        .map(|&t| {
            if t < 1.0 {
                return Err(LinsemiError::TimeBelowOne(t));
            }
            let mu = mu_kernel(grid, background, t);
            let boundary_mass = boundary_mass_fraction(&mu, grid.center());
            let warning = boundary_mass > MU_BOUNDARY_WARN;
            if warning {
                log::warn!("mu_A({t}) has boundary mass fraction {boundary_mass:.2e}; enlarge the box");
            }
            Ok(MuSample {
                t,
                l1: lp_norm(&mu, 1.0)?,
                boundary_mass,
                warning,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, spectral_gradient};

    /// Grid-scan oracle for the maximiser of `-h` over `(0, k_max]`.
    fn scan_peak(background: f64, k_max: f64, step: f64) -> (f64, f64) {
        let n = (k_max / step).round() as usize;
        (1..=n)
            .map(|i| {
                let k = i as f64 * step;
                (k, -(k * k) + background * k * k / (1.0 + k * k))
            })
            .fold((0.0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
    }

    #[test]
    fn dispersion_examples() {
        for a in [-1.0, 0.0, 0.5, 4.0] {
            assert_eq!(dispersion_rate(a, 0.0), 0.0);
        }
        assert_eq!(dispersion_rate(0.0, 3.0), -9.0);
        assert!((dispersion_rate(4.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((dispersion_rate(4.0, 1.0) - spectral_abscissa(4.0)).abs() < 1e-15);
    }

    #[test]
    fn abscissa_examples() {
        assert_eq!(spectral_abscissa(4.0), 1.0);
        assert!((spectral_abscissa(2.0) - 0.171_572_875_253_809_9).abs() < 1e-15);
        assert_eq!(spectral_abscissa(1.0), 0.0);
        assert_eq!(spectral_abscissa(0.3), 0.0);
        assert_eq!(spectral_abscissa(-2.0), 0.0);
    }

    #[test]
    fn peak_matches_scan_oracle() {
        let (k4, _) = scan_peak(4.0, 4.0, 1e-5);
        assert!((peak_wavenumber(4.0).unwrap() - k4).abs() < 1e-5);
        assert!((k4 - 1.0).abs() < 1e-5);
        let (k2, _) = scan_peak(2.0, 4.0, 1e-5);
        assert!((peak_wavenumber(2.0).unwrap() - k2).abs() < 1e-5);
        assert!((k2 - 0.643_594_3).abs() < 1e-5);
        let (k_soft, _) = scan_peak(1.0001, 0.1, 1e-7);
        let k = peak_wavenumber(1.0001).unwrap();
        assert!((k - k_soft).abs() < 1e-6 && (k - 0.00707).abs() < 1e-5);
        assert!((spectral_abscissa(1.0001) - 2.5e-9).abs() < 1e-12);
        for a in [1.5, 2.0, 4.0, 9.0, 1.0001] {
            let k = peak_wavenumber(a).unwrap();
            assert!((dispersion_rate(a, k) - spectral_abscissa(a)).abs() < 1e-12);
        }
        assert_eq!(peak_wavenumber(1.0), Err(LinsemiError::NoUnstableMode(1.0)));
    }

    #[test]
    fn semigroup_identity_and_single_mode() {
        let l = resonant_extent(1.0, 50.0);
        let g = make_grid(1, l, 128).unwrap();
        let v = RealField::from_fn(&g, |x| (1.25 * x[0]).cos());
        assert_eq!(apply_semigroup(2.0, 0.0, &v).unwrap(), v);
        assert!(matches!(apply_semigroup(2.0, -1.0, &v), Err(LinsemiError::NegativeTime(_))));
        for (a, t) in [(0.5, 1.3), (2.0, 0.7), (4.0, 2.0)] {
            let out = apply_semigroup(a, t, &v).unwrap();
            let factor = (t * dispersion_rate(a, 1.25)).exp();
            let expected = v.scale(factor);
            assert!(out.sub(&expected).unwrap().max_abs() <= 1e-12 * factor);
        }
    }

    #[test]
    fn grad_semigroup_commutes_with_gradient() {
        let g = make_grid(2, 20.0, 32).unwrap();
        let v = RealField::from_fn(&g, |x| (-(x[0] - 9.0).powi(2) / 3.0 - (x[1] - 11.0).powi(2) / 5.0).exp());
        let a = apply_grad_semigroup(0.7, 1.5, &v).unwrap();
        let b: Vec<RealField> = spectral_gradient(&v)
            .iter()
            .map(|c| apply_semigroup(0.7, 1.5, c).unwrap())
            .collect();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.sub(y).unwrap().max_abs() < 1e-11 * x.max_abs().max(1.0));
        }
    }

    #[test]
    fn lattice_dichotomy() {
        for a in [-1.0, 0.0, 0.5, 1.0] {
            let s = SemigroupSymbol::new(&make_grid(2, 40.0, 64).unwrap(), a);
            assert!(s.max_lattice_rate().0 <= 0.0);
        }
        for a in [1.5, 2.0, 4.0, 9.0] {
            for l in [37.0, 100.0, 250.0] {
                let s = SemigroupSymbol::new(&make_grid(1, l, 1024).unwrap(), a);
                let (rate, _) = s.max_lattice_rate();
                let abscissa = spectral_abscissa(a);
                assert!(rate <= abscissa + 1e-15);
                assert!(rate >= abscissa - lattice_rate_tolerance(a, l));
            }
        }
    }

    #[test]
    fn fit_recovers_exact_rates() {
        let t: Vec<f64> = (1..20).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(-0.75)).collect();
        let f = fit_power_law(&t, &y).unwrap();
        assert!((f.exponent + 0.75).abs() < 1e-12 && (f.prefactor - 3.0).abs() < 1e-10);
        assert!(f.residual < 1e-12 && f.window == (1.0, 19.0));
        let y: Vec<f64> = t.iter().map(|t| 0.5 * (0.3 * t).exp()).collect();
        let f = fit_exponential(&t, &y).unwrap();
        assert!((f.exponent - 0.3).abs() < 1e-12);
        assert_eq!(fit_power_law(&[1.0], &[1.0]), Err(LinsemiError::DegenerateFit));
    }

    fn unit_gaussian(g: &Grid, width: f64) -> RealField {
        let c = g.center();
        let dim = g.dim() as i32;
        let norm = (2.0 * std::f64::consts::PI * width * width).powi(dim).sqrt();
        RealField::from_fn(g, |x| {
            let r2: f64 = (0..g.dim()).map(|a| (x[a] - c[a]).powi(2)).sum();
            (-r2 / (2.0 * width * width)).exp() / norm
        })
    }

    fn log_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (t0.ln() + (t1 / t0).ln() * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn decay_probe_rates_1d() {
        let g = make_grid(1, 400.0, 2048).unwrap();
        let v0 = unit_gaussian(&g, 1.0);
        let times = log_times(5.0, 200.0, 40);
        let heat = semigroup_decay_probe(0.0, f64::INFINITY, 1.0, &v0, &times).unwrap();
        assert!((heat.exponent + 0.5).abs() <= 0.02, "{heat:?}");
        let stable = semigroup_decay_probe(0.5, f64::INFINITY, 1.0, &v0, &times).unwrap();
        assert!((stable.exponent - reference_decay_exponent(1, f64::INFINITY, 1.0)).abs() <= 0.05);
        // Later window and narrower data: the gradient sup has a longer transient.
        let g = make_grid(1, 800.0, 4096).unwrap();
        let v0 = unit_gaussian(&g, 0.5);
        let times = log_times(20.0, 400.0, 40);
        let grad = grad_semigroup_decay_probe(0.5, f64::INFINITY, 1.0, &v0, &times).unwrap();
        assert!((grad.exponent + 1.0).abs() <= 0.05, "{grad:?}");
    }

    #[test]
    fn decay_probe_rate_2d() {
        // Effective diffusivity is 1 - A = 0.1, so the algebraic regime starts late.
        let g = make_grid(2, 400.0, 256).unwrap();
        let v0 = unit_gaussian(&g, 3.0);
        let times = log_times(500.0, 5000.0, 12);
        let fit = semigroup_decay_probe(0.9, 2.0, 1.0, &v0, &times).unwrap();
        assert!((fit.exponent - reference_decay_exponent(2, 2.0, 1.0)).abs() <= 0.1, "{fit:?}");
    }

    #[test]
    fn decay_probe_rejects_contamination_and_bad_args() {
        let g = make_grid(1, 40.0, 256).unwrap();
        let v0 = unit_gaussian(&g, 1.0);
        assert!(matches!(
            semigroup_decay_probe(0.0, 2.0, 1.0, &v0, &[1.0, 200.0]),
            Err(LinsemiError::Contaminated { .. })
        ));
        assert!(matches!(
            semigroup_decay_probe(1.5, 2.0, 1.0, &v0, &[1.0, 2.0]),
            Err(LinsemiError::BackgroundOutOfRange(..))
        ));
        assert!(matches!(
            semigroup_decay_probe(0.5, 1.0, 2.0, &v0, &[1.0, 2.0]),
            Err(LinsemiError::ExponentOrder { .. })
        ));
    }

    #[test]
    fn near_eigenmode_grows_at_abscissa() {
        let l = resonant_extent(1.0, 200.0);
        let g = make_grid(1, l, 1024).unwrap();
        let v0 = build_near_eigenmode(&g, 4.0, 1.0, 20.0).unwrap();
        assert!(v0.mean().abs() < 1e-15);
        let out = apply_semigroup(4.0, 1.0, &v0).unwrap();
        let ratio = lp_norm(&out.sub(&v0.scale(1f64.exp())).unwrap(), 2.0).unwrap() / lp_norm(&v0, 2.0).unwrap();
        assert!(ratio <= 0.05, "ratio {ratio}");

        let a = spectral_abscissa(2.0);
        let l = resonant_extent(peak_wavenumber(2.0).unwrap(), 300.0);
        let g = make_grid(1, l, 1024).unwrap();
        let v0 = build_near_eigenmode(&g, 2.0, 1.0, 30.0).unwrap();
        let growth = lp_norm(&apply_semigroup(2.0, 2.0, &v0).unwrap(), 2.0).unwrap() / lp_norm(&v0, 2.0).unwrap();
        let expected = (2.0 * a).exp();
        assert!(growth >= 0.9 * expected && growth <= 1.1 * expected);
    }

    #[test]
    fn near_eigenmode_sharpens_with_width() {
        let l = resonant_extent(1.0, 1200.0);
        let g = make_grid(1, l, 4096).unwrap();
        let defect = |w: f64| {
            let v0 = build_near_eigenmode(&g, 4.0, 1.0, w).unwrap();
            let out = apply_semigroup(4.0, 1.0, &v0).unwrap();
            lp_norm(&out.sub(&v0.scale(1f64.exp())).unwrap(), 2.0).unwrap() / lp_norm(&v0, 2.0).unwrap()
        };
        let d = [defect(10.0), defect(30.0), defect(100.0)];
        assert!(d[0] > d[1] && d[1] > d[2] && d[2] < 1e-3, "{d:?}");
    }

    #[test]
    fn near_eigenmode_preconditions() {
        let g = make_grid(1, 100.0, 256).unwrap();
        assert!(matches!(build_near_eigenmode(&g, 0.5, 1.0, 5.0), Err(LinsemiError::NoUnstableMode(_))));
        assert!(matches!(build_near_eigenmode(&g, 4.0, 1.0, 20.0), Err(LinsemiError::PacketWidth { .. })));
        assert!(matches!(build_near_eigenmode(&g, 4.0, 1.0, 1.0), Err(LinsemiError::PacketWidth { .. })));
    }

    #[test]
    fn heat_kernel_is_a_probability_kernel() {
        let g = make_grid(1, 400.0, 2048).unwrap();
        let samples = mu_l1_probe(&g, 0.0, &[1.0, 10.0, 100.0]).unwrap();
        for s in samples {
            assert!((s.l1 - 1.0).abs() < 1e-10, "{s:?}");
            assert!(!s.warning);
        }
    }

    #[test]
    fn mu_kernel_bounded_for_stable_backgrounds() {
        let g = make_grid(1, 512.0, 2048).unwrap();
        let times: Vec<f64> = (0..=20).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        for a in [0.5, 0.99] {
            let samples = mu_l1_probe(&g, a, &times).unwrap();
            let sup = samples.iter().map(|s| s.l1).fold(0.0, f64::max);
            assert!(sup.is_finite() && sup >= 1.0 - 1e-9);
            if a == 0.5 {
                assert!(sup <= 10.0);
            }
        }
        assert!(matches!(mu_l1_probe(&g, 0.5, &[0.5]), Err(LinsemiError::TimeBelowOne(_))));
        assert!(matches!(mu_l1_probe(&g, 1.2, &[1.0]), Err(LinsemiError::BackgroundOutOfRange(..))));
    }

    #[test]
    fn mu_probe_warns_on_small_box() {
        let g = make_grid(1, 20.0, 256).unwrap();
        let s = mu_l1_probe(&g, 0.0, &[50.0]).unwrap();
        assert!(s[0].warning);
    }
}
