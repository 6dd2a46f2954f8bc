//! Periodic grids, real/spectral transforms and differential multipliers.
//!
//! A [`Grid`] is a periodic box `[0, L_1) x ... x [0, L_n)` sampled at `N_j`
//! equispaced nodes per axis (`n` is 1 or 2). Values are stored row-major:
//! in 2D the flat index of node `(i0, i1)` is `i0 * N_1 + i1`.
//!
//! Spectral coefficients use the Fourier-series convention
//!
//! ```text
//! f_j = sum_m c_m exp(i k_m x_j),   k_m = 2 pi m / L,   m = -N/2 .. N/2-1
//! ```
//!
//! so a constant field `c` has the single coefficient `c` at `k = 0` and the
//! forward/inverse pair is the identity.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

pub const MIN_POINTS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("unsupported dimension {0}; only 1 and 2 are supported")]
    UnsupportedDimension(usize),
    #[error("axis {axis}: point count {points} must be even")]
    OddPoints { axis: usize, points: usize },
    #[error("axis {axis}: point count {points} is below the minimum of {MIN_POINTS}")]
    TooFewPoints { axis: usize, points: usize },
    #[error("axis {axis}: extent {extent} must be positive and finite")]
    NonPositiveExtent { axis: usize, extent: f64 },
    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field value at node {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
}

struct AxisPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

struct GridInner {
    extent: Vec<f64>,
    points: Vec<usize>,
    wavenumbers: Vec<Vec<f64>>,
    plans: Vec<AxisPlan>,
}

/// Periodic box descriptor with its wavenumber lattice and cached FFT plans.
///
/// Cloning is cheap; clones share the (immutable, thread-safe) plans.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("extent", &self.inner.extent)
            .field("points", &self.inner.points)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.extent == other.inner.extent && self.inner.points == other.inner.points)
    }
}

/// Builds an isotropic grid: the same extent and point count on every axis.
pub fn make_grid(dim: usize, extent: f64, points: usize) -> Result<Grid, GridError> {
    if dim == 0 || dim > 2 {
        return Err(GridError::UnsupportedDimension(dim));
    }
    Grid::new(&vec![extent; dim], &vec![points; dim])
}

impl Grid {
    pub fn new(extent: &[f64], points: &[usize]) -> Result<Self, GridError> {
        let dim = extent.len();
        if dim == 0 || dim > 2 || points.len() != dim {
            return Err(GridError::UnsupportedDimension(dim.max(points.len())));
        }
        for (axis, (&l, &n)) in extent.iter().zip(points).enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(GridError::NonPositiveExtent { axis, extent: l });
            }
            if n % 2 != 0 {
                return Err(GridError::OddPoints { axis, points: n });
            }
            if n < MIN_POINTS {
                return Err(GridError::TooFewPoints { axis, points: n });
            }
        }
        let mut planner = FftPlanner::new();
        let plans = points
            .iter()
            .map(|&n| AxisPlan {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
            .collect();
        let wavenumbers = extent
            .iter()
            .zip(points)
            .map(|(&l, &n)| (0..n).map(|i| fft_wavenumber(i, n, l)).collect())
            .collect();
        Ok(Grid {
            inner: Arc::new(GridInner {
                extent: extent.to_vec(),
                points: points.to_vec(),
                wavenumbers,
                plans,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.extent.len()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.inner.extent[axis]
    }

    pub fn points(&self, axis: usize) -> usize {
        self.inner.points[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.inner.extent[axis] / self.inner.points[axis] as f64
    }

    /// Smallest spacing over all axes.
    pub fn min_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    /// Smallest extent over all axes.
    pub fn min_extent(&self) -> f64 {
        self.inner.extent.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.inner.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.inner.extent.iter().product()
    }

    /// Lattice spacing `2 pi / L` of the coarsest axis.
    pub fn wavenumber_spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.inner.extent.iter().copied().fold(0.0, f64::max)
    }

    /// Wavenumbers along `axis` in the half-open order `-N/2 .. N/2-1`.
    pub fn lattice(&self, axis: usize) -> Vec<f64> {
        let n = self.points(axis) as i64;
        let dk = 2.0 * std::f64::consts::PI / self.extent(axis);
        (-n / 2..n / 2).map(|m| m as f64 * dk).collect()
    }

    /// Wavenumbers along `axis` in FFT storage order.
    pub fn axis_wavenumbers(&self, axis: usize) -> &[f64] {
        &self.inner.wavenumbers[axis]
    }

    /// Splits a flat index into per-axis indices.
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        match self.dim() {
            1 => [flat, 0],
            _ => [flat / self.points(1), flat % self.points(1)],
        }
    }

    pub fn flatten(&self, idx: [usize; 2]) -> usize {
        match self.dim() {
            1 => idx[0],
            _ => idx[0] * self.points(1) + idx[1],
        }
    }

    /// Physical coordinates of a node; unused trailing axes are zero.
    pub fn position(&self, flat: usize) -> [f64; 2] {
        let idx = self.unflatten(flat);
        let mut x = [0.0; 2];
        for (axis, xi) in x.iter_mut().enumerate().take(self.dim()) {
            *xi = idx[axis] as f64 * self.spacing(axis);
        }
        x
    }

    /// Geometric centre of the box.
    pub fn center(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for (axis, ci) in c.iter_mut().enumerate().take(self.dim()) {
            *ci = 0.5 * self.extent(axis);
        }
        c
    }

    /// Minimum-image displacement `x - y` on the torus.
    pub fn periodic_displacement(&self, x: [f64; 2], y: [f64; 2]) -> [f64; 2] {
        let mut d = [0.0; 2];
        for axis in 0..self.dim() {
            let l = self.extent(axis);
            let mut r = (x[axis] - y[axis]) % l;
            if r > 0.5 * l {
                r -= l;
            } else if r < -0.5 * l {
                r += l;
            }
            d[axis] = r;
        }
        d
    }

    /// Wavevector of the mode stored at flat index `flat`.
    pub fn wavevector(&self, flat: usize) -> [f64; 2] {
        let idx = self.unflatten(flat);
        let mut k = [0.0; 2];
        for axis in 0..self.dim() {
            k[axis] = self.inner.wavenumbers[axis][idx[axis]];
        }
        k
    }

    /// True when the mode at `flat` sits on the Nyquist index of `axis`.
    pub fn is_nyquist(&self, flat: usize, axis: usize) -> bool {
        self.unflatten(flat)[axis] == self.points(axis) / 2
    }

    /// Tabulates an isotropic real multiplier `m(|k|^2)` in storage order.
    pub fn radial_table(&self, symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let k = self.wavevector(i);
                symbol(k[0] * k[0] + k[1] * k[1])
            })
            .collect()
    }

    /// Tabulates `k_axis` with the Nyquist entry zeroed: the symbol of an odd
    /// (first-derivative) operator is applied as `i * table`.
    pub fn derivative_table(&self, axis: usize) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                if self.is_nyquist(i, axis) {
                    0.0
                } else {
                    self.wavevector(i)[axis]
                }
            })
            .collect()
    }

    /// 1 on modes kept by the 2/3 rule (`3|m| < N` on every axis), 0 elsewhere.
    pub fn dealias_mask(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let idx = self.unflatten(i);
                let keep = (0..self.dim()).all(|axis| {
                    let n = self.points(axis);
                    let m = signed_index(idx[axis], n).unsigned_abs() as usize;
                    3 * m < n
                });
                if keep {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Largest `|k|^2` on the lattice.
    pub fn max_k2(&self) -> f64 {
        (0..self.dim())
            .map(|a| {
                let k = std::f64::consts::PI / self.spacing(a);
                k * k
            })
            .sum()
    }

    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        let plan = |axis: usize| {
            let p = &self.inner.plans[axis];
            if forward {
                p.forward.clone()
            } else {
                p.inverse.clone()
            }
        };
        match self.dim() {
            1 => plan(0).process(buf),
            _ => {
                let (n0, n1) = (self.points(0), self.points(1));
                plan(1).process(buf);
                let mut column = vec![Complex64::new(0.0, 0.0); n0 * n1];
                transpose(buf, &mut column, n0, n1);
                plan(0).process(&mut column);
                transpose(&column, buf, n1, n0);
            }
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn fft_wavenumber(i: usize, n: usize, extent: f64) -> f64 {
    2.0 * std::f64::consts::PI * signed_index(i, n) as f64 / extent
}

/// Sampled real scalar field on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GridError::NonFinite { index, value });
        }
        Ok(RealField {
            grid: grid.clone(),
            values,
        })
    }

    /// Samples `f(x)` at every node.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        RealField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        RealField {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    // Callers inside the crate guarantee finiteness themselves.
    pub(crate) fn from_raw(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        RealField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `sum f * cell volume`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        RealField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn add_constant(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &RealField, beta: f64) -> Result<Self, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(RealField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &RealField) -> Result<Self, GridError> {
        self.combine(1.0, other, -1.0)
    }

    pub fn mul(&self, other: &RealField) -> Result<Self, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(RealField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }
}

/// Discrete Fourier coefficients of a field, in FFT storage order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: &Grid, coefficients: Vec<Complex64>) -> Result<Self, GridError> {
        if coefficients.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: coefficients.len(),
            });
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coefficients,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            grid: grid.clone(),
            coefficients: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    /// Pointwise real multiplier.
    pub fn multiply(&self, table: &[f64]) -> Self {
        debug_assert_eq!(table.len(), self.coefficients.len());
        SpectralField {
            grid: self.grid.clone(),
            coefficients: self.coefficients.iter().zip(table).map(|(c, m)| c * m).collect(),
        }
    }

    /// Pointwise purely imaginary multiplier `i * table`.
    pub fn multiply_imag(&self, table: &[f64]) -> Self {
        debug_assert_eq!(table.len(), self.coefficients.len());
        SpectralField {
            grid: self.grid.clone(),
            coefficients: self
                .coefficients
                .iter()
                .zip(table)
                .map(|(c, m)| Complex64::new(-c.im * m, c.re * m))
                .collect(),
        }
    }

    /// `integral |f|^2` evaluated from the coefficients.
    pub fn energy(&self) -> f64 {
        self.grid.volume() * self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Largest deviation from `c(-k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .map(|i| {
                let idx = g.unflatten(i);
                let mut mirror = [0usize; 2];
                for axis in 0..g.dim() {
                    let n = g.points(axis);
                    mirror[axis] = (n - idx[axis]) % n;
                }
                (self.coefficients[i] - self.coefficients[g.flatten(mirror)].conj()).norm()
            })
            .fold(0.0, f64::max)
    }
}

pub fn forward_transform(f: &RealField) -> SpectralField {
    let grid = f.grid();
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.transform(&mut buf, true);
    let norm = 1.0 / grid.len() as f64;
    for c in &mut buf {
        *c *= norm;
    }
    SpectralField {
        grid: grid.clone(),
        coefficients: buf,
    }
}

/// Inverse transform; the imaginary part (rounding noise for Hermitian input)
/// is discarded.
pub fn inverse_transform(g: &SpectralField) -> RealField {
    let mut buf = g.coefficients.clone();
    g.grid.transform(&mut buf, false);
    RealField {
        grid: g.grid.clone(),
        values: buf.into_iter().map(|c| c.re).collect(),
    }
}

/// One component `d f / d x_j` per axis, computed as `F^-1[i k_j F f]`.
pub fn spectral_gradient(f: &RealField) -> Vec<RealField> {
    let grid = f.grid();
    let fhat = forward_transform(f);
    (0..grid.dim())
        .map(|axis| inverse_transform(&fhat.multiply_imag(&grid.derivative_table(axis))))
        .collect()
}

/// Laplacian `F^-1[-|k|^2 F f]`.
pub fn spectral_laplacian(f: &RealField) -> RealField {
    let fhat = forward_transform(f);
    inverse_transform(&fhat.multiply(&f.grid().radial_table(|k2| -k2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lattice_of_unit_spacing() {
        let g = make_grid(1, 2.0 * PI, 8).unwrap();
        let lattice = g.lattice(0);
        let expected: Vec<f64> = (-4..4).map(|m| m as f64).collect();
        for (a, b) in lattice.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(g.len(), 8);
    }

    #[test]
    fn spacing_in_2d() {
        let g = make_grid(2, 64.0, 128).unwrap();
        assert_eq!(g.spacing(0), 0.5);
        assert_eq!(g.spacing(1), 0.5);
        assert_eq!(g.len(), 128 * 128);
        assert_eq!(g.cell_volume(), 0.25);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(
            make_grid(1, 2.0 * PI, 7).unwrap_err(),
            GridError::OddPoints { axis: 0, points: 7 }
        );
        assert!(matches!(make_grid(1, 0.0, 8), Err(GridError::NonPositiveExtent { .. })));
        assert!(matches!(make_grid(1, -1.0, 8), Err(GridError::NonPositiveExtent { .. })));
        assert_eq!(make_grid(3, 1.0, 8).unwrap_err(), GridError::UnsupportedDimension(3));
        assert_eq!(make_grid(0, 1.0, 8).unwrap_err(), GridError::UnsupportedDimension(0));
        assert!(matches!(make_grid(1, 1.0, 6), Err(GridError::TooFewPoints { .. })));
    }

    #[test]
    fn field_validation() {
        let g = make_grid(1, 1.0, 8).unwrap();
        assert!(matches!(RealField::new(&g, vec![0.0; 7]), Err(GridError::LengthMismatch { .. })));
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(RealField::new(&g, v), Err(GridError::NonFinite { index: 3, .. })));
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let g = make_grid(2, 10.0, 16).unwrap();
        let f = RealField::constant(&g, 3.5);
        let fh = forward_transform(&f);
        assert!((fh.coefficients()[0] - Complex64::new(3.5, 0.0)).norm() < 1e-14);
        assert!(fh.coefficients()[1..].iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn cosine_has_two_modes() {
        let l = 7.0;
        let g = make_grid(1, l, 32).unwrap();
        let f = RealField::from_fn(&g, |x| (2.0 * PI * x[0] / l).cos());
        let fh = forward_transform(&f);
        let dk = 2.0 * PI / l;
        let nonzero: Vec<(f64, Complex64)> = fh
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 1e-12)
            .map(|(i, c)| (g.wavevector(i)[0], *c))
            .collect();
        assert_eq!(nonzero.len(), 2);
        for (k, c) in nonzero {
            assert!((k.abs() - dk).abs() < 1e-12);
            assert!((c - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn gradient_of_sine_2d() {
        let g = Grid::new(&[2.0 * PI, 4.0 * PI], &[32, 64]).unwrap();
        let f = RealField::from_fn(&g, |x| (3.0 * x[0]).sin() * (0.5 * x[1]).cos());
        let grad = spectral_gradient(&f);
        for i in 0..g.len() {
            let x = g.position(i);
            let gx = 3.0 * (3.0 * x[0]).cos() * (0.5 * x[1]).cos();
            let gy = -0.5 * (3.0 * x[0]).sin() * (0.5 * x[1]).sin();
            assert!((grad[0].values()[i] - gx).abs() < 1e-10);
            assert!((grad[1].values()[i] - gy).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_kills_constants() {
        let g = make_grid(1, 5.0, 16).unwrap();
        let grad = spectral_gradient(&RealField::constant(&g, -2.0));
        assert!(grad[0].max_abs() < 1e-14);
    }

    #[test]
    fn nyquist_zeroed_in_derivative_only() {
        let g = make_grid(1, 2.0 * PI, 8).unwrap();
        let d = g.derivative_table(0);
        assert_eq!(d[4], 0.0);
        let lap = g.radial_table(|k2| -k2);
        assert_eq!(lap[4], -16.0);
        let mask = g.dealias_mask();
        assert_eq!(mask, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn periodic_displacement_wraps() {
        let g = make_grid(1, 10.0, 8).unwrap();
        let d = g.periodic_displacement([9.5, 0.0], [0.5, 0.0]);
        assert!((d[0] + 1.0).abs() < 1e-14);
    }
}
