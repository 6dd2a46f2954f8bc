//! The Bessel potential `K = (1 - Laplacian)^-1` and the operators built from it.
//!
//! Everything here is a Fourier multiplier on the grid lattice:
//!
//! | operator      | symbol                  |
//! |---------------|-------------------------|
//! | `K *`         | `1 / (1 + |k|^2)`       |
//! | `d_j K *`     | `i k_j / (1 + |k|^2)`   |
//! | `-Laplace K *`| `|k|^2 / (1 + |k|^2)`   |
//!
//! The physical-space kernel is only available in closed form in 1D
//! ([`bessel_kernel_1d`]) and is used as a reference, never to compute.

use crate::grid::{forward_transform, inverse_transform, Grid, RealField, SpectralField};

/// Tabulated `1/(1+|k|^2)` together with the derived multipliers.
#[derive(Clone, Debug)]
pub struct BesselMultiplier {
    grid: Grid,
    symbol: Vec<f64>,
    gradient: Vec<Vec<f64>>,
    neg_laplace: Vec<f64>,
}

impl BesselMultiplier {
    pub fn new(grid: &Grid) -> Self {
        let symbol = grid.radial_table(|k2| 1.0 / (1.0 + k2));
        let gradient = (0..grid.dim())
            .map(|axis| {
                grid.derivative_table(axis)
                    .into_iter()
                    .zip(&symbol)
                    .map(|(k, s)| k * s)
                    .collect()
            })
            .collect();
        let neg_laplace = grid.radial_table(|k2| k2 / (1.0 + k2));
        BesselMultiplier {
            grid: grid.clone(),
            symbol,
            gradient,
            neg_laplace,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `1/(1+|k|^2)` in storage order.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// `k_j/(1+|k|^2)` (Nyquist zeroed); apply with [`SpectralField::multiply_imag`].
    pub fn gradient_symbol(&self, axis: usize) -> &[f64] {
        &self.gradient[axis]
    }

    /// `|k|^2/(1+|k|^2)` in storage order.
    pub fn neg_laplace_symbol(&self) -> &[f64] {
        &self.neg_laplace
    }

    pub fn convolve_spectral(&self, uhat: &SpectralField) -> SpectralField {
        uhat.multiply(&self.symbol)
    }

    pub fn gradient_spectral(&self, uhat: &SpectralField) -> Vec<SpectralField> {
        self.gradient.iter().map(|m| uhat.multiply_imag(m)).collect()
    }

    pub fn neg_laplace_spectral(&self, uhat: &SpectralField) -> SpectralField {
        uhat.multiply(&self.neg_laplace)
    }
}

/// Solves `-Laplace psi + psi = u` on the torus, i.e. `psi = K * u`.
pub fn solve_chemoattractant(u: &RealField) -> RealField {
    let ops = BesselMultiplier::new(u.grid());
    inverse_transform(&ops.convolve_spectral(&forward_transform(u)))
}

/// Closed-form 1D Bessel potential `K(x) = exp(-|x|)/2`.
pub fn bessel_kernel_1d(x: f64) -> f64 {
    0.5 * (-x.abs()).exp()
}

/// Derivative of [`bessel_kernel_1d`] (taken as 0 at the origin).
pub fn bessel_kernel_1d_derivative(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -0.5 * x.signum() * (-x.abs()).exp()
    }
}

/// `||K'||_r` over the real line in closed form: `(2^(1-r)/r)^(1/r)`.
pub fn bessel_gradient_norm_1d(r: f64) -> f64 {
    if r.is_infinite() {
        0.5
    } else {
        (2f64.powf(1.0 - r) / r).powf(1.0 / r)
    }
}

/// `grad K * u`, one field per axis.
pub fn grad_k_conv(u: &RealField) -> Vec<RealField> {
    let ops = BesselMultiplier::new(u.grid());
    ops.gradient_spectral(&forward_transform(u))
        .iter()
        .map(inverse_transform)
        .collect()
}

/// `-Laplace K * u = u - K * u`.
pub fn neg_laplace_k_conv(u: &RealField) -> RealField {
    let ops = BesselMultiplier::new(u.grid());
    inverse_transform(&ops.neg_laplace_spectral(&forward_transform(u)))
}
