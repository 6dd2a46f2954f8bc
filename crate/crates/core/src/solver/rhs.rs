//! Right-hand sides of the full and the perturbation equation.
//!
//! The drift term is split around the spatial mean `m` of its argument,
//!
//! ```text
//! div(u grad K*u) = m Laplace K*u + div(w grad K*w),   w = u - m,
//! ```
//!
//! which is exact because `grad K * m = 0`. The first piece is linear and is
//! applied as a multiplier on every mode; only the genuinely quadratic second
//! piece is dealiased. With this split `nonlinear_rhs(A + v)` and
//! `perturbation_rhs(A, v)` agree to rounding error with dealiasing switched on.

use crate::grid::{forward_transform, inverse_transform, Grid, RealField, SpectralField};
use crate::kernels::BesselMultiplier;
use crate::linsemi::SemigroupSymbol;

/// Multiplier tables shared by the right-hand sides, the ETD stepper and the
/// Picard iterator.
#[derive(Clone, Debug)]
pub struct DriftOperator {
    grid: Grid,
    bessel: BesselMultiplier,
    derivative: Vec<Vec<f64>>,
    laplace: Vec<f64>,
    mask: Option<Vec<f64>>,
}

impl DriftOperator {
    pub fn new(grid: &Grid, dealias: bool) -> Self {
        DriftOperator {
            grid: grid.clone(),
            bessel: BesselMultiplier::new(grid),
            derivative: (0..grid.dim()).map(|a| grid.derivative_table(a)).collect(),
            laplace: grid.radial_table(|k2| -k2),
            mask: dealias.then(|| grid.dealias_mask()),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dealias(&self) -> bool {
        self.mask.is_some()
    }

    /// `|k|^2 / (1 + |k|^2)`, the symbol of `-Laplace K *`.
    pub fn neg_laplace_k(&self) -> &[f64] {
        self.bessel.neg_laplace_symbol()
    }

    /// Transform of `div(w grad K * w)` for the mean-free part `w` of `uhat`.
    pub fn quadratic_divergence(&self, uhat: &SpectralField) -> SpectralField {
        let mut w = uhat.clone();
        w.coefficients_mut()[0] = 0.0.into();
        if let Some(mask) = &self.mask {
            w = w.multiply(mask);
        }
        let w_phys = inverse_transform(&w);
        let n = self.grid.len();
        let mut div = SpectralField::zeros(&self.grid);
        for (axis, deriv) in self.derivative.iter().enumerate() {
            let drift = inverse_transform(&w.multiply_imag(self.bessel.gradient_symbol(axis)));
            let flux: Vec<f64> = w_phys.values().iter().zip(drift.values()).map(|(a, b)| a * b).collect();
            let mut fhat = forward_transform(&RealField::from_raw(&self.grid, flux));
            if let Some(mask) = &self.mask {
                fhat = fhat.multiply(mask);
            }
            let d = fhat.multiply_imag(deriv);
            for (acc, c) in div.coefficients_mut().iter_mut().zip(d.coefficients()).take(n) {
                *acc += c;
            }
        }
        div
    }

    /// Transform of `div(u grad K * u)` using the mean split.
    pub fn drift_divergence(&self, uhat: &SpectralField) -> SpectralField {
        let mean = uhat.coefficients()[0].re;
        let mut out = self.quadratic_divergence(uhat);
        for ((o, c), m) in out
            .coefficients_mut()
            .iter_mut()
            .zip(uhat.coefficients())
            .zip(self.bessel.neg_laplace_symbol())
        {
            *o -= c * (mean * m);
        }
        out
    }

    /// Transform of `Laplace u - chi div(u grad K * u)`.
    pub fn full_rhs_spectral(&self, uhat: &SpectralField, chi: f64) -> SpectralField {
        let mut out = uhat.multiply(&self.laplace);
        if chi != 0.0 {
            let drift = self.drift_divergence(uhat);
            for (o, d) in out.coefficients_mut().iter_mut().zip(drift.coefficients()) {
                *o -= chi * d;
            }
        }
        out
    }

    /// Transform of `Laplace v - A Laplace K*v - div(v grad K * v)`.
    pub fn perturbation_rhs_spectral(&self, symbol: &SemigroupSymbol, vhat: &SpectralField) -> SpectralField {
        let drift = self.drift_divergence(vhat);
        let mut out = vhat.multiply(symbol.h());
        for (o, d) in out.coefficients_mut().iter_mut().zip(drift.coefficients()) {
            *o = -*o - d;
        }
        out
    }
}

/// `Laplace u - div(u grad K * u)`.
pub fn nonlinear_rhs(u: &RealField) -> RealField {
    nonlinear_rhs_with_sensitivity(u, 1.0, true)
}

/// `Laplace u - chi div(u grad K * u)`; `chi = 0` leaves pure diffusion.
pub fn nonlinear_rhs_with_sensitivity(u: &RealField, chi: f64, dealias: bool) -> RealField {
    let op = DriftOperator::new(u.grid(), dealias);
    inverse_transform(&op.full_rhs_spectral(&forward_transform(u), chi))
}

/// `Laplace v - A Laplace K * v - div(v grad K * v)`.
pub fn perturbation_rhs(background: f64, v: &RealField) -> RealField {
    perturbation_rhs_dealiased(background, v, true)
}

pub fn perturbation_rhs_dealiased(background: f64, v: &RealField, dealias: bool) -> RealField {
    let op = DriftOperator::new(v.grid(), dealias);
    let symbol = SemigroupSymbol::new(v.grid(), background);
    inverse_transform(&op.perturbation_rhs_spectral(&symbol, &forward_transform(v)))
}
