//! Initial data and seeded random fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::InitialData;
use super::LabError;
use crate::grid::{Grid, RealField};
use crate::linsemi::build_near_eigenmode;

/// Independent streams drawn from one config seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Initial = 1,
    Samples = 2,
    Semigroup = 3,
}

/// ChaCha8 generator for `(seed, stream, index)`; distinct streams never
/// overlap.
pub fn rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    r.set_stream(stream as u64);
    r
}

fn gaussian_profile(grid: &Grid, center: [f64; 2], width: f64) -> RealField {
    let dim = grid.dim();
    RealField::from_fn(grid, |x| {
        let d = grid.periodic_displacement(x, center);
        let r2: f64 = d[..dim].iter().map(|v| v * v).sum();
        (-r2 / (2.0 * width * width)).exp()
    })
}

/// Samples `data` on `grid`; `seed` drives the random variant.
pub fn initial_field(grid: &Grid, background: f64, data: &InitialData, seed: u64) -> Result<RealField, LabError> {
    let dim = grid.dim();
    let field = match data {
        InitialData::Gaussian {
            center,
            width,
            amplitude,
            mass,
        } => {
            let c = match center {
                Some(c) => {
                    let mut out = [0.0; 2];
                    out[..c.len()].copy_from_slice(c);
                    out
                }
                None => grid.center(),
            };
            let profile = gaussian_profile(grid, c, *width);
            let amp = match (amplitude, mass) {
                (_, Some(m)) => m / (width * (2.0 * std::f64::consts::PI).sqrt()).powi(dim as i32),
                (Some(a), None) => *a,
                (None, None) => 1.0,
            };
            profile.scale(amp)
        }
        InitialData::Packet { k, width, amplitude } => match k {
            None => build_near_eigenmode(grid, background, *amplitude, *width)?,
            Some(k) => {
                let c = grid.center();
                let packet = gaussian_profile(grid, c, *width)
                    .mul(&RealField::from_fn(grid, |x| (k * (x[0] - c[0])).cos()))?
                    .scale(*amplitude);
                let mean = packet.mean();
                packet.add_constant(-mean)
            }
        },
        InitialData::Comb {
            period,
            width,
            amplitude,
        } => RealField::from_fn(grid, |x| {
            (0..dim)
                .map(|a| {
                    let y = x[a] / period;
                    let d = (y - y.round()) * period;
                    (-d * d / (2.0 * width * width)).exp()
                })
                .product::<f64>()
                * amplitude
        }),
        InitialData::Constant { value } => RealField::constant(grid, *value),
        InitialData::Random { amplitude, width, modes } => {
            random_localized(grid, *amplitude, *width, *modes, &mut rng(seed, Stream::Initial, 0))
        }
        InitialData::Zero => RealField::zeros(grid),
    };
    Ok(field)
}

/// A Gaussian envelope of width `width` times `1 + 0.5 sum a_j cos(k_j . x + phi_j) / modes`
/// with random low wavenumbers, scaled to `||f||_inf = amplitude`.
pub fn random_localized(grid: &Grid, amplitude: f64, width: f64, modes: usize, rng: &mut ChaCha8Rng) -> RealField {
    let dim = grid.dim();
    let c = grid.center();
    let terms: Vec<([f64; 2], f64, f64)> = (0..modes)
        .map(|_| {
            let mut k = [0.0; 2];
            for slot in k.iter_mut().take(dim) {
                *slot = rng.random_range(-1.0..1.0) / width;
            }
            (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let envelope = gaussian_profile(grid, c, width);
    let modulation = RealField::from_fn(grid, |x| {
        let wave: f64 = terms
            .iter()
            .map(|(k, a, ph)| a * (k[0] * (x[0] - c[0]) + k[1] * (x[1] - c[1]) + ph).cos())
            .sum();
        1.0 + 0.5 * wave / modes as f64
    });
    let f = envelope.mul(&modulation).expect("same grid");
    let sup = f.max_abs();
    f.scale(amplitude / sup)
}

/// Sum of a few random lattice modes plus a random number of bumps: smooth,
/// non-decaying, sign-changing test fields for the norm checks.
pub fn random_test_field(grid: &Grid, rng: &mut ChaCha8Rng) -> RealField {
    let dim = grid.dim();
    let base = std::f64::consts::TAU;
    let nmodes = rng.random_range(1..=6usize);
    let modes: Vec<([f64; 2], f64, f64)> = (0..nmodes)
        .map(|_| {
            let mut k = [0.0; 2];
            for (a, slot) in k.iter_mut().enumerate().take(dim) {
                *slot = base * rng.random_range(0..=12i32) as f64 / grid.extent(a);
            }
            (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..base))
        })
        .collect();
    let nbumps = rng.random_range(0..=3usize);
    let bumps: Vec<([f64; 2], f64, f64)> = (0..nbumps)
        .map(|_| {
            let mut c = [0.0; 2];
            for (a, slot) in c.iter_mut().enumerate().take(dim) {
                *slot = rng.random_range(0.0..grid.extent(a));
            }
            (c, rng.random_range(0.3..2.0), rng.random_range(-3.0..3.0))
        })
        .collect();
    let offset = rng.random_range(-0.5..0.5);
    RealField::from_fn(grid, |x| {
        let waves: f64 = modes
            .iter()
            .map(|(k, a, ph)| a * (k[0] * x[0] + k[1] * x[1] + ph).cos())
            .sum();
        let peaks: f64 = bumps
            .iter()
            .map(|(c, w, a)| {
                let d = grid.periodic_displacement(x, *c);
                let r2: f64 = d[..dim].iter().map(|v| v * v).sum();
                a * (-r2 / (2.0 * w * w)).exp()
            })
            .sum();
        offset + waves + peaks
    })
}
