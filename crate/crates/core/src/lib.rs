//! Pseudo-spectral simulation and linear-stability toolkit for the
//! parabolic-elliptic Keller-Segel system
//!
//! ```text
//! u_t - Laplace u + div(u grad psi) = 0,   -Laplace psi + psi = u
//! ```
//!
//! on periodic boxes in one and two dimensions.

pub mod grid;
pub mod kernels;
pub mod linsemi;
pub mod norms;
pub mod solver;
pub mod lab;
