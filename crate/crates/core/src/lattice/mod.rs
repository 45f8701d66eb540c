//! Hermite × Fourier discretization: one confined axis `y`, periodic free axes `z`.
//!
//! Coefficient convention along `z`: on the centered grid `z_j = -L/2 + j·dz`,
//! `u(z_j) = Σ_q c_q e^{i k_q z_j}`, so `‖u‖² = L·Σ|c_q|²`.

mod field;
mod grid;
pub mod hermite;
pub mod io;

pub use field::{Field, Representation};
pub(crate) use field::{coeff_norm_sq, ladder, phys_integral, tail_fraction, Ladder};
pub use grid::{Grid, GridSpec, ZAxis};
