//! Spectral tools for the nonlinear Schrödinger equation with harmonic
//! confinement in one direction.

pub mod diagnostics;
pub mod error;
pub mod exponents;
pub mod functionals;
pub mod ground_state;
pub mod propagator;
pub mod lattice;
pub mod model;
pub mod samples;

pub use error::{Error, Result};
pub use lattice::{Field, Grid, GridSpec, Representation};
pub use model::{ModelParams, Sign};
