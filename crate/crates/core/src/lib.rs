//! Scattering off a point interaction on the line and on a circle: phase
//! shifts, S-matrices and their powers, circle spectra, trace formulae and
//! Euclidean heat kernels.

pub mod accel;
pub mod circle_spectrum;
pub mod cli;
pub mod error;
pub mod kernel;
pub mod line_scattering;
pub mod mat2;
pub mod params;
pub mod quadrature;
pub mod trace_formula;

pub use error::{Error, Result};
