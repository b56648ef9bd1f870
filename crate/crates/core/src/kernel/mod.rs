//! Euclidean propagator `K(x, τ; x₀)` on the circle.
//!
//! Two independent evaluations are provided: the eigenfunction expansion
//! ([`spectral`]) and the sum over windings weighted by entries of the
//! n-times scattering matrix ([`pathsum`]). [`closed_form`] gives the image
//! series for subfamilies with momentum-independent S-matrices and
//! [`worldlines`] enumerates the scattering histories behind `S⁽ⁿ⁾`.
//!
//! The kernel is Hermitian, `K(x, τ; x₀) = K(x₀, τ; x)*`; it is real only
//! for time-reversal invariant interactions (`e_y = 0`).

pub mod closed_form;
pub mod pathsum;
pub mod spectral;
pub mod worldlines;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circle_spectrum::CircleSystem;
use crate::error::{Error, Result};
use crate::mat2::C64;

pub use closed_form::kernel_closed_form;
pub use pathsum::{kernel_pathsum, PathQuad};
pub use spectral::{kernel_spectral, SpectralExpansion};
pub use worldlines::{grouped_weights, worldline_weights, Direction, Worldline, WorldlineEvent};

/// Tail level used for spectral truncation: `e^{−k_max²τ} = SPECTRAL_TAIL`.
pub const SPECTRAL_TAIL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelQuery {
    pub x: f64,
    pub x0: f64,
    pub tau: f64,
    /// Cap on the number of positive roots per branch in the spectral sum.
    pub m_max: Option<usize>,
    /// Momentum cutoff of the spectral sum; defaults to the tail bound.
    pub k_max: Option<f64>,
    /// Lower bound on the number of windings in the path sum.
    pub n_max: Option<usize>,
    pub quad: PathQuad,
}

impl KernelQuery {
    pub fn new(x: f64, x0: f64, tau: f64) -> Self {
        KernelQuery { x, x0, tau, m_max: None, k_max: None, n_max: None, quad: PathQuad::default() }
    }

    pub fn validate(&self, sys: &CircleSystem) -> Result<()> {
        let l = sys.length;
        for (name, v) in [("x", self.x), ("x0", self.x0)] {
            if !(v > 0.0 && v < l) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside (0, {l})")));
            }
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {}", self.tau)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    Spectral,
    Pathsum,
    Closed,
    Both,
}

impl std::str::FromStr for KernelMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(KernelMethod::Spectral),
            "pathsum" | "path_sum" | "path-sum" => Ok(KernelMethod::Pathsum),
            "closed" => Ok(KernelMethod::Closed),
            "both" => Ok(KernelMethod::Both),
            other => Err(Error::InvalidParameter(format!("unknown kernel method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: C64,
    pub method: KernelMethod,
    pub est_err: f64,
    /// Roots used (spectral) or windings summed (path sum, closed form).
    pub terms: usize,
}

/// Free heat kernel at separation `d`: `e^{−d²/4τ}/√(4πτ)`.
#[inline]
pub fn gaussian(d: f64, tau: f64) -> f64 {
    (-d * d / (4.0 * tau)).exp() / (4.0 * PI * tau).sqrt()
}

/// Windings needed for Gaussian image terms to drop below `eps`.
pub fn gaussian_winding_cutoff(tau: f64, length: f64, eps: f64) -> usize {
    ((4.0 * tau * (1.0 / eps).ln()).sqrt() / length).ceil() as usize + 2
}
