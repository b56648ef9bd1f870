//! Eigenfunction expansion of the Euclidean kernel.

use rayon::prelude::*;

use super::{KernelMethod, KernelQuery, KernelValue, SPECTRAL_TAIL};
use crate::circle_spectrum::{CircleSystem, EigenState, RootKind, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::mat2::C64;

/// All states needed for `τ ≥ tau_min`, computed once.
#[derive(Debug, Clone)]
pub struct SpectralExpansion {
    pub system: CircleSystem,
    pub tau_min: f64,
    pub k_max: f64,
    pub states: Vec<EigenState>,
}

/// `k_max` with `e^{−k_max²τ} = SPECTRAL_TAIL`.
pub fn spectral_k_max(tau: f64) -> f64 {
    ((1.0 / SPECTRAL_TAIL).ln() / tau).sqrt()
}

impl SpectralExpansion {
    pub fn new(system: &CircleSystem, tau_min: f64) -> Result<Self> {
        Self::with_m_max(system, tau_min, None)
    }

    /// As [`SpectralExpansion::new`], keeping at most `m_max` positive roots
    /// per branch; fails if that cuts below the truncation bound.
    pub fn with_m_max(system: &CircleSystem, tau_min: f64, m_max: Option<usize>) -> Result<Self> {
        Self::build(system, tau_min, None, m_max)
    }

    /// As [`SpectralExpansion::new`] with an explicit momentum cutoff, which
    /// must satisfy `e^{−k_max²τ} ≤ SPECTRAL_TAIL`.
    pub fn with_k_max(system: &CircleSystem, tau_min: f64, k_max: f64) -> Result<Self> {
        Self::build(system, tau_min, Some(k_max), None)
    }

    fn build(system: &CircleSystem, tau_min: f64, k_max: Option<f64>, m_max: Option<usize>) -> Result<Self> {
        if !(tau_min.is_finite() && tau_min > 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau_min}")));
        }
        let k_max = match k_max {
            None => spectral_k_max(tau_min),
            Some(k) => {
                let tail = (-k * k * tau_min).exp();
                if !(k > 0.0) || tail > SPECTRAL_TAIL {
                    return Err(Error::Truncation(format!("k_max = {k} leaves e^(-k^2 tau) = {tail:e}")));
                }
                k
            }
        };
        let mut states = system.physical_states(k_max, system.default_kappa_max(), DEFAULT_TOL)?;
        if let Some(m) = m_max {
            let before = states.len();
            states.retain(|s| s.root.kind != RootKind::Positive || s.root.m <= m as i64);
            if states.len() < before {
                let cut = states
                    .iter()
                    .filter(|s| s.root.kind == RootKind::Positive)
                    .map(|s| s.root.k)
                    .fold(0.0, f64::max);
                let tail = (-cut * cut * tau_min).exp();
                if tail > SPECTRAL_TAIL {
                    return Err(Error::Truncation(format!(
                        "m_max = {m} stops at k = {cut}, where e^(-k^2 tau) = {tail:e}"
                    )));
                }
            }
        }
        Ok(SpectralExpansion { system: *system, tau_min, k_max, states })
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        if tau < self.tau_min * (1.0 - 1e-12) {
            return Err(Error::Truncation(format!(
                "expansion built for tau >= {}, asked for {tau}",
                self.tau_min
            )));
        }
        Ok(())
    }

    /// `Σ e^{−E τ} ψ(x) ψ(x₀)*`.
    pub fn eval(&self, x: f64, x0: f64, tau: f64) -> Result<C64> {
        self.check_tau(tau)?;
        let mut terms: Vec<C64> = self
            .states
            .par_iter()
            .map(|s| s.eval(x) * s.eval(x0).conj() * s.time_weight(tau))
            .collect();
        terms.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        Ok(terms.iter().sum())
    }

    /// `Σ e^{−E τ}`, the trace of the kernel.
    pub fn partition_function(&self, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        let mut w: Vec<f64> = self.states.iter().map(|s| s.time_weight(tau)).collect();
        w.sort_by(f64::total_cmp);
        Ok(w.iter().sum())
    }

    /// Rough bound on the neglected tail at `τ`.
    pub fn tail_estimate(&self, tau: f64) -> f64 {
        let sys = &self.system;
        let density = (sys.length + 2.0 * sys.interaction.length_scale_sum()) / std::f64::consts::TAU;
        let amp = self
            .states
            .iter()
            .filter(|s| s.root.kind == RootKind::Positive)
            .map(|s| s.norm2 * (s.a.norm() + s.b.norm()).powi(2))
            .fold(0.0, f64::max);
        let k = self.k_max;
        2.0 * amp * (-k * k * tau).exp() * (1.0 + density / (2.0 * tau * k))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Spectral evaluation of one kernel value.
pub fn kernel_spectral(sys: &CircleSystem, q: &KernelQuery) -> Result<KernelValue> {
    q.validate(sys)?;
    let exp = SpectralExpansion::build(sys, q.tau, q.k_max, q.m_max)?;
    Ok(KernelValue {
        value: exp.eval(q.x, q.x0, q.tau)?,
        method: KernelMethod::Spectral,
        est_err: exp.tail_estimate(q.tau),
        terms: exp.len(),
    })
}
