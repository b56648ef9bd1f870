//! Winding sum of free propagation weighted by the n-times scattering
//! matrix, in Euclidean time:
//!
//! ```text
//! K = ∫dp/2π e^{−τp²} { e^{ip(x−x₀)}
//!       + Σ_{n≥1} [ S⁽ⁿ⁾₊₊ e^{ip(nL+x−x₀)} + S⁽ⁿ⁾₋₊ e^{ip((n+1)L−x−x₀)}
//!                 + S⁽ⁿ⁾₋₋ e^{−ip(−nL+x−x₀)} + S⁽ⁿ⁾₊₋ e^{−ip((1−n)L−x−x₀)} ] }
//!     + (negative-energy and linear zero-energy states)
//! ```
//!
//! Genuine constant zero modes are already contained in the winding sum.
//! When `f±'` has (near-)stationary points the winding terms decay slowly,
//! so the partial sums are extrapolated with Wynn's ε-algorithm and the
//! number of windings grows until successive estimates agree. Close to a
//! zero-energy resonance the terms decay so slowly that the cap is reached
//! first; the returned error estimate then reflects the reduced accuracy.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gaussian_winding_cutoff, KernelMethod, KernelQuery, KernelValue};
use crate::accel::accelerated_limit;
use crate::circle_spectrum::{CircleSystem, EigenState, RootKind};
use crate::error::{Error, Result};
use crate::line_scattering::s_matrix;
use crate::mat2::{Mat2C, C64};
use crate::params::Branch;
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathQuad {
    pub nodes_per_panel: usize,
    /// Integrand level at which the momentum range is cut.
    pub tail_eps: f64,
    /// Target for the winding extrapolation, relative to `1/√(4πτ)`.
    pub rel_tol: f64,
    /// Hard cap on the number of windings.
    pub n_cap: usize,
}

impl Default for PathQuad {
    fn default() -> Self {
        PathQuad { nodes_per_panel: 20, tail_eps: 1e-16, rel_tol: 1e-11, n_cap: 2048 }
    }
}

/// Minimum winding count: Gaussian image decay below `1e-12`.
pub fn default_n_max(sys: &CircleSystem, tau: f64) -> usize {
    gaussian_winding_cutoff(tau, sys.length, 1e-12)
}

/// Gauss-Legendre panels on `[-p_max, p_max]` sized by the local oscillation
/// rate of the winding-`n_max` integrand. The phase of `S⁽ⁿ⁾(p)` turns at
/// `n·2|L±|/(1+p²L±²)`, which is only large for `|p| ≲ 1/|L±|`.
fn momentum_nodes(sys: &CircleSystem, q: &KernelQuery, n_max: usize, p_max: f64) -> Vec<(f64, f64)> {
    let l = sys.length;
    let n = n_max as f64;
    let lengths: Vec<f64> = Branch::BOTH
        .iter()
        .filter_map(|&b| sys.interaction.phase_shift_spec(b).length())
        .map(f64::abs)
        .collect();
    let rate = |p: f64| -> f64 {
        let phase: f64 = lengths.iter().map(|&a| 2.0 * a / (1.0 + p * p * a * a)).sum();
        (n + 1.0) * l + n * phase
    };
    let rule = GaussLegendre::new(q.quad.nodes_per_panel);
    let per_panel = q.quad.nodes_per_panel as f64 * TAU / 8.0;
    let mut edges = vec![0.0];
    let mut p = 0.0;
    while p < p_max {
        // The rate decreases in |p|, so the inner edge bounds the panel.
        p = (p + per_panel / rate(p)).min(p_max);
        edges.push(p);
    }
    let mut out = Vec::with_capacity(2 * edges.len() * rule.nodes.len());
    for w in edges.windows(2).rev() {
        out.extend(rule.mapped(-w[1], -w[0]));
    }
    for w in edges.windows(2) {
        out.extend(rule.mapped(w[0], w[1]));
    }
    out
}

/// Per-winding contributions `t_0, …, t_{n_max}` of the momentum integral.
pub fn winding_terms(sys: &CircleSystem, q: &KernelQuery, n_max: usize) -> Vec<C64> {
    let l = sys.length;
    let tau = q.tau;
    let p_max = ((1.0 / q.quad.tail_eps).ln() / tau).sqrt() + 4.0 / l;
    let nodes = momentum_nodes(sys, q, n_max, p_max);

    let dx = q.x - q.x0;
    let s = q.x + q.x0;
    let chunk = |block: &[(f64, f64)]| -> Vec<C64> {
        let mut acc = vec![C64::new(0.0, 0.0); n_max + 1];
        for &(p, w) in block {
            let weight = w * (-tau * p * p).exp() / TAU;
            if weight == 0.0 {
                continue;
            }
            acc[0] += C64::from_polar(weight, p * dx);
            let sm = s_matrix(&sys.interaction, p);
            let step = C64::from_polar(1.0, p * l);
            let mut direct = C64::from_polar(1.0, p * (l + dx));
            let mut reflected = C64::from_polar(1.0, p * (2.0 * l - s));
            let mut direct_back = C64::from_polar(1.0, p * (l - dx));
            let mut reflected_back = C64::from_polar(1.0, p * s);
            let mut sn = Mat2C::identity();
            for slot in acc.iter_mut().skip(1) {
                sn = sn * sm;
                let v = sn.a11 * direct + sn.a21 * reflected + sn.a22 * direct_back + sn.a12 * reflected_back;
                *slot += v * weight;
                direct *= step;
                reflected *= step;
                direct_back *= step;
                reflected_back *= step;
            }
        }
        acc
    };
    let partial: Vec<Vec<C64>> = nodes.par_chunks(256).map(chunk).collect();
    let mut total = vec![C64::new(0.0, 0.0); n_max + 1];
    for part in &partial {
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    total
}

/// Negative-energy and linear zero-energy states, which the winding sum
/// does not contain.
pub fn extra_states(sys: &CircleSystem) -> Result<Vec<EigenState>> {
    sys.bound_states(sys.default_kappa_max())?
        .iter()
        .map(|r| sys.eigenstate(r))
        .collect()
}

fn extra_contribution(states: &[EigenState], q: &KernelQuery) -> C64 {
    states
        .iter()
        .filter(|s| matches!(s.root.kind, RootKind::Bound | RootKind::ZeroEnergyLinear))
        .map(|s| s.eval(q.x) * s.eval(q.x0).conj() * s.time_weight(q.tau))
        .sum()
}

/// Accelerated winding sum without the extra states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingSum {
    pub value: C64,
    pub plain: C64,
    pub est_err: f64,
    pub n_used: usize,
}

pub fn winding_sum(sys: &CircleSystem, q: &KernelQuery) -> Result<WindingSum> {
    q.validate(sys)?;
    let floor = default_n_max(sys, q.tau);
    if let Some(n) = q.n_max {
        let d = ((n as f64 - 1.0) * sys.length - sys.length).max(0.0);
        let tail = (-d * d / (4.0 * q.tau)).exp();
        if tail >= 1e-12 {
            return Err(Error::Truncation(format!(
                "n_max = {n} leaves a Gaussian winding tail of {tail:e}"
            )));
        }
    }
    let mut n = q.n_max.unwrap_or(floor).max(floor).max(24).min(q.quad.n_cap);
    // Tolerances are relative to the free peak `1/√(4πτ)`; the value itself
    // can be exponentially small off the diagonal or nearly cancel against
    // bound-state terms.
    let scale = 1.0 / (4.0 * PI * q.tau).sqrt();
    let mut previous: Option<C64> = None;
    loop {
        let terms = winding_terms(sys, q, n);
        let mut acc = C64::new(0.0, 0.0);
        let mut re = Vec::with_capacity(terms.len());
        let mut im = Vec::with_capacity(terms.len());
        for t in &terms {
            acc += t;
            re.push(acc.re);
            im.push(acc.im);
        }
        let (vr, er) = accelerated_limit(&re);
        let (vi, ei) = accelerated_limit(&im);
        let value = C64::new(vr, vi);
        let mut err = er.max(ei);
        if let Some(p) = previous {
            err = err.max((value - p).norm());
        }
        if err <= q.quad.rel_tol * scale || n >= q.quad.n_cap {
            return Ok(WindingSum { value, plain: acc, est_err: err, n_used: n });
        }
        previous = Some(value);
        n = (2 * n).min(q.quad.n_cap);
    }
}

/// Path-sum evaluation of one kernel value, including bound contributions.
pub fn kernel_pathsum(sys: &CircleSystem, q: &KernelQuery) -> Result<KernelValue> {
    let w = winding_sum(sys, q)?;
    let extra = extra_contribution(&extra_states(sys)?, q);
    Ok(KernelValue {
        value: w.value + extra,
        method: KernelMethod::Pathsum,
        est_err: w.est_err,
        terms: w.n_used,
    })
}

/// The δ′ kernel image series `Σₙ {cos nθ G(nL+x−x₀) − sin nθ G((n+1)L−x−x₀)}`.
pub fn delta_prime_series(theta: f64, length: f64, x: f64, x0: f64, tau: f64) -> f64 {
    let n_max = gaussian_winding_cutoff(tau, length, 1e-20) as i64;
    let g = |d: f64| (-d * d / (4.0 * tau)).exp() / (4.0 * PI * tau).sqrt();
    (-n_max..=n_max)
        .map(|n| {
            let nf = n as f64;
            (nf * theta).cos() * g(nf * length + x - x0) - (nf * theta).sin() * g((nf + 1.0) * length - x - x0)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::gaussian;
    use crate::params::{delta_prime_theta, Preset};

    fn sys(p: Preset) -> CircleSystem {
        CircleSystem::new(p.interaction(1.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn reflectionless_winding_phases() {
        let th = 0.9;
        let s = sys(Preset::Reflectionless { theta: th });
        let q = KernelQuery::new(0.3, 0.7, 0.1);
        let v = kernel_pathsum(&s, &q).unwrap().value;
        let want: C64 = (-20..=20)
            .map(|n| C64::from_polar(gaussian(n as f64 + 0.3 - 0.7, 0.1), -(n as f64) * th))
            .sum();
        assert!((v - want).norm() < 1e-11, "{v} {want}");
    }

    #[test]
    fn delta_prime_matches_image_series() {
        let c = 0.5;
        let s = sys(Preset::DeltaPrime { c });
        let th = delta_prime_theta(c);
        for (x, x0) in [(0.2, 0.6), (0.5, 0.5), (0.9, 0.1)] {
            let v = kernel_pathsum(&s, &KernelQuery::new(x, x0, 0.1)).unwrap().value;
            let want = delta_prime_series(th, 1.0, x, x0, 0.1);
            assert!((v.re - want).abs() < 1e-9 * want.abs() && v.im.abs() < 1e-9 * want.abs());
        }
    }

    #[test]
    fn rejects_short_winding_cap() {
        let s = sys(Preset::Reflectionless { theta: 0.0 });
        let mut q = KernelQuery::new(0.3, 0.7, 1.0);
        q.n_max = Some(2);
        assert!(matches!(kernel_pathsum(&s, &q), Err(Error::Truncation(_))));
    }
}
