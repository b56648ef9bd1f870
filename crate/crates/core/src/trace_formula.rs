//! Trace formulae on the circle:
//!
//! ```text
//! Σ_{k ∈ σ±} F(k) = Σ_{n∈ℤ} ∫ dk/2π |f±'(k)| F(k) e^{i n f±(k)}
//! ```
//!
//! The left side sums a test function over every root of `f±(k) ∈ 2πℤ`,
//! negative roots and the `k = 0` root (fake or not) included. The right
//! side is a sum of oscillatory integrals; the free point reduces it to
//! Poisson summation.

use std::f64::consts::{E, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accel::accelerated_limit;
use crate::circle_spectrum::CircleSystem;
use crate::error::{Error, Result};
use crate::mat2::C64;
use crate::params::Branch;
use crate::quadrature::{composite_nodes, GaussLegendre};

/// Smooth, rapidly decaying test functions `F(k) = e^{−σ²k²}·p(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TestFunction {
    Gaussian { sigma: f64 },
    /// Polynomial coefficients in ascending powers of `k`.
    GaussianTimesPoly { sigma: f64, coeffs: Vec<f64> },
}

impl TestFunction {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let f = TestFunction::Gaussian { sigma };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.sigma();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {s}")));
        }
        if let TestFunction::GaussianTimesPoly { coeffs, .. } = self {
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParameter("polynomial coefficients must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        match self {
            TestFunction::Gaussian { sigma } | TestFunction::GaussianTimesPoly { sigma, .. } => *sigma,
        }
    }

    pub fn eval(&self, k: f64) -> f64 {
        let s = self.sigma();
        let g = (-(s * k) * (s * k)).exp();
        match self {
            TestFunction::Gaussian { .. } => g,
            TestFunction::GaussianTimesPoly { coeffs, .. } => {
                g * coeffs.iter().rev().fold(0.0, |acc, c| acc * k + c)
            }
        }
    }

    /// `C` with `|F(k)| ≤ C e^{−σ²k²/2}`.
    pub fn decay_constant(&self) -> f64 {
        match self {
            TestFunction::Gaussian { .. } => 1.0,
            TestFunction::GaussianTimesPoly { sigma, coeffs } => {
                let s2 = sigma * sigma;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        let jf = j as f64;
                        let peak = if j == 0 { 1.0 } else { (jf / (E * s2)).powf(0.5 * jf) };
                        c.abs() * peak
                    })
                    .sum()
            }
        }
    }

    /// Upper bound of `|F(k)|` for `|k'| ≥ |k|`.
    pub fn bound(&self, k: f64) -> f64 {
        let s = self.sigma();
        self.decay_constant() * (-0.5 * (s * k) * (s * k)).exp()
    }

    /// Smallest `K` with `bound(K) ≤ eps`.
    pub fn cutoff(&self, eps: f64) -> f64 {
        let c = self.decay_constant().max(f64::MIN_POSITIVE);
        if c <= eps {
            return 0.0;
        }
        (2.0 * (c / eps).ln()).sqrt() / self.sigma()
    }
}

/// Bound on the neglected part of `Σ F(k_m)` beyond `|k| > k_max`, using a
/// root density of at most `sup|f'|/2π` per unit `k`.
pub fn lhs_tail_bound(sys: &CircleSystem, f: &TestFunction, k_max: f64) -> f64 {
    let density = fprime_sup(sys) / TAU;
    let s2 = f.sigma() * f.sigma();
    2.0 * f.bound(k_max) * (1.0 + density / (s2 * k_max))
}

fn fprime_sup(sys: &CircleSystem) -> f64 {
    sys.length + 2.0 * sys.interaction.length_scale_sum()
}

/// `Σ F(k)` over the roots of `σ_branch` in `[−k_max, k_max]`.
pub fn lhs_spectral_sum(
    sys: &CircleSystem,
    branch: Branch,
    f: &TestFunction,
    k_max: f64,
    tol: f64,
) -> Result<f64> {
    f.validate()?;
    let tail = lhs_tail_bound(sys, f, k_max);
    if tail > tol {
        return Err(Error::Truncation(format!(
            "k_max = {k_max} leaves a tail of up to {tail:e} (> {tol:e})"
        )));
    }
    let roots = sys.trace_roots(branch, k_max, crate::circle_spectrum::DEFAULT_TOL)?;
    let mut vals: Vec<f64> = roots.iter().map(|r| f.eval(r.k)).collect();
    // Small terms first for a reproducible, accurate sum.
    vals.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    Ok(vals.iter().sum())
}

/// Quadrature controls for the momentum integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub nodes_per_panel: usize,
    /// Target for the difference between successive panel doublings.
    pub rel_tol: f64,
    pub max_doublings: usize,
    /// Tail level at which the `k` range is cut.
    pub tail_eps: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            nodes_per_panel: 20,
            rel_tol: 1e-13,
            max_doublings: 6,
            tail_eps: 1e-18,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhsResult {
    /// Accelerated limit of the symmetric partial sums.
    pub value: f64,
    /// Imaginary part of the plain symmetric sum.
    pub imag: f64,
    /// Plain symmetric sum over `|n| ≤ n_max`.
    pub plain: f64,
    /// Error estimate of `value` from truncating the `n` sum.
    pub est_trunc_err: f64,
    /// Difference between the last two panel refinements.
    pub quad_err: f64,
    pub panels: usize,
}

/// Breakpoints in `[−K, K]`: zeros of `f'` (kinks of `|f'|`) and points where
/// `f'` itself has a kink (vanishing discriminant with `|e_x| = 1`).
fn breakpoints(sys: &CircleSystem, branch: Branch, k_cut: f64, max_width: f64) -> Vec<f64> {
    let lmax = sys.interaction.length_scale_sum();
    let h_at = |k: f64| {
        let feature = if lmax > 0.0 { 0.05 * (1.0 / lmax + k.abs()) } else { f64::INFINITY };
        feature.min(max_width).min(0.05 * sys.length.max(1.0 / k_cut))
    };
    let mut grid = vec![-k_cut];
    let mut k = -k_cut;
    while k < k_cut {
        k = (k + h_at(k).min(h_at(k + h_at(k)))).min(k_cut);
        grid.push(k);
    }
    let kinks = sys.interaction.transverse_norm2() < 1e-24;
    let cos_dm = |k: f64| sys.interaction.big_delta(k).1.cos();
    let fp = |k: f64| sys.fprime(branch, k);
    let fvals: Vec<f64> = grid.par_iter().map(|&k| fp(k)).collect();
    let cvals: Vec<f64> = if kinks {
        grid.par_iter().map(|&k| cos_dm(k)).collect()
    } else {
        Vec::new()
    };
    let mut out = vec![-k_cut];
    for i in 0..grid.len() - 1 {
        if (fvals[i] < 0.0) != (fvals[i + 1] < 0.0) {
            out.push(bisect(&fp, grid[i], grid[i + 1]));
        }
        if kinks && (cvals[i] < 0.0) != (cvals[i + 1] < 0.0) {
            out.push(bisect(&cos_dm, grid[i], grid[i + 1]));
        }
    }
    out.push(k_cut);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    out
}

fn bisect<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let neg = g(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) < 0.0) == neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `c_n = ∫ dk/2π |f'| F e^{inf}` for `n = 0..=n_max` on a node set.
fn fourier_coefficients(
    sys: &CircleSystem,
    branch: Branch,
    f: &TestFunction,
    nodes: &[(f64, f64)],
    n_max: usize,
) -> (Vec<C64>, Vec<C64>) {
    let samples: Vec<(f64, f64)> = nodes
        .par_iter()
        .map(|&(k, w)| {
            let weight = w * sys.fprime(branch, k).abs() * f.eval(k) / TAU;
            (weight, sys.f_continuous(branch, k))
        })
        .collect();
    let per_n = |sign: f64| -> Vec<C64> {
        (0..=n_max)
            .into_par_iter()
            .map(|n| {
                samples
                    .iter()
                    .map(|&(w, phase)| C64::from_polar(w, sign * n as f64 * phase))
                    .sum()
            })
            .collect()
    };
    (per_n(1.0), per_n(-1.0))
}

/// Symmetric partial sums `Σ_{|n| ≤ N}` for `N = 0..=n_max`.
fn partial_sums(pos: &[C64], neg: &[C64]) -> Vec<C64> {
    let mut acc = pos[0];
    let mut out = vec![acc];
    for n in 1..pos.len() {
        acc += pos[n] + neg[n];
        out.push(acc);
    }
    out
}

/// Right-hand side with `|n| ≤ n_max`, accelerated by Wynn's ε-algorithm.
pub fn rhs_fourier_sum(
    sys: &CircleSystem,
    branch: Branch,
    f: &TestFunction,
    n_max: usize,
    quad: &QuadSpec,
) -> Result<RhsResult> {
    f.validate()?;
    let k_cut = f.cutoff(quad.tail_eps).max(1e-6);
    // Node spacing ≤ 2π / (8 n_max sup|f'|) on average per panel.
    let osc = 8.0 * (n_max.max(1) as f64) * fprime_sup(sys);
    let mut width = quad.nodes_per_panel as f64 * TAU / osc;
    let breaks = breakpoints(sys, branch, k_cut, width);
    let rule = GaussLegendre::new(quad.nodes_per_panel);

    let mut prev: Option<Vec<C64>> = None;
    let mut quad_err = f64::INFINITY;
    let mut sums = Vec::new();
    let mut panels = 0;
    for _ in 0..=quad.max_doublings {
        let nodes = composite_nodes(&rule, &breaks, width);
        panels = nodes.len() / quad.nodes_per_panel;
        let (pos, neg) = fourier_coefficients(sys, branch, f, &nodes, n_max);
        sums = partial_sums(&pos, &neg);
        if let Some(p) = &prev {
            quad_err = sums
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let scale = sums.iter().map(|s| s.norm()).fold(1.0, f64::max);
            if quad_err <= quad.rel_tol * scale {
                break;
            }
        }
        prev = Some(sums.clone());
        width *= 0.5;
    }
    let re: Vec<f64> = sums.iter().map(|s| s.re).collect();
    let (value, trunc) = accelerated_limit(&re);
    let last = *sums.last().expect("n_max + 1 partial sums");
    Ok(RhsResult {
        value,
        imag: last.im,
        plain: last.re,
        est_trunc_err: trunc,
        quad_err,
        panels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub branch: Branch,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub est_trunc_err: f64,
    pub rhs_plain: f64,
    pub rhs_imag: f64,
    pub quad_err: f64,
}

/// Both sides of the trace formula for one branch.
pub fn trace_check(
    sys: &CircleSystem,
    branch: Branch,
    f: &TestFunction,
    n_max: usize,
    k_max: Option<f64>,
    quad: &QuadSpec,
) -> Result<TraceReport> {
    let k_max = k_max.unwrap_or_else(|| f.cutoff(1e-18).max(1.0 / sys.length));
    let lhs = lhs_spectral_sum(sys, branch, f, k_max, 1e-14)?;
    let rhs = rhs_fourier_sum(sys, branch, f, n_max, quad)?;
    Ok(TraceReport {
        branch,
        lhs,
        rhs: rhs.value,
        abs_err: (lhs - rhs.value).abs(),
        est_trunc_err: rhs.est_trunc_err,
        rhs_plain: rhs.plain,
        rhs_imag: rhs.imag,
        quad_err: rhs.quad_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{PointInteraction, Preset};
    use std::f64::consts::PI;

    fn free() -> CircleSystem {
        CircleSystem::new(Preset::Reflectionless { theta: 0.0 }.interaction(1.0).unwrap(), 1.0).unwrap()
    }

    fn generic() -> CircleSystem {
        let ey: f64 = 0.5;
        let ez = (1.0 - 0.09 - ey * ey).sqrt();
        let p = PointInteraction::new(PI / 2.0, 4.0 * PI / 3.0, [0.3, ey, ez], 1.0).unwrap();
        CircleSystem::new(p, 1.0).unwrap()
    }

    #[test]
    fn test_function_bounds() {
        let f = TestFunction::GaussianTimesPoly { sigma: 0.7, coeffs: vec![1.0, -2.0, 0.5] };
        let c = f.decay_constant();
        for i in 0..2000 {
            let k = -20.0 + i as f64 * 0.02;
            assert!(f.eval(k).abs() <= c * (-0.5 * 0.49 * k * k).exp() * (1.0 + 1e-12));
        }
        assert!(f.bound(f.cutoff(1e-15)) <= 1e-15 * (1.0 + 1e-9));
        assert!(TestFunction::gaussian(0.0).is_err());
    }

    #[test]
    fn zero_function_gives_zero() {
        let f = TestFunction::GaussianTimesPoly { sigma: 0.5, coeffs: vec![] };
        let g = generic();
        assert_eq!(lhs_spectral_sum(&g, Branch::Plus, &f, 10.0, 1e-12).unwrap(), 0.0);
        let r = rhs_fourier_sum(&g, Branch::Plus, &f, 4, &QuadSpec::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn free_lhs_is_periodic_sum() {
        let f = TestFunction::gaussian(0.5).unwrap();
        let want: f64 = (-20..=20).map(|m| f.eval(TAU * m as f64)).sum();
        for b in Branch::BOTH {
            let got = lhs_spectral_sum(&free(), b, &f, 40.0, 1e-14).unwrap();
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn free_rhs_is_poisson() {
        let s = 0.5;
        let f = TestFunction::gaussian(s).unwrap();
        // (L/2π)∫ e^{−σ²k²} e^{inkL} dk = e^{−n²L²/(4σ²)} / (2σ√π)
        let term = |n: f64| (-(n * n) / (4.0 * s * s)).exp() / (2.0 * s * PI.sqrt());
        let r0 = rhs_fourier_sum(&free(), Branch::Minus, &f, 0, &QuadSpec::default()).unwrap();
        assert!((r0.value - term(0.0)).abs() < 1e-13);
        let r = rhs_fourier_sum(&free(), Branch::Minus, &f, 6, &QuadSpec::default()).unwrap();
        let want: f64 = term(0.0) + 2.0 * (1..=6).map(|n| term(n as f64)).sum::<f64>();
        assert!((r.plain - want).abs() < 1e-13);
    }

    #[test]
    fn lhs_stable_under_doubled_cutoff() {
        let g = generic();
        let f = TestFunction::gaussian(0.5).unwrap();
        for b in Branch::BOTH {
            let a = lhs_spectral_sum(&g, b, &f, 16.0, 1e-10).unwrap();
            let c = lhs_spectral_sum(&g, b, &f, 32.0, 1e-10).unwrap();
            assert!((a - c).abs() < 1e-10);
        }
        assert!(matches!(
            lhs_spectral_sum(&g, Branch::Plus, &f, 2.0, 1e-10),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn generic_identity_and_reality() {
        let g = generic();
        let f = TestFunction::gaussian(0.5).unwrap();
        for b in Branch::BOTH {
            let r = trace_check(&g, b, &f, 40, None, &QuadSpec::default()).unwrap();
            assert!(r.abs_err < 1e-7 * r.lhs.abs().max(1.0), "{r:?}");
            assert!(r.rhs_imag.abs() < 1e-9);
        }
    }

    #[test]
    fn polynomial_test_function() {
        let g = generic();
        let f = TestFunction::GaussianTimesPoly { sigma: 0.4, coeffs: vec![1.0, 0.3, 0.2] };
        for b in Branch::BOTH {
            let r = trace_check(&g, b, &f, 40, None, &QuadSpec::default()).unwrap();
            assert!(r.abs_err < 1e-7 * r.lhs.abs().max(1.0), "{r:?}");
        }
    }

    #[test]
    fn refinement_within_error_estimate() {
        let g = generic();
        let f = TestFunction::gaussian(0.5).unwrap();
        let q = QuadSpec::default();
        let a = rhs_fourier_sum(&g, Branch::Plus, &f, 20, &q).unwrap();
        let b = rhs_fourier_sum(&g, Branch::Plus, &f, 40, &q).unwrap();
        assert!((a.value - b.value).abs() <= a.est_trunc_err.max(1e-12) * 10.0 + 1e-12);
        let fine = QuadSpec { rel_tol: 1e-15, ..q };
        let c = rhs_fourier_sum(&g, Branch::Plus, &f, 20, &fine).unwrap();
        assert!((a.value - c.value).abs() <= a.quad_err.max(1e-13) * 10.0);
    }
}
