//! Spectrum of a free particle on a circle of circumference `L` with one
//! point interaction.
//!
//! Positive energies `E = k²` solve `e^{−ikL} = s±(k)`, i.e. `f±(k) ∈ 2πℤ`
//! with `f±(k) = kL + (1/i) log s±(k)`. The continuous representative used
//! throughout is
//!
//! ```text
//! f±(k) = kL + Δ₊(k) + π/2 ± arccos(e_x sin Δ₋(k)),
//! ```
//!
//! which is the exact phase of `s±(k)` and is continuous on all of ℝ. At a
//! physical root `f±'` equals the norm integral of the eigenfunction, hence
//! it is positive there and every level `2πj` is crossed upwards; the scan
//! below relies on this and flags any violation.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::line_scattering::{coefficients_from_factors, s_eigen, s_from_coefficients};
use crate::mat2::{c, Mat2C, C64};
use crate::params::{Branch, PointInteraction};
use crate::quadrature::{composite_nodes, GaussLegendre};

/// Default residual tolerance for accepted roots.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Below this `|ε|` numerator the S-matrix is a multiple of the identity and
/// the eigenvector convention for coincident eigenvalues applies.
const COINCIDENT_EPS: f64 = 1e-12;

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleSystem {
    pub interaction: PointInteraction,
    #[serde(rename = "L")]
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    Positive,
    /// Root on `k < 0`; only enters trace-formula root sets.
    Negative,
    ZeroGenuine,
    ZeroFake,
    Bound,
    ZeroEnergyLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRoot {
    pub branch: Branch,
    pub m: i64,
    /// Wavenumber, or `κ` for bound states.
    pub k: f64,
    /// `f'` at the root; for bound states the derivative of
    /// `κL − ln s(iκ)` with respect to `κ`.
    pub fprime: f64,
    pub kind: RootKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenState {
    pub root: SpectrumRoot,
    #[serde(rename = "A")]
    pub a: C64,
    #[serde(rename = "B")]
    pub b: C64,
    /// `|N|²`.
    pub norm2: f64,
    #[serde(rename = "L")]
    pub length: f64,
}

impl EigenState {
    /// `ψ(x)` with `N = √norm2`. Plane-wave states use
    /// `A e^{ikx} + B e^{ik(L−x)}`, bound states `A e^{−κx} + B e^{−κ(L−x)}`
    /// and the zero-energy linear state `A + Bx`.
    pub fn eval(&self, x: f64) -> C64 {
        let n = self.norm2.sqrt();
        let k = self.root.k;
        let l = self.length;
        let raw = match self.root.kind {
            RootKind::Bound => self.a * (-k * x).exp() + self.b * (-k * (l - x)).exp(),
            RootKind::ZeroEnergyLinear => self.a + self.b * x,
            _ => self.a * C64::from_polar(1.0, k * x) + self.b * C64::from_polar(1.0, k * (l - x)),
        };
        raw * n
    }

    /// Euclidean-time weight `e^{−Eτ}`.
    pub fn time_weight(&self, tau: f64) -> f64 {
        match self.root.kind {
            RootKind::Bound => (self.root.k * self.root.k * tau).exp(),
            RootKind::ZeroEnergyLinear | RootKind::ZeroGenuine => 1.0,
            _ => (-self.root.k * self.root.k * tau).exp(),
        }
    }
}

/// Evaluates `ψ(x)` for a state; `x` is expected in `(0, L)`.
pub fn eigenfunction_eval(state: &EigenState, x: f64) -> C64 {
    state.eval(x)
}

/// Quadrature rule on `(0, L)` for norms and overlaps of eigenfunctions.
pub fn interval_rule(length: f64, panels: usize) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(32);
    composite_nodes(&gl, &[0.0, length], length / panels.max(1) as f64)
}

impl CircleSystem {
    pub fn new(interaction: PointInteraction, length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!("L must be positive, got {length}")));
        }
        Ok(CircleSystem { interaction, length })
    }

    fn lengths(&self) -> impl Iterator<Item = f64> + '_ {
        Branch::BOTH
            .into_iter()
            .filter_map(|b| self.interaction.phase_shift_spec(b).length())
    }

    /// Continuous `f±(k)`, valid for all real `k`.
    pub fn f_continuous(&self, branch: Branch, k: f64) -> f64 {
        let (dp, dm) = self.interaction.big_delta(k);
        let x = (self.interaction.e()[0] * dm.sin()).clamp(-1.0, 1.0);
        k * self.length + dp + FRAC_PI_2 + branch.sign() * x.acos()
    }

    /// Principal representative `kL + Arg s±(k)` with `Arg ∈ [0, 2π)`.
    pub fn f_value(&self, branch: Branch, k: f64) -> f64 {
        let s = s_eigen(&self.interaction, k).value(branch);
        k * self.length + s.arg().rem_euclid(TAU)
    }

    /// `f_value` along a sorted grid with the `2π` jumps removed.
    pub fn unwrapped_phase(&self, branch: Branch, grid: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(grid.len());
        let mut offset = 0.0;
        for (i, &k) in grid.iter().enumerate() {
            let v = self.f_value(branch, k);
            if i > 0 {
                let prev = out[i - 1];
                let mut cand = v + offset;
                while cand - prev > PI {
                    offset -= TAU;
                    cand -= TAU;
                }
                while prev - cand > PI {
                    offset += TAU;
                    cand += TAU;
                }
                out.push(cand);
            } else {
                out.push(v);
            }
        }
        out
    }

    /// Closed-form `f±'(k)`. Fails where the discriminant vanishes while
    /// `Δ₋` still varies (a kink of `f±`).
    pub fn fprime_value(&self, branch: Branch, k: f64) -> Result<f64> {
        let pi = &self.interaction;
        let dpp = pi.phase_shift_spec(Branch::Plus).derivative(k);
        let dmp = pi.phase_shift_spec(Branch::Minus).derivative(k);
        let (_, dm) = pi.big_delta(k);
        let (s, co) = dm.sin_cos();
        let disc = co * co + pi.transverse_norm2() * s * s;
        let half_diff = 0.5 * (dpp - dmp);
        let tail = if half_diff == 0.0 {
            0.0
        } else if disc < crate::line_scattering::DEGENERACY_THRESHOLD {
            return Err(Error::Degenerate { k, discriminant: disc });
        } else {
            half_diff * (-pi.e()[0] * co) / disc.sqrt()
        };
        Ok(self.length + 0.5 * (dpp + dmp) + branch.sign() * tail)
    }

    /// `f±'(k)`, by the closed form or, at degenerate points, a centred
    /// difference of the continuous phase.
    pub fn fprime(&self, branch: Branch, k: f64) -> f64 {
        self.fprime_value(branch, k)
            .unwrap_or_else(|_| self.fprime_fd(branch, k, 1e-6 * (1.0 + k.abs())))
    }

    pub fn fprime_fd(&self, branch: Branch, k: f64, h: f64) -> f64 {
        (self.f_continuous(branch, k + h) - self.f_continuous(branch, k - h)) / (2.0 * h)
    }

    /// `|e^{−ikL} − s±(k)|`.
    pub fn residual(&self, branch: Branch, k: f64) -> f64 {
        let s = s_eigen(&self.interaction, k).value(branch);
        (C64::from_polar(1.0, -k * self.length) - s).norm()
    }

    /// Upper bound of `|f±'|` on `|k'| ≥ |k|`.
    fn fprime_bound(&self, k: f64) -> f64 {
        let k = k.abs();
        let extra = self
            .lengths()
            .map(|l| 2.0 * l.abs() / (1.0 + (k * l) * (k * l)))
            .fold(0.0, f64::max);
        self.length + extra
    }

    /// Scan grid on `[k_lo, k_hi]`, `0 < k_lo`, such that `f±` moves by at
    /// most `π/4` between neighbours.
    pub fn scan_grid(&self, k_lo: f64, k_hi: f64) -> Vec<f64> {
        let mut grid = vec![k_lo];
        let mut k = k_lo;
        while k < k_hi {
            let h = PI / (4.0 * self.fprime_bound(k));
            k = (k + h).min(k_hi);
            grid.push(k);
        }
        grid
    }

    fn scan_start(&self) -> f64 {
        let scale = self.lengths().map(f64::abs).fold(self.length, f64::max);
        1e-9 / scale
    }

    /// Level crossings of `f±` on a grid, each refined by bisection.
    fn roots_on_grid(&self, branch: Branch, grid: &[f64], tol: f64) -> Result<Vec<f64>> {
        let fs: Vec<f64> = grid.par_iter().map(|&k| self.f_continuous(branch, k)).collect();
        let mut brackets = Vec::new();
        for i in 0..grid.len().saturating_sub(1) {
            let (f0, f1) = (fs[i], fs[i + 1]);
            let (lo, hi) = if f0 <= f1 { (f0, f1) } else { (f1, f0) };
            let first = (lo / TAU).floor() as i64 + 1;
            let last = (hi / TAU).floor() as i64;
            for j in first..=last {
                let level = j as f64 * TAU;
                // Treat a grid value exactly on a level as lying above it.
                if (f0 < level) != (f1 < level) {
                    brackets.push((grid[i], grid[i + 1], level));
                }
            }
        }
        let roots: Vec<Result<f64>> = brackets
            .par_iter()
            .map(|&(a, b, level)| self.bisect(branch, a, b, level, tol))
            .collect();
        roots.into_iter().collect()
    }

    fn bisect(&self, branch: Branch, a: f64, b: f64, level: f64, tol: f64) -> Result<f64> {
        let g = |k: f64| self.f_continuous(branch, k) - level;
        let (mut lo, mut hi) = (a, b);
        let mut glo = g(lo);
        let mut depth = 0;
        while depth < MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = g(mid);
            if (gm < 0.0) == (glo < 0.0) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
            depth += 1;
        }
        let k = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
        let residual = self.residual(branch, k);
        if residual < tol {
            Ok(k)
        } else {
            Err(Error::InconclusiveBracket { lo: a, hi: b, depth, residual })
        }
    }

    fn make_root(&self, branch: Branch, m: i64, k: f64, kind: RootKind) -> Result<SpectrumRoot> {
        let fprime = self.fprime(branch, k);
        if !(fprime > 0.0) {
            return Err(Error::NegativeFPrime { k, fprime });
        }
        Ok(SpectrumRoot { branch, m, k, fprime, kind })
    }

    /// Positive roots of one branch in `(0, k_max]`, ascending, `m = 1, 2, …`.
    pub fn positive_roots(&self, branch: Branch, k_max: f64, tol: f64) -> Result<Vec<SpectrumRoot>> {
        check_controls(k_max, tol)?;
        let start = self.scan_start();
        if k_max <= start {
            return Ok(Vec::new());
        }
        let grid = self.scan_grid(start, k_max);
        let mut ks = self.roots_on_grid(branch, &grid, tol)?;
        ks.sort_by(f64::total_cmp);
        ks.iter()
            .enumerate()
            .map(|(i, &k)| self.make_root(branch, i as i64 + 1, k, RootKind::Positive))
            .collect()
    }

    /// Positive roots of both branches, `+` first, each ascending.
    pub fn positive_spectrum(&self, k_max: f64, tol: f64) -> Result<Vec<SpectrumRoot>> {
        let mut out = self.positive_roots(Branch::Plus, k_max, tol)?;
        out.extend(self.positive_roots(Branch::Minus, k_max, tol)?);
        Ok(out)
    }

    /// Roots on `[−k_max, 0)` by direct search, ordered by `|k|` with
    /// `m = −1, −2, …`.
    pub fn negative_roots(&self, branch: Branch, k_max: f64, tol: f64) -> Result<Vec<SpectrumRoot>> {
        check_controls(k_max, tol)?;
        let start = self.scan_start();
        if k_max <= start {
            return Ok(Vec::new());
        }
        let grid: Vec<f64> = self.scan_grid(start, k_max).iter().rev().map(|k| -k).collect();
        let mut ks = self.roots_on_grid(branch, &grid, tol)?;
        ks.sort_by(|a, b| b.total_cmp(a));
        Ok(ks
            .iter()
            .enumerate()
            .map(|(i, &k)| SpectrumRoot {
                branch,
                m: -(i as i64 + 1),
                k,
                fprime: self.fprime(branch, k),
                kind: RootKind::Negative,
            })
            .collect())
    }

    /// Raw `ε` numerator `(−cosΔ₋, e_z sinΔ₋, −e_y sinΔ₋)` at `k`.
    fn eps_numerator(&self, k: f64) -> [f64; 3] {
        let (_, dm) = self.interaction.big_delta(k);
        let (s, co) = dm.sin_cos();
        let [_, ey, ez] = self.interaction.e();
        [-co, ez * s, -ey * s]
    }

    /// Unit eigenvector `(A, B)` of `S(k)` on `branch`. When `S(k)` is a
    /// multiple of the identity, `+` takes `(1, 0)` and `−` takes `(0, 1)`.
    pub fn branch_vector(&self, branch: Branch, k: f64) -> [C64; 2] {
        let v = self.eps_numerator(k);
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n < COINCIDENT_EPS {
            return match branch {
                Branch::Plus => [c(1.0, 0.0), c(0.0, 0.0)],
                Branch::Minus => [c(0.0, 0.0), c(1.0, 0.0)],
            };
        }
        let eps = [v[0] / n, v[1] / n, v[2] / n];
        projector_vector(&Mat2C::projector(eps, branch.sign()))
    }

    /// Whether `f±(0) ∈ 2πℤ`.
    fn has_zero_root(&self, branch: Branch) -> bool {
        let f0 = self.f_continuous(branch, 0.0);
        let r = f0.rem_euclid(TAU);
        r.min(TAU - r) < 1e-9
    }

    /// `k → 0⁺` limit of the eigenvector of a `k₀ = 0` root. When the
    /// `ε` direction has no limit (`S ≡` multiple of the identity near 0),
    /// `+` is taken as the antisymmetric and `−` as the symmetric vector.
    pub fn zero_mode_vector(&self, branch: Branch) -> [C64; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let mut v = self.eps_numerator(0.0);
        if norm(v) < COINCIDENT_EPS {
            // cos Δ₋(0) = 0 happens only when one angle vanishes; then ε
            // points along ±x near 0 and a small probe fixes its sign.
            let probe = 1e-6 / self.lengths().map(f64::abs).fold(self.length, f64::max);
            v = self.eps_numerator(probe);
        }
        let n = norm(v);
        if n < COINCIDENT_EPS {
            return match branch {
                Branch::Plus => [c(r, 0.0), c(-r, 0.0)],
                Branch::Minus => [c(r, 0.0), c(r, 0.0)],
            };
        }
        let eps = [v[0] / n, v[1] / n, v[2] / n];
        projector_vector(&Mat2C::projector(eps, branch.sign()))
    }

    /// The `k₀ = 0` roots, classified fake when `A(0) + B(0) = 0`.
    pub fn zero_modes(&self) -> Vec<SpectrumRoot> {
        Branch::BOTH
            .into_iter()
            .filter(|&b| self.has_zero_root(b))
            .map(|b| {
                let [a, bb] = self.zero_mode_vector(b);
                let kind = if (a + bb).norm() < 1e-9 {
                    RootKind::ZeroFake
                } else {
                    RootKind::ZeroGenuine
                };
                SpectrumRoot {
                    branch: b,
                    m: 0,
                    k: 0.0,
                    fprime: self.fprime(b, 0.0),
                    kind,
                }
            })
            .collect()
    }

    /// Root set `σ±` restricted to `[−k_max, k_max]`: negative roots, the
    /// `k₀` root (fake or genuine) if present, and positive roots.
    pub fn trace_roots(&self, branch: Branch, k_max: f64, tol: f64) -> Result<Vec<SpectrumRoot>> {
        let mut out = self.negative_roots(branch, k_max, tol)?;
        out.reverse();
        out.extend(self.zero_modes().into_iter().filter(|r| r.branch == branch));
        out.extend(self.positive_roots(branch, k_max, tol)?);
        Ok(out)
    }

    /// Continued eigenphase factors `(N₊, D₊, N₋, D₋)` at `k = iκ`.
    fn continued(&self, kappa: f64) -> (f64, f64, f64, f64) {
        let (np, dp) = self.interaction.phase_shift_spec(Branch::Plus).continued_factor(kappa);
        let (nm, dm) = self.interaction.phase_shift_spec(Branch::Minus).continued_factor(kappa);
        (np, dp, nm, dm)
    }

    /// `D₊D₋·det-form` of `e^{κL} = s(iκ)`, free of poles:
    /// `D₊D₋ − (N₊D₋ − N₋D₊) e_x e^{−κL} − N₊N₋ e^{−2κL}`.
    pub fn bound_condition(&self, kappa: f64) -> f64 {
        let (np, dp, nm, dm) = self.continued(kappa);
        let q = (-kappa * self.length).exp();
        dp * dm - (np * dm - nm * dp) * self.interaction.e()[0] * q - np * nm * q * q
    }

    /// `S(iκ)` with the exact continued phase factors.
    pub fn s_continued(&self, kappa: f64) -> Mat2C {
        let (np, dp, nm, dm) = self.continued(kappa);
        let co = coefficients_from_factors(&self.interaction, c(np / dp, 0.0), c(nm / dm, 0.0));
        s_from_coefficients(&co)
    }

    /// Eigenvalues of `S(iκ)` as `(t ± √(t² + 4ab))/2` with the principal root.
    pub fn s_continued_eigen(&self, kappa: f64) -> (C64, C64) {
        let s = self.s_continued(kappa);
        let t = s.trace();
        let root = (t * t - s.det() * 4.0).sqrt();
        ((t + root) * 0.5, (t - root) * 0.5)
    }

    fn poles(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self
            .lengths()
            .filter(|&l| l > 0.0)
            .map(|l| 1.0 / l)
            .collect();
        p.sort_by(f64::total_cmp);
        p.dedup();
        p
    }

    /// A `κ` range containing every bound state.
    pub fn default_kappa_max(&self) -> f64 {
        let top = self.poles().last().copied().unwrap_or(0.0);
        2.0 * top + 10.0 / self.length
    }

    /// Negative-energy states `κ ∈ (0, kappa_max]`, followed by the
    /// zero-energy linear state `A₀ + B₀x` (`B₀ ≠ 0`) when it exists.
    pub fn bound_states(&self, kappa_max: f64) -> Result<Vec<SpectrumRoot>> {
        if !(kappa_max.is_finite() && kappa_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa_max must be positive, got {kappa_max}"
            )));
        }
        let scale = self.lengths().map(f64::abs).fold(self.length, f64::max);
        let fine = self
            .lengths()
            .map(f64::abs)
            .filter(|&l| l > 0.0)
            .fold(self.length, f64::min);
        let h = (fine / 64.0).min(self.length / 64.0);
        let start = 1e-9 / scale;
        let mut breaks = vec![start];
        breaks.extend(self.poles().into_iter().filter(|&p| p > start && p < kappa_max));
        breaks.push(kappa_max);

        let mut grid = Vec::new();
        for w in breaks.windows(2) {
            let n = ((w[1] - w[0]) / h).ceil().max(1.0) as usize;
            for i in 0..n {
                grid.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
            }
        }
        grid.push(kappa_max);
        let vals: Vec<f64> = grid.par_iter().map(|&k| self.bound_condition(k)).collect();

        let mut roots = Vec::new();
        for i in 0..grid.len() - 1 {
            if (vals[i] < 0.0) != (vals[i + 1] < 0.0) {
                let k = bisect_fn(|x| self.bound_condition(x), grid[i], grid[i + 1]);
                for l in self.lengths() {
                    if (k * l - 1.0).abs() < 1e-13 {
                        return Err(Error::ContinuationPole { kappa: k });
                    }
                }
                roots.push(k);
            }
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * b.abs().max(1.0));

        let mut out = Vec::new();
        for (i, &kappa) in roots.iter().enumerate() {
            let target = C64::new((kappa * self.length).exp(), 0.0);
            let (sp, sm) = self.s_continued_eigen(kappa);
            let branch = if (sp - target).norm() <= (sm - target).norm() {
                Branch::Plus
            } else {
                Branch::Minus
            };
            let h = 1e-6 * kappa.max(1e-3);
            let hfun = |x: f64| {
                let (p, m) = self.s_continued_eigen(x);
                let s = if branch == Branch::Plus { p } else { m };
                x * self.length - s.norm().ln()
            };
            let fprime = (hfun(kappa + h) - hfun(kappa - h)) / (2.0 * h);
            out.push(SpectrumRoot {
                branch,
                m: i as i64 + 1,
                k: kappa,
                fprime,
                kind: RootKind::Bound,
            });
        }
        if self.zero_energy_linear_coefficients().is_some() {
            out.push(SpectrumRoot {
                branch: Branch::Plus,
                m: 0,
                k: 0.0,
                fprime: 0.0,
                kind: RootKind::ZeroEnergyLinear,
            });
        }
        Ok(out)
    }

    /// `(A₀, B₀)` of a zero-energy solution `A₀ + B₀x` with `B₀ ≠ 0`
    /// satisfying the boundary conditions, unit-normalised as a 2-vector.
    pub fn zero_energy_linear_coefficients(&self) -> Option<(C64, C64)> {
        let pi = &self.interaction;
        let e = pi.e();
        let u = Mat2C::projector(e, 1.0).scale(C64::from_polar(1.0, pi.alpha_plus()))
            + Mat2C::projector(e, -1.0).scale(C64::from_polar(1.0, pi.alpha_minus()));
        let one = Mat2C::identity();
        let um = u - one;
        let up = (u + one).scale(c(0.0, pi.l0()));
        // Ψ(0⁺) = A₀(1, 1) + B₀(0, L), Ψ'(0⁺) = B₀(1, −1).
        let c1 = um.apply([c(1.0, 0.0), c(1.0, 0.0)]);
        let c2a = um.apply([c(0.0, 0.0), c(self.length, 0.0)]);
        let c2b = up.apply([c(1.0, 0.0), c(-1.0, 0.0)]);
        let c2 = [c2a[0] + c2b[0], c2a[1] + c2b[1]];
        let n1 = (c1[0].norm_sqr() + c1[1].norm_sqr()).sqrt();
        let n2 = (c2[0].norm_sqr() + c2[1].norm_sqr()).sqrt();
        let det = c1[0] * c2[1] - c1[1] * c2[0];
        if det.norm() > 1e-10 * n1.max(1e-300) * n2 {
            return None;
        }
        let r0 = c1[0].norm_sqr() + c2[0].norm_sqr();
        let r1 = c1[1].norm_sqr() + c2[1].norm_sqr();
        let (a0, b0) = if r0 >= r1 { (-c2[0], c1[0]) } else { (-c2[1], c1[1]) };
        let n = (a0.norm_sqr() + b0.norm_sqr()).sqrt();
        if n == 0.0 || b0.norm() < 1e-9 * n {
            return None;
        }
        let phase = if b0.norm() > 0.0 { b0.conj() / b0.norm() } else { c(1.0, 0.0) };
        Some((a0 * phase / n, b0 * phase / n))
    }

    /// Null vector of `S(iκ) − e^{κL}`, from the pole-cleared matrix.
    fn bound_vector(&self, kappa: f64) -> [C64; 2] {
        let (np, dp, nm, dm) = self.continued(kappa);
        let e = self.interaction.e();
        let z = Mat2C::projector(e, 1.0).scale(c(np * dm, 0.0))
            + Mat2C::projector(e, -1.0).scale(c(nm * dp, 0.0));
        let m = z * Mat2C::sigma1() - Mat2C::scalar(c(dp * dm * (kappa * self.length).exp(), 0.0));
        let r0 = m.a11.norm_sqr() + m.a12.norm_sqr();
        let r1 = m.a21.norm_sqr() + m.a22.norm_sqr();
        let v = if r0 >= r1 { [-m.a12, m.a11] } else { [-m.a22, m.a21] };
        normalize_phase(v)
    }

    /// Normalised eigenstate of a physical root.
    pub fn eigenstate(&self, root: &SpectrumRoot) -> Result<EigenState> {
        let l = self.length;
        let (a, b, norm2) = match root.kind {
            RootKind::ZeroFake => return Err(Error::FakeZeroMode),
            RootKind::Negative => {
                return Err(Error::InvalidParameter(
                    "negative roots mirror positive ones and carry no separate state".into(),
                ))
            }
            RootKind::Positive => {
                let [a, b] = self.branch_vector(root.branch, root.k);
                if !(root.fprime > 0.0) {
                    return Err(Error::NegativeFPrime { k: root.k, fprime: root.fprime });
                }
                (a, b, 1.0 / root.fprime)
            }
            RootKind::ZeroGenuine => {
                // k → 0 limit of the closed norm: L + 2 Re(AB*) L.
                let [a, b] = self.zero_mode_vector(root.branch);
                let integral = l + 2.0 * (a * b.conj()).re * l;
                (a, b, 1.0 / integral)
            }
            RootKind::Bound => {
                let [a, b] = self.bound_vector(root.k);
                let st = EigenState { root: *root, a, b, norm2: 1.0, length: l };
                let panels = (root.k * l).ceil().max(8.0) as usize;
                (a, b, 1.0 / quadrature_norm(&st, panels))
            }
            RootKind::ZeroEnergyLinear => {
                let (a, b) = self
                    .zero_energy_linear_coefficients()
                    .ok_or_else(|| Error::InvalidParameter("no zero-energy linear state".into()))?;
                let st = EigenState { root: *root, a, b, norm2: 1.0, length: l };
                (a, b, 1.0 / quadrature_norm(&st, 8))
            }
        };
        Ok(EigenState { root: *root, a, b, norm2, length: l })
    }

    /// `(L + 2 Re(AB*) sin(kL)/k)⁻¹` for a plane-wave state.
    pub fn closed_norm2(&self, state: &EigenState) -> f64 {
        let k = state.root.k;
        let l = self.length;
        let s = if k == 0.0 { l } else { (k * l).sin() / k };
        1.0 / (l + 2.0 * (state.a * state.b.conj()).re * s)
    }

    /// Closed-form `∫₀ᴸ |A e^{−κx} + B e^{−κ(L−x)}|² dx`.
    pub fn bound_norm_integral(&self, kappa: f64, a: C64, b: C64) -> f64 {
        let l = self.length;
        let q = (-kappa * l).exp();
        (a.norm_sqr() + b.norm_sqr()) * (1.0 - q * q) / (2.0 * kappa) + 2.0 * (a * b.conj()).re * l * q
    }

    /// Every physical state with energy below `k_max²`: positive roots,
    /// genuine zero modes, bound states and the linear zero-energy state.
    pub fn physical_states(&self, k_max: f64, kappa_max: f64, tol: f64) -> Result<Vec<EigenState>> {
        let mut roots: Vec<SpectrumRoot> = self
            .zero_modes()
            .into_iter()
            .filter(|r| r.kind == RootKind::ZeroGenuine)
            .collect();
        roots.extend(self.bound_states(kappa_max)?);
        roots.extend(self.positive_spectrum(k_max, tol)?);
        roots.par_iter().map(|r| self.eigenstate(r)).collect()
    }
}

fn check_controls(k_max: f64, tol: f64) -> Result<()> {
    if !(k_max.is_finite() && k_max > 0.0) {
        return Err(Error::InvalidParameter(format!("k_max must be positive, got {k_max}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    Ok(())
}

/// The larger column of a rank-one projector, normalised with its largest
/// component real and positive.
fn projector_vector(p: &Mat2C) -> [C64; 2] {
    let c0 = p.column(0);
    let c1 = p.column(1);
    let n0 = c0[0].norm_sqr() + c0[1].norm_sqr();
    let n1 = c1[0].norm_sqr() + c1[1].norm_sqr();
    normalize_phase(if n0 >= n1 { c0 } else { c1 })
}

fn normalize_phase(v: [C64; 2]) -> [C64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let big = if v[0].norm() >= v[1].norm() { v[0] } else { v[1] };
    let phase = big.conj() / big.norm();
    [v[0] * phase / n, v[1] * phase / n]
}

fn bisect_fn<F: Fn(f64) -> f64>(g: F, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    let mut glo = g(lo);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    if g(lo).abs() <= g(hi).abs() {
        lo
    } else {
        hi
    }
}

/// `∫₀ᴸ |ψ|²` by composite Gauss–Legendre, using the state's own `norm2`.
pub fn quadrature_norm(state: &EigenState, panels: usize) -> f64 {
    interval_rule(state.length, panels)
        .iter()
        .map(|&(x, w)| w * state.eval(x).norm_sqr())
        .sum()
}

/// `∫₀ᴸ ψ₁* ψ₂` by composite Gauss–Legendre.
pub fn quadrature_overlap(s1: &EigenState, s2: &EigenState, panels: usize) -> C64 {
    interval_rule(s1.length, panels)
        .iter()
        .map(|&(x, w)| s1.eval(x).conj() * s2.eval(x) * w)
        .sum()
}
