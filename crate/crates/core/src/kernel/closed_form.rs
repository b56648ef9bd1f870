//! Image-sum kernels for subfamilies whose S-matrix does not depend on `k`.
//!
//! With `G(d) = e^{−d²/4τ}/√(4πτ)`, `Δx = x − x₀` and `s = x + x₀`, every
//! such kernel is a lattice sum of free Gaussians along the direct images
//! `nL + Δx` and the reflected images `(n+1)L − s`.

use std::f64::consts::PI;

use super::{gaussian, gaussian_winding_cutoff, KernelMethod, KernelQuery, KernelValue};
use crate::circle_spectrum::CircleSystem;
use crate::error::{Error, Result};
use crate::line_scattering::{s_power, PowerMethod};
use crate::mat2::{c, C64};
use crate::params::{delta_prime_theta, Branch, PhaseShiftSpec, PointInteraction, Preset};

const IMAGE_EPS: f64 = 1e-20;

fn constant_phase(pi: &PointInteraction, b: Branch) -> Result<f64> {
    match pi.phase_shift_spec(b) {
        PhaseShiftSpec::ConstantZero => Ok(0.0),
        PhaseShiftSpec::ConstantPi => Ok(PI),
        PhaseShiftSpec::Generic { .. } => Err(Error::InvalidParameter(format!(
            "closed form needs alpha{b} in {{0, pi}}, got {}",
            pi.alpha(b)
        ))),
    }
}

/// Closed-form kernel for a preset on a circle of circumference `length`.
///
/// Reflectionless, scale-independent and δ′ presets are always admissible;
/// pure-reflection and parity presets need both eigenphases in `{0, π}`.
pub fn kernel_closed_form(preset: &Preset, l0: f64, length: f64, q: &KernelQuery) -> Result<KernelValue> {
    let pi = preset.interaction(l0)?;
    let sys = CircleSystem::new(pi, length)?;
    q.validate(&sys)?;
    let n = gaussian_winding_cutoff(q.tau, length, IMAGE_EPS) as i64 + 1;
    let (dx, s, l) = (q.x - q.x0, q.x + q.x0, length);
    let g = |d: f64| gaussian(d, q.tau);
    let lattice = |f: &dyn Fn(f64) -> C64| -> C64 { (-n..=n).map(|k| f(k as f64)).sum() };

    let value = match *preset {
        Preset::Reflectionless { theta } => lattice(&|m| C64::from_polar(g(m * l + dx), -m * theta)),
        Preset::ScaleIndependent { theta, phi } => scale_independent(theta, phi, l, dx, s, &g, &lattice),
        Preset::DeltaPrime { c: coupling } => {
            let phi = if coupling < 0.0 { 1.5 * PI } else { 0.5 * PI };
            scale_independent(delta_prime_theta(coupling), phi, l, dx, s, &g, &lattice)
        }
        Preset::PureReflection { sign, .. } => {
            let (mut dp, mut dm) = (constant_phase(&pi, Branch::Plus)?, constant_phase(&pi, Branch::Minus)?);
            if sign < 0 {
                std::mem::swap(&mut dp, &mut dm);
            }
            lattice(&|m| {
                C64::from_polar(g(2.0 * m * l + dx), m * (dp + dm))
                    + C64::from_polar(g(2.0 * m * l - s), (m - 1.0) * dp + m * dm)
            })
        }
        Preset::Parity { sign, .. } => {
            let (mut dp, mut dm) = (constant_phase(&pi, Branch::Plus)?, constant_phase(&pi, Branch::Minus)?);
            if sign < 0 {
                std::mem::swap(&mut dp, &mut dm);
            }
            lattice(&|m| {
                let direct = g(m * l + dx);
                let refl = g((m + 1.0) * l - s);
                C64::from_polar(0.5 * (direct + refl), m * dp) + C64::from_polar(0.5 * (direct - refl), m * (dm + PI))
            })
        }
    };
    Ok(KernelValue { value, method: KernelMethod::Closed, est_err: 0.0, terms: (2 * n + 1) as usize })
}

fn scale_independent(
    theta: f64,
    phi: f64,
    l: f64,
    dx: f64,
    s: f64,
    g: &dyn Fn(f64) -> f64,
    lattice: &dyn Fn(&dyn Fn(f64) -> C64) -> C64,
) -> C64 {
    let (sp, cp) = phi.sin_cos();
    lattice(&|m| {
        let (sn, cn) = (m * theta).sin_cos();
        c(cn, -cp * sn) * g(m * l + dx) - c(sp * sn * g((m + 1.0) * l - s), 0.0)
    })
}

/// Image sum valid for any interaction whose eigenphases are both constant,
/// built directly from the matrix powers `S⁽ⁿ⁾`.
pub fn constant_s_images(sys: &CircleSystem, q: &KernelQuery) -> Result<C64> {
    q.validate(sys)?;
    for b in Branch::BOTH {
        constant_phase(&sys.interaction, b)?;
    }
    let l = sys.length;
    let n = gaussian_winding_cutoff(q.tau, l, IMAGE_EPS) as i64 + 1;
    let (dx, s) = (q.x - q.x0, q.x + q.x0);
    let g = |d: f64| gaussian(d, q.tau);
    let mut total = c(g(dx), 0.0);
    for m in 1..=n {
        let sn = s_power(&sys.interaction, 1.0, m, PowerMethod::MatrixPower);
        let mf = m as f64;
        total += sn.a11 * g(mf * l + dx)
            + sn.a21 * g((mf + 1.0) * l - s)
            + sn.a22 * g(-mf * l + dx)
            + sn.a12 * g((1.0 - mf) * l - s);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn presets() -> Vec<Preset> {
        vec![
            Preset::Reflectionless { theta: 0.0 },
            Preset::Reflectionless { theta: 1.3 },
            Preset::ScaleIndependent { theta: 0.7, phi: 2.1 },
            Preset::ScaleIndependent { theta: PI, phi: 0.0 },
            Preset::DeltaPrime { c: 0.4 },
            Preset::DeltaPrime { c: -2.0 },
            Preset::PureReflection { alpha_plus: PI, alpha_minus: PI, sign: 1 },
            Preset::PureReflection { alpha_plus: 0.0, alpha_minus: PI, sign: 1 },
            Preset::PureReflection { alpha_plus: 0.0, alpha_minus: PI, sign: -1 },
            Preset::Parity { alpha_plus: 0.0, alpha_minus: PI, sign: 1 },
            Preset::Parity { alpha_plus: PI, alpha_minus: 0.0, sign: -1 },
        ]
    }

    #[test]
    fn closed_forms_match_matrix_power_images() {
        for p in presets() {
            let sys = CircleSystem::new(p.interaction(1.0).unwrap(), 1.3).unwrap();
            for (x, x0, tau) in [(0.2, 0.9, 0.05), (0.65, 0.65, 0.4), (1.2, 0.1, 0.01)] {
                let q = KernelQuery::new(x, x0, tau);
                let closed = kernel_closed_form(&p, 1.0, 1.3, &q).unwrap().value;
                let images = constant_s_images(&sys, &q).unwrap();
                assert!((closed - images).norm() < 1e-12 * (1.0 + images.norm()), "{p:?}: {closed} vs {images}");
            }
        }
    }

    #[test]
    fn rejects_momentum_dependent_presets() {
        let p = Preset::Parity { alpha_plus: 1.0, alpha_minus: PI, sign: 1 };
        assert!(kernel_closed_form(&p, 1.0, 1.0, &KernelQuery::new(0.3, 0.4, 0.1)).is_err());
    }
}
