//! A fast version of the invariant suite for `pointscatter selftest`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::circle_spectrum::{CircleSystem, DEFAULT_TOL};
use crate::kernel::pathsum::delta_prime_series;
use crate::kernel::{grouped_weights, kernel_pathsum, kernel_spectral, worldline_weights, KernelQuery};
use crate::line_scattering::{s_power, PowerMethod};
use crate::mat2::Mat2C;
use crate::params::{delta_prime_theta, Branch, PointInteraction, Preset};
use crate::trace_formula::{trace_check, QuadSpec, TestFunction};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error.
    pub value: f64,
    pub tol: f64,
}

fn check(name: &'static str, value: f64, tol: f64) -> Check {
    Check { name, passed: value.is_finite() && value < tol, value, tol }
}

/// Deterministic spread of parameter points from an additive recurrence.
pub fn sample_points(count: usize) -> Vec<PointInteraction> {
    let frac = |i: usize, a: f64| (0.5 + i as f64 * a).fract();
    (0..count)
        .map(|i| {
            let ap = TAU * frac(i, 0.618_033_988_749_895);
            let am = TAU * frac(i, 0.754_877_666_246_693);
            let z = 2.0 * frac(i, 0.569_840_290_998_053) - 1.0;
            let ph = TAU * frac(i, 0.414_213_562_373_095);
            let r = (1.0 - z * z).sqrt();
            PointInteraction::new(ap, am, [r * ph.cos(), r * ph.sin(), z], 1.0).expect("valid sample point")
        })
        .collect()
}

fn generic_system() -> CircleSystem {
    let p = PointInteraction::new(PI / 2.0, 4.0 * PI / 3.0, [0.3, 0.5, 0.66f64.sqrt()], 1.0).expect("valid point");
    CircleSystem::new(p, 1.0).expect("valid system")
}

fn unitarity() -> Check {
    let mut worst = 0.0f64;
    for pi in sample_points(10) {
        for k in [0.1, 1.0, 10.0] {
            for n in [1, 7, 64] {
                let s = s_power(&pi, k, n, PowerMethod::MatrixPower);
                worst = worst.max((s.adjoint() * s).dist(&Mat2C::identity()));
            }
        }
    }
    check("s_matrix_unitarity", worst, 1e-10)
}

fn power_methods() -> Check {
    let mut worst = 0.0f64;
    for pi in sample_points(10) {
        for k in [0.1, 1.0, 10.0] {
            for n in [2, 13, 64] {
                let a = s_power(&pi, k, n, PowerMethod::MatrixPower);
                let b = s_power(&pi, k, n, PowerMethod::Spectral);
                let c = s_power(&pi, k, n, PowerMethod::Chebyshev);
                worst = worst.max(a.dist(&b)).max(a.dist(&c));
            }
        }
    }
    check("s_power_three_way", worst, 1e-10)
}

fn phase_identity() -> Check {
    let mut worst = 0.0f64;
    for pi in sample_points(10) {
        for b in Branch::BOTH {
            let spec = pi.phase_shift_spec(b);
            for i in 1..=20 {
                let k = 0.05 * i as f64 * i as f64;
                let lhs = spec.derivative(k);
                let rhs = -spec.phase(k).sin() / k;
                worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
            }
        }
    }
    check("phase_shift_identity", worst, 1e-10)
}

fn spectra() -> Vec<Check> {
    let free = CircleSystem::new(Preset::Reflectionless { theta: 0.0 }.interaction(1.0).unwrap(), 1.0).unwrap();
    let dd = CircleSystem::new(
        Preset::PureReflection { alpha_plus: PI, alpha_minus: PI, sign: 1 }.interaction(1.0).unwrap(),
        1.0,
    )
    .unwrap();
    let err = |sys: &CircleSystem, spacing: f64, per_level: usize| -> f64 {
        let mut worst = 0.0f64;
        let mut count = 0;
        for b in Branch::BOTH {
            match sys.positive_roots(b, 100.0, DEFAULT_TOL) {
                Ok(roots) => {
                    for r in &roots {
                        let m = (r.k / spacing).round();
                        worst = worst.max((r.k - m * spacing).abs());
                    }
                    count += roots.len();
                }
                Err(_) => return f64::INFINITY,
            }
        }
        let expected = per_level * (100.0 / spacing).floor() as usize;
        if count == expected { worst } else { f64::INFINITY }
    };
    vec![check("free_spectrum", err(&free, TAU, 2), 1e-10), check("dirichlet_spectrum", err(&dd, PI, 1), 1e-10)]
}

fn trace_formula() -> Check {
    let sys = generic_system();
    let f = TestFunction::gaussian(0.5).expect("positive sigma");
    let mut worst = 0.0f64;
    for b in Branch::BOTH {
        match trace_check(&sys, b, &f, 40, None, &QuadSpec::default()) {
            Ok(r) => worst = worst.max(r.abs_err / r.lhs.abs().max(1.0)),
            Err(_) => worst = f64::INFINITY,
        }
    }
    check("trace_formula", worst, 1e-7)
}

fn delta_prime_kernel() -> Check {
    let c = 0.5;
    let sys = CircleSystem::new(Preset::DeltaPrime { c }.interaction(1.0).unwrap(), 1.0).unwrap();
    let th = delta_prime_theta(c);
    let mut worst = 0.0f64;
    for (x, x0) in [(0.2, 0.7), (0.5, 0.5), (0.85, 0.1)] {
        let want = delta_prime_series(th, 1.0, x, x0, 0.1);
        worst = match kernel_pathsum(&sys, &KernelQuery::new(x, x0, 0.1)) {
            Ok(v) => worst.max((v.value - want).norm() / want.abs()),
            Err(_) => f64::INFINITY,
        };
    }
    check("delta_prime_kernel", worst, 1e-9)
}

fn dual_representation() -> Check {
    let sys = generic_system();
    let mut worst = 0.0f64;
    for (x, x0, tau) in [(0.3, 0.7, 0.05), (0.6, 0.2, 0.2)] {
        let q = KernelQuery::new(x, x0, tau);
        worst = match (kernel_spectral(&sys, &q), kernel_pathsum(&sys, &q)) {
            (Ok(a), Ok(b)) => worst.max((a.value - b.value).norm() / a.value.norm()),
            _ => f64::INFINITY,
        };
    }
    check("dual_representation", worst, 1e-6)
}

fn hermitian() -> Check {
    let sys = generic_system();
    let (x, x0, tau) = (0.25, 0.8, 0.1);
    let worst = match (
        kernel_spectral(&sys, &KernelQuery::new(x, x0, tau)),
        kernel_spectral(&sys, &KernelQuery::new(x0, x, tau)),
    ) {
        (Ok(a), Ok(b)) => (a.value - b.value.conj()).norm(),
        _ => f64::INFINITY,
    };
    check("kernel_hermitian", worst, 1e-10)
}

fn rotation() -> Check {
    let sys = generic_system();
    let sorted = |s: &CircleSystem| -> Option<Vec<f64>> {
        let mut k: Vec<f64> = s.positive_spectrum(30.0, DEFAULT_TOL).ok()?.iter().map(|r| r.k).collect();
        k.sort_by(f64::total_cmp);
        Some(k)
    };
    let mut worst = 0.0f64;
    let base = sorted(&sys);
    for beta in [0.3, 1.1] {
        let rot = CircleSystem::new(sys.interaction.rotated_yz(beta), sys.length).unwrap();
        worst = match (&base, sorted(&rot)) {
            (Some(a), Some(b)) if a.len() == b.len() => {
                a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(worst, f64::max)
            }
            _ => f64::INFINITY,
        };
    }
    check("rotation_invariance", worst, 1e-9)
}

fn worldline_completeness() -> Check {
    let mut worst = 0.0f64;
    for pi in sample_points(5) {
        for n in 1..=6 {
            worst = match worldline_weights(&pi, 1.3, n) {
                Ok(lines) => {
                    worst.max(grouped_weights(&lines).dist(&s_power(&pi, 1.3, n as i64, PowerMethod::MatrixPower)))
                }
                Err(_) => f64::INFINITY,
            };
        }
    }
    check("worldline_completeness", worst, 1e-12)
}

pub fn run_all() -> Vec<Check> {
    let mut out = vec![unitarity(), power_methods(), phase_identity()];
    out.extend(spectra());
    out.push(trace_formula());
    out.push(delta_prime_kernel());
    out.push(dual_representation());
    out.push(rotation());
    out.push(worldline_completeness());
    out.push(hermitian());
    out
}

pub fn table(checks: &[Check]) -> String {
    let mut s = format!("{:<24} {:<6} {:>12} {:>10}\n", "check", "status", "error", "tol");
    for c in checks {
        s += &format!(
            "{:<24} {:<6} {:>12.3e} {:>10.1e}\n",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.value,
            c.tol
        );
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    s += &format!("{passed}/{} passed\n", checks.len());
    s
}
