//! Reflection and transmission on the line, the one-particle S-matrix, its
//! eigensystem, and the n-times scattering matrix `S⁽ⁿ⁾ = [S⁽¹⁾]ⁿ`.

use serde::{Deserialize, Serialize};

use crate::mat2::{c, Mat2C, C64};
use crate::params::{Branch, PointInteraction};

/// Below this value of `1 − e_x² sin²Δ₋` the two eigenvalues are treated as
/// coincident and the spectral form is not used.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub r_plus: C64,
    pub r_minus: C64,
    pub t_plus: C64,
    pub t_minus: C64,
}

/// `(e^{iδ₊}, e^{iδ₋})`.
fn phase_factors(pi: &PointInteraction, k: f64) -> (C64, C64) {
    let (dp, dm) = pi.phase_shifts(k);
    (C64::from_polar(1.0, dp), C64::from_polar(1.0, dm))
}

pub fn coefficients(pi: &PointInteraction, k: f64) -> Coefficients {
    let (a, b) = phase_factors(pi, k);
    coefficients_from_factors(pi, a, b)
}

/// Coefficients for arbitrary (possibly non-unimodular) eigenphase factors;
/// the bound-state search feeds the continued factors through here.
pub(crate) fn coefficients_from_factors(pi: &PointInteraction, a: C64, b: C64) -> Coefficients {
    let [ex, ey, ez] = pi.e();
    let sum = (a + b) * 0.5;
    let diff = (a - b) * 0.5;
    Coefficients {
        r_plus: sum - diff * ez,
        r_minus: sum + diff * ez,
        t_plus: diff * c(ex, -ey),
        t_minus: diff * c(ex, ey),
    }
}

/// `Z(k) = e^{iδ₊}P₊ + e^{iδ₋}P₋ = (R₋ T₊; T₋ R₊)`.
pub fn z_matrix(pi: &PointInteraction, k: f64) -> Mat2C {
    let co = coefficients(pi, k);
    Mat2C::new(co.r_minus, co.t_plus, co.t_minus, co.r_plus)
}

/// `S⁽¹⁾(k) = Z(k)σ₁ = (T₊ R₋; R₊ T₋)`.
pub fn s_matrix(pi: &PointInteraction, k: f64) -> Mat2C {
    s_from_coefficients(&coefficients(pi, k))
}

pub(crate) fn s_from_coefficients(co: &Coefficients) -> Mat2C {
    Mat2C::new(co.t_plus, co.r_minus, co.r_plus, co.t_minus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SEigen {
    pub s_plus: C64,
    pub s_minus: C64,
    /// Populated only when `degenerate` is false.
    pub proj_plus: Option<Mat2C>,
    pub proj_minus: Option<Mat2C>,
    pub eps: Option<[f64; 3]>,
    pub degenerate: bool,
    /// `1 − e_x² sin²Δ₋`.
    pub discriminant: f64,
}

impl SEigen {
    pub fn value(&self, branch: Branch) -> C64 {
        match branch {
            Branch::Plus => self.s_plus,
            Branch::Minus => self.s_minus,
        }
    }

    pub fn projector(&self, branch: Branch) -> Option<Mat2C> {
        match branch {
            Branch::Plus => self.proj_plus,
            Branch::Minus => self.proj_minus,
        }
    }
}

/// `1 − e_x² sin²Δ₋`, written as `cos²Δ₋ + (e_y² + e_z²) sin²Δ₋`.
pub fn discriminant(pi: &PointInteraction, k: f64) -> f64 {
    let (_, dm) = pi.big_delta(k);
    let (s, co) = dm.sin_cos();
    co * co + pi.transverse_norm2() * s * s
}

/// Eigenvalues `s± = e^{i(Δ₊+π/2)}[e_x sinΔ₋ ± i√(1 − e_x² sin²Δ₋)]`, with
/// the `+i√` root labelled `s₊`, and projectors `(1 ± ε·σ)/2`.
pub fn s_eigen(pi: &PointInteraction, k: f64) -> SEigen {
    let (dp, dm) = pi.big_delta(k);
    let [ex, ey, ez] = pi.e();
    let (sin_m, cos_m) = dm.sin_cos();
    let x = ex * sin_m;
    let disc = cos_m * cos_m + pi.transverse_norm2() * sin_m * sin_m;
    let root = disc.sqrt();
    let pre = C64::from_polar(1.0, dp + std::f64::consts::FRAC_PI_2);
    let s_plus = pre * c(x, root);
    let s_minus = pre * c(x, -root);
    if disc < DEGENERACY_THRESHOLD {
        return SEigen {
            s_plus,
            s_minus,
            proj_plus: None,
            proj_minus: None,
            eps: None,
            degenerate: true,
            discriminant: disc,
        };
    }
    let eps = [-cos_m / root, ez * sin_m / root, -ey * sin_m / root];
    SEigen {
        s_plus,
        s_minus,
        proj_plus: Some(Mat2C::projector(eps, 1.0)),
        proj_minus: Some(Mat2C::projector(eps, -1.0)),
        eps: Some(eps),
        degenerate: false,
        discriminant: disc,
    }
}

/// Single eigenvalue `s_branch(k)`.
pub fn s_eigenvalue(pi: &PointInteraction, k: f64, branch: Branch) -> C64 {
    s_eigen(pi, k).value(branch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMethod {
    MatrixPower,
    Spectral,
    Chebyshev,
}

impl std::str::FromStr for PowerMethod {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.replace('-', "_").as_str() {
            "matrix_power" => Ok(PowerMethod::MatrixPower),
            "spectral" => Ok(PowerMethod::Spectral),
            "chebyshev" => Ok(PowerMethod::Chebyshev),
            other => Err(crate::Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

/// Chebyshev polynomials of the first and second kind, `(T_n(x), U_{n−1}(x))`
/// by the three-term recurrence, with `U_{−1} = 0`.
pub fn chebyshev_tu(n: u64, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut t_prev, mut t) = (1.0, x);
    let (mut u_prev, mut u) = (0.0, 1.0); // U_{-1}, U_0
    for _ in 1..n {
        let t_next = 2.0 * x * t - t_prev;
        let u_next = 2.0 * x * u - u_prev;
        t_prev = t;
        t = t_next;
        u_prev = u;
        u = u_next;
    }
    (t, u)
}

/// `S⁽ⁿ⁾(k)`; negative `n` returns the adjoint of `S⁽|n|⁾`. The spectral
/// method falls back to the matrix power at degenerate points.
pub fn s_power(pi: &PointInteraction, k: f64, n: i64, method: PowerMethod) -> Mat2C {
    let m = s_power_nonneg(pi, k, n.unsigned_abs(), method);
    if n < 0 {
        m.adjoint()
    } else {
        m
    }
}

fn s_power_nonneg(pi: &PointInteraction, k: f64, n: u64, method: PowerMethod) -> Mat2C {
    match method {
        PowerMethod::MatrixPower => s_matrix(pi, k).powu(n),
        PowerMethod::Spectral => {
            let eig = s_eigen(pi, k);
            match (eig.proj_plus, eig.proj_minus) {
                (Some(pp), Some(pm)) => {
                    let n = n as i32;
                    pp.scale(eig.s_plus.powi(n)) + pm.scale(eig.s_minus.powi(n))
                }
                _ => s_matrix(pi, k).powu(n),
            }
        }
        PowerMethod::Chebyshev => {
            let s = s_matrix(pi, k);
            let (dp, dm) = pi.big_delta(k);
            let x = pi.e()[0] * dm.sin();
            let pre = C64::from_polar(1.0, dp + std::f64::consts::FRAC_PI_2);
            let m = s.scale(pre.conj());
            let (tn, un1) = chebyshev_tu(n, x);
            let body = Mat2C::scalar(c(tn, 0.0)) + (m - Mat2C::scalar(c(x, 0.0))).scale(c(un1, 0.0));
            body.scale(pre.powi(n as i32))
        }
    }
}
