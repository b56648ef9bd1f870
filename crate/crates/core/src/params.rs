//! U(2) point-interaction parameters, phase shifts and the named subfamilies.
//!
//! A point interaction is fixed by the two eigenphases `alpha_plus`,
//! `alpha_minus` of the boundary matrix, the unit vector `e` of its
//! eigenprojectors `(1 ± e·σ)/2`, and a length scale `L0`. Each eigenbranch
//! reduces to a Robin-type condition with length `L± = L0·cot(α±/2)`, which
//! fixes the momentum-dependent phase shift `δ±(k) = 2·Arccot(k·L±)`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for angle comparisons after reduction mod 2π.
pub const ANGLE_TOL: f64 = 1e-12;

/// Tolerance on `|e| = 1`.
pub const UNIT_TOL: f64 = 1e-12;

/// Eigenbranch label `±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

/// Reduce an angle to `[0, 2π)`, snapping values within [`ANGLE_TOL`] of `0`,
/// `π` or `2π` onto `0` or `π`.
pub fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r < ANGLE_TOL || TAU - r < ANGLE_TOL {
        0.0
    } else if (r - PI).abs() < ANGLE_TOL {
        PI
    } else {
        r
    }
}

/// Phase-shift law of one eigenbranch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseShiftSpec {
    /// `α = 0`: `δ ≡ 0` (Neumann-like branch, `L±` diverges).
    ConstantZero,
    /// `α = π`: `δ ≡ π` (Dirichlet-like branch, `L± = 0`).
    ConstantPi,
    /// `δ(k) = 2·Arccot(k·length)` with a finite, nonzero signed length.
    Generic { length: f64 },
}

impl PhaseShiftSpec {
    /// `δ(k)`. For generic kinds this is `π − 2·atan(k·L)`, which is
    /// `2·Arccot(kL) ∈ (0, 2π)` for `k > 0` and continues through `k = 0` as
    /// `δ(−k) = 2π − δ(k)`.
    pub fn phase(&self, k: f64) -> f64 {
        match *self {
            PhaseShiftSpec::ConstantZero => 0.0,
            PhaseShiftSpec::ConstantPi => PI,
            PhaseShiftSpec::Generic { length } => PI - 2.0 * (k * length).atan(),
        }
    }

    /// Analytic `δ'(k) = −2L / (1 + k²L²)`.
    pub fn derivative(&self, k: f64) -> f64 {
        match *self {
            PhaseShiftSpec::ConstantZero | PhaseShiftSpec::ConstantPi => 0.0,
            PhaseShiftSpec::Generic { length } => {
                let kl = k * length;
                -2.0 * length / (1.0 + kl * kl)
            }
        }
    }

    /// `e^{iδ(iκ)}` written as `numerator / denominator`, the exact rational
    /// continuation `(κL + 1)/(κL − 1)` of the phase factor to `k = iκ`.
    pub fn continued_factor(&self, kappa: f64) -> (f64, f64) {
        match *self {
            PhaseShiftSpec::ConstantZero => (1.0, 1.0),
            PhaseShiftSpec::ConstantPi => (-1.0, 1.0),
            PhaseShiftSpec::Generic { length } => (kappa * length + 1.0, kappa * length - 1.0),
        }
    }

    /// `L±` if finite (`0` for the constant-π kind).
    pub fn length(&self) -> Option<f64> {
        match *self {
            PhaseShiftSpec::ConstantZero => None,
            PhaseShiftSpec::ConstantPi => Some(0.0),
            PhaseShiftSpec::Generic { length } => Some(length),
        }
    }

    pub fn is_constant(&self) -> bool {
        !matches!(self, PhaseShiftSpec::Generic { .. })
    }
}

/// A U(2) point interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPointInteraction", into = "RawPointInteraction")]
pub struct PointInteraction {
    alpha_plus: f64,
    alpha_minus: f64,
    e: [f64; 3],
    l0: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPointInteraction {
    alpha_plus: f64,
    alpha_minus: f64,
    e: [f64; 3],
    #[serde(rename = "L0")]
    l0: f64,
}

impl TryFrom<RawPointInteraction> for PointInteraction {
    type Error = Error;

    fn try_from(raw: RawPointInteraction) -> Result<Self> {
        PointInteraction::new(raw.alpha_plus, raw.alpha_minus, raw.e, raw.l0)
    }
}

impl From<PointInteraction> for RawPointInteraction {
    fn from(p: PointInteraction) -> Self {
        RawPointInteraction {
            alpha_plus: p.alpha_plus,
            alpha_minus: p.alpha_minus,
            e: p.e,
            l0: p.l0,
        }
    }
}

impl PointInteraction {
    /// Validates `|e| = 1` (within 1e-12) and `L0 > 0`; angles are reduced
    /// mod 2π and `e` is renormalised.
    pub fn new(alpha_plus: f64, alpha_minus: f64, e: [f64; 3], l0: f64) -> Result<Self> {
        if !(alpha_plus.is_finite() && alpha_minus.is_finite()) {
            return Err(Error::InvalidParameter("angles must be finite".into()));
        }
        if !(l0.is_finite() && l0 > 0.0) {
            return Err(Error::InvalidParameter(format!("L0 must be positive, got {l0}")));
        }
        let norm = e.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidParameter(format!(
                "e must be a unit vector, |e| = {norm}"
            )));
        }
        Ok(PointInteraction {
            alpha_plus: reduce_angle(alpha_plus),
            alpha_minus: reduce_angle(alpha_minus),
            e: [e[0] / norm, e[1] / norm, e[2] / norm],
            l0,
        })
    }

    pub fn alpha_plus(&self) -> f64 {
        self.alpha_plus
    }

    pub fn alpha_minus(&self) -> f64 {
        self.alpha_minus
    }

    pub fn alpha(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.alpha_plus,
            Branch::Minus => self.alpha_minus,
        }
    }

    pub fn e(&self) -> [f64; 3] {
        self.e
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    /// `e_y² + e_z²`, i.e. `1 − e_x²` without cancellation.
    pub fn transverse_norm2(&self) -> f64 {
        self.e[1] * self.e[1] + self.e[2] * self.e[2]
    }

    pub fn phase_shift_spec(&self, branch: Branch) -> PhaseShiftSpec {
        let alpha = self.alpha(branch);
        if alpha == 0.0 {
            PhaseShiftSpec::ConstantZero
        } else if alpha == PI {
            PhaseShiftSpec::ConstantPi
        } else {
            PhaseShiftSpec::Generic {
                length: self.l0 / (alpha / 2.0).tan(),
            }
        }
    }

    pub fn phase_shifts(&self, k: f64) -> (f64, f64) {
        (
            self.phase_shift_spec(Branch::Plus).phase(k),
            self.phase_shift_spec(Branch::Minus).phase(k),
        )
    }

    /// `(Δ₊, Δ₋) = ((δ₊ + δ₋)/2, (δ₊ − δ₋)/2)`.
    pub fn big_delta(&self, k: f64) -> (f64, f64) {
        let (dp, dm) = self.phase_shifts(k);
        (0.5 * (dp + dm), 0.5 * (dp - dm))
    }

    /// The same interaction with `(e_y, e_z)` rotated by `2β`; this is the
    /// image of the boundary condition under the unitary `exp(iβ·P)` built
    /// from the parity operator, so the spectrum must not change.
    pub fn rotated_yz(&self, beta: f64) -> PointInteraction {
        let (s, c) = (2.0 * beta).sin_cos();
        let [ex, ey, ez] = self.e;
        PointInteraction {
            e: [ex, c * ey + s * ez, -s * ey + c * ez],
            ..*self
        }
    }

    /// `|L±|` summed over generic branches; bounds `|∂_k arg s±| / 2`.
    pub fn length_scale_sum(&self) -> f64 {
        Branch::BOTH
            .iter()
            .filter_map(|&b| self.phase_shift_spec(b).length())
            .map(f64::abs)
            .sum()
    }
}

/// Named subfamilies of point interactions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Preset {
    /// `(α₊, α₋) = (0, π)`, `e = (cos θ, sin θ, 0)`.
    Reflectionless { theta: f64 },
    /// `(α₊, α₋) = (0, π)`, `e = (cos θ, sin θ cos φ, sin θ sin φ)`.
    ScaleIndependent { theta: f64, phi: f64 },
    /// `e = (0, 0, ±1)`.
    PureReflection {
        alpha_plus: f64,
        alpha_minus: f64,
        sign: i8,
    },
    /// `e = (±1, 0, 0)`.
    Parity {
        alpha_plus: f64,
        alpha_minus: f64,
        sign: i8,
    },
    /// The δ′ interaction of coupling `c`: `(0, π)` with
    /// `θ = Arccos[(1−c²)/(1+c²)]` and `e = (cos θ, 0, ±sin θ)`.
    DeltaPrime { c: f64 },
}

impl Preset {
    /// The point interaction with length scale `l0`.
    pub fn interaction(&self, l0: f64) -> Result<PointInteraction> {
        match *self {
            Preset::Reflectionless { theta } => {
                check_range("theta", theta, 0.0, TAU, false)?;
                PointInteraction::new(0.0, PI, [theta.cos(), theta.sin(), 0.0], l0)
            }
            Preset::ScaleIndependent { theta, phi } => {
                check_range("theta", theta, 0.0, PI, true)?;
                check_range("phi", phi, 0.0, TAU, false)?;
                let (st, ct) = theta.sin_cos();
                PointInteraction::new(0.0, PI, [ct, st * phi.cos(), st * phi.sin()], l0)
            }
            Preset::PureReflection {
                alpha_plus,
                alpha_minus,
                sign,
            } => PointInteraction::new(alpha_plus, alpha_minus, [0.0, 0.0, unit_sign(sign)?], l0),
            Preset::Parity {
                alpha_plus,
                alpha_minus,
                sign,
            } => PointInteraction::new(alpha_plus, alpha_minus, [unit_sign(sign)?, 0.0, 0.0], l0),
            Preset::DeltaPrime { c } => {
                if !c.is_finite() {
                    return Err(Error::InvalidParameter("c must be finite".into()));
                }
                let theta = delta_prime_theta(c);
                let ez = if c < 0.0 { -theta.sin() } else { theta.sin() };
                PointInteraction::new(0.0, PI, [theta.cos(), 0.0, ez], l0)
            }
        }
    }

    /// Parses `name:key=val,key=val`; names use dashes or underscores.
    /// An optional `l0` key is returned alongside the preset (default 1).
    pub fn parse(spec: &str) -> Result<(Preset, f64)> {
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n, a),
            None => (spec, ""),
        };
        let mut kv: Vec<(String, f64)> = Vec::new();
        for part in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{part}`")))?;
            let v = parse_number(v.trim())?;
            kv.push((k.trim().to_ascii_lowercase().replace('-', "_"), v));
        }
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            kv.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .or(default)
                .ok_or_else(|| Error::InvalidParameter(format!("preset `{name}` needs `{key}`")))
        };
        let l0 = get("l0", Some(1.0))?;
        let sign = |v: f64| -> Result<i8> {
            if v == 1.0 {
                Ok(1)
            } else if v == -1.0 {
                Ok(-1)
            } else {
                Err(Error::InvalidParameter(format!("sign must be ±1, got {v}")))
            }
        };
        let preset = match name.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "reflectionless" => Preset::Reflectionless {
                theta: get("theta", None)?,
            },
            "scale_independent" => Preset::ScaleIndependent {
                theta: get("theta", None)?,
                phi: get("phi", None)?,
            },
            "pure_reflection" => Preset::PureReflection {
                alpha_plus: get("alpha_plus", None)?,
                alpha_minus: get("alpha_minus", None)?,
                sign: sign(get("sign", Some(1.0))?)?,
            },
            "parity" => Preset::Parity {
                alpha_plus: get("alpha_plus", None)?,
                alpha_minus: get("alpha_minus", None)?,
                sign: sign(get("sign", Some(1.0))?)?,
            },
            "delta_prime" => Preset::DeltaPrime { c: get("c", None)? },
            other => return Err(Error::UnknownPreset(other.to_string())),
        };
        Ok((preset, l0))
    }

    pub fn names() -> &'static [&'static str] {
        &[
            "reflectionless",
            "scale-independent",
            "pure-reflection",
            "parity",
            "delta-prime",
        ]
    }
}

/// `θ = Arccos[(1 − c²)/(1 + c²)] ∈ [0, π)`.
pub fn delta_prime_theta(c: f64) -> f64 {
    let c2 = c * c;
    ((1.0 - c2) / (1.0 + c2)).clamp(-1.0, 1.0).acos()
}

/// Accepts plain floats and `pi`, `pi/2`, `3pi/2`, `2*pi/3` style values.
pub fn parse_number(s: &str) -> Result<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    let bad = || Error::InvalidParameter(format!("cannot parse number `{s}`"));
    let lower = s.to_ascii_lowercase().replace(' ', "");
    let (num, den) = match lower.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().map_err(|_| bad())?),
        None => (lower.clone(), 1.0),
    };
    let coeff = num.strip_suffix("pi").ok_or_else(bad)?;
    let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
    let c = match coeff {
        "" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(c * PI / den)
}

fn unit_sign(sign: i8) -> Result<f64> {
    match sign {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        s => Err(Error::InvalidParameter(format!("sign must be ±1, got {s}"))),
    }
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64, closed: bool) -> Result<()> {
    let ok = v >= lo && (v < hi || (closed && v <= hi));
    if ok {
        Ok(())
    } else {
        let close = if closed { ']' } else { ')' };
        Err(Error::InvalidParameter(format!(
            "{name} = {v} outside [{lo}, {hi}{close}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic(length: f64) -> PhaseShiftSpec {
        PhaseShiftSpec::Generic { length }
    }

    #[test]
    fn spec_kinds_follow_alpha() {
        let pi = PointInteraction::new(PI, 0.0, [0.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(pi.phase_shift_spec(Branch::Plus), PhaseShiftSpec::ConstantPi);
        assert_eq!(pi.phase_shift_spec(Branch::Minus), PhaseShiftSpec::ConstantZero);
        let half = PointInteraction::new(PI / 2.0, 3.0 * PI / 2.0, [0.0, 0.0, 1.0], 1.0).unwrap();
        match half.phase_shift_spec(Branch::Plus) {
            PhaseShiftSpec::Generic { length } => assert!((length - 1.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        match half.phase_shift_spec(Branch::Minus) {
            PhaseShiftSpec::Generic { length } => assert!((length + 1.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn phase_shift_values() {
        assert!((generic(1.0).phase(1.0) - PI / 2.0).abs() < 1e-15);
        assert_eq!(PhaseShiftSpec::ConstantPi.phase(7.3), PI);
        assert!((generic(1.0).phase(-1.0) - 3.0 * PI / 2.0).abs() < 1e-15);
        // δ(0⁺) = π for generic kinds, from either side
        assert!((generic(-2.5).phase(1e-300) - PI).abs() < 1e-15);
        assert!((generic(-2.5).phase(-1e-300) - PI).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_identity_and_fd() {
        assert_eq!(PhaseShiftSpec::ConstantPi.derivative(3.0), 0.0);
        assert!((PI.sin() / 3.0).abs() < 1e-15);

        let s = generic(1.0);
        assert!((s.derivative(1.0) + 1.0).abs() < 1e-15);
        assert!((-(s.phase(1.0)).sin() / 1.0 + 1.0).abs() < 1e-15);

        let s = generic(2.0);
        let h = 1e-6;
        let fd = (s.phase(0.5 + h) - s.phase(0.5 - h)) / (2.0 * h);
        assert!((s.derivative(0.5) + 2.0).abs() < 1e-15);
        assert!((fd + 2.0).abs() < 1e-8);
    }

    #[test]
    fn big_delta_examples() {
        let p = PointInteraction::new(0.0, PI, [1.0, 0.0, 0.0], 1.0).unwrap();
        for k in [0.1, 1.0, -4.0] {
            let (dp, dm) = p.big_delta(k);
            assert!((dp - PI / 2.0).abs() < 1e-15 && (dm + PI / 2.0).abs() < 1e-15);
        }
        let p = PointInteraction::new(1.3, 1.3, [0.0, 0.6, 0.8], 2.0).unwrap();
        assert_eq!(p.big_delta(0.7).1, 0.0);

        let p = PointInteraction::new(PI / 2.0, 3.0 * PI / 2.0, [0.0, 0.0, 1.0], 1.0).unwrap();
        let (dp, dm) = p.big_delta(1.0);
        // δ₊ = 2 Arccot(1) = π/2, δ₋ = 2 Arccot(−1) = 3π/2
        assert!((dp - PI).abs() < 1e-15);
        assert!((dm + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn presets() {
        let (p, l0) = Preset::parse("delta-prime:c=1").unwrap();
        let d = p.interaction(l0).unwrap();
        let [ex, ey, ez] = d.e();
        assert!(ex.abs() < 1e-15 && ey == 0.0 && (ez - 1.0).abs() < 1e-15);
        assert!((delta_prime_theta(1.0) - PI / 2.0).abs() < 1e-15);

        let neg = Preset::DeltaPrime { c: -0.5 }.interaction(1.0).unwrap();
        assert!(neg.e()[2] < 0.0);

        let free = Preset::Reflectionless { theta: 0.0 }.interaction(1.0).unwrap();
        assert_eq!(free.e(), [1.0, 0.0, 0.0]);
        assert_eq!((free.alpha_plus(), free.alpha_minus()), (0.0, PI));

        let dd = Preset::parse("pure-reflection:alpha_plus=pi,alpha_minus=pi,sign=1")
            .unwrap()
            .0
            .interaction(1.0)
            .unwrap();
        assert_eq!(dd.phase_shift_spec(Branch::Plus), PhaseShiftSpec::ConstantPi);
        assert_eq!(dd.e(), [0.0, 0.0, 1.0]);

        assert!(matches!(Preset::parse("nope:x=1"), Err(Error::UnknownPreset(_))));
        assert!(Preset::ScaleIndependent { theta: 4.0, phi: 0.0 }.interaction(1.0).is_err());
        assert!(Preset::Reflectionless { theta: -0.1 }.interaction(1.0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PointInteraction::new(0.0, 0.0, [1.0, 1.0, 0.0], 1.0).is_err());
        assert!(PointInteraction::new(0.0, 0.0, [1.0, 0.0, 0.0], 0.0).is_err());
        assert!(PointInteraction::new(f64::NAN, 0.0, [1.0, 0.0, 0.0], 1.0).is_err());
        let p = PointInteraction::new(TAU - 1e-14, -PI, [0.0, 1.0, 0.0], 1.0).unwrap();
        assert_eq!((p.alpha_plus(), p.alpha_minus()), (0.0, PI));
    }

    #[test]
    fn json_round_trip() {
        let p = PointInteraction::new(1.0, 2.0, [0.6, 0.0, 0.8], 1.5).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"L0\":1.5"));
        let q: PointInteraction = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = r#"{"alpha_plus":0,"alpha_minus":0,"e":[1,1,1],"L0":1}"#;
        assert!(serde_json::from_str::<PointInteraction>(bad).is_err());
    }

    #[test]
    fn parse_numbers() {
        assert_eq!(parse_number("0.25").unwrap(), 0.25);
        assert!((parse_number("pi/2").unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((parse_number("4pi/3").unwrap() - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((parse_number("2*pi/3").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!(parse_number("x").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_spec() -> impl Strategy<Value = PhaseShiftSpec> {
            prop_oneof![
                Just(PhaseShiftSpec::ConstantZero),
                Just(PhaseShiftSpec::ConstantPi),
                (-20.0f64..20.0)
                    .prop_filter("nonzero", |l| l.abs() > 1e-3)
                    .prop_map(|length| PhaseShiftSpec::Generic { length }),
            ]
        }

        proptest! {
            #[test]
            fn functional_identity(spec in any_spec(), k in prop_oneof![-50.0f64..-1e-3, 1e-3f64..50.0]) {
                let lhs = spec.derivative(k);
                let rhs = -spec.phase(k).sin() / k;
                prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
            }

            #[test]
            fn range_and_reflection(spec in any_spec(), k in 1e-6f64..100.0) {
                let d = spec.phase(k);
                prop_assert!((0.0..TAU).contains(&d));
                let expected = if spec == PhaseShiftSpec::ConstantZero { -d } else { TAU - d };
                prop_assert!((spec.phase(-k) - expected).abs() < 1e-12);
            }
        }
    }
}
