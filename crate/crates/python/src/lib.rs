//! Python bindings for the `pointscatter` core library.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pointscatter::circle_spectrum::{CircleSystem, SpectrumRoot, DEFAULT_TOL};
use pointscatter::kernel::{
    grouped_weights, kernel_closed_form, kernel_pathsum, kernel_spectral, worldline_weights, KernelQuery,
};
use pointscatter::line_scattering::{coefficients, s_matrix, s_power, PowerMethod};
use pointscatter::mat2::Mat2C;
use pointscatter::params::{Branch, PointInteraction, Preset};
use pointscatter::trace_formula::{trace_check, QuadSpec, TestFunction};
use pointscatter::Error;

type Matrix = [[Complex64; 2]; 2];

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::UnknownPreset(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn matrix(m: &Mat2C) -> Matrix {
    [[m.a11, m.a12], [m.a21, m.a22]]
}

fn branch(s: &str) -> PyResult<Branch> {
    match s {
        "+" | "plus" => Ok(Branch::Plus),
        "-" | "minus" => Ok(Branch::Minus),
        other => Err(PyValueError::new_err(format!("branch must be '+' or '-', got {other:?}"))),
    }
}

fn branches(s: Option<&str>) -> PyResult<Vec<Branch>> {
    match s {
        None | Some("both") => Ok(Branch::BOTH.to_vec()),
        Some(b) => Ok(vec![branch(b)?]),
    }
}

/// A U(2) point interaction `(alpha_plus, alpha_minus, e, L0)`.
#[pyclass(name = "PointInteraction", module = "pointscatter_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPointInteraction {
    inner: PointInteraction,
    preset: Option<(Preset, f64)>,
}

#[pymethods]
impl PyPointInteraction {
    #[new]
    #[pyo3(signature = (alpha_plus, alpha_minus, e, l0 = 1.0))]
    fn new(alpha_plus: f64, alpha_minus: f64, e: [f64; 3], l0: f64) -> PyResult<Self> {
        let inner = PointInteraction::new(alpha_plus, alpha_minus, e, l0).map_err(to_py)?;
        Ok(PyPointInteraction { inner, preset: None })
    }

    /// Builds a named preset such as `"delta-prime:c=1"`.
    #[staticmethod]
    fn preset(spec: &str) -> PyResult<Self> {
        let (p, l0) = Preset::parse(spec).map_err(to_py)?;
        let inner = p.interaction(l0).map_err(to_py)?;
        Ok(PyPointInteraction { inner, preset: Some((p, l0)) })
    }

    #[getter]
    fn alpha_plus(&self) -> f64 {
        self.inner.alpha_plus()
    }

    #[getter]
    fn alpha_minus(&self) -> f64 {
        self.inner.alpha_minus()
    }

    #[getter]
    fn e(&self) -> [f64; 3] {
        self.inner.e()
    }

    #[getter]
    fn l0(&self) -> f64 {
        self.inner.l0()
    }

    /// `(delta_plus(k), delta_minus(k))`.
    fn phase_shifts(&self, k: f64) -> (f64, f64) {
        self.inner.phase_shifts(k)
    }

    /// Transmission and reflection amplitudes as a dict.
    fn coefficients(&self, k: f64) -> std::collections::HashMap<&'static str, Complex64> {
        let c = coefficients(&self.inner, k);
        [("t_plus", c.t_plus), ("t_minus", c.t_minus), ("r_plus", c.r_plus), ("r_minus", c.r_minus)]
            .into_iter()
            .collect()
    }

    fn s_matrix(&self, k: f64) -> Matrix {
        matrix(&s_matrix(&self.inner, k))
    }

    /// `S(k)^n` by `"matrix-power"`, `"spectral"` or `"chebyshev"`.
    #[pyo3(signature = (k, n, method = "matrix-power"))]
    fn s_power(&self, k: f64, n: i64, method: &str) -> PyResult<Matrix> {
        let m: PowerMethod = method.parse().map_err(to_py)?;
        Ok(matrix(&s_power(&self.inner, k, n, m)))
    }

    /// All `2^(n+1)` direction histories as `(directions, events, weight)`.
    fn worldlines(&self, k: f64, n: u32) -> PyResult<Vec<(String, Vec<String>, Complex64)>> {
        let lines = worldline_weights(&self.inner, k, n).map_err(to_py)?;
        Ok(lines
            .iter()
            .map(|w| {
                let dirs: String = w.directions.iter().map(label).collect();
                let events = w.events.iter().map(label).collect();
                (dirs, events, w.weight)
            })
            .collect())
    }

    /// Worldline weights summed by `(outgoing, incoming)` direction.
    fn grouped_worldlines(&self, k: f64, n: u32) -> PyResult<Matrix> {
        let lines = worldline_weights(&self.inner, k, n).map_err(to_py)?;
        Ok(matrix(&grouped_weights(&lines)))
    }

    fn __repr__(&self) -> String {
        let [ex, ey, ez] = self.inner.e();
        format!(
            "PointInteraction(alpha_plus={}, alpha_minus={}, e=({ex}, {ey}, {ez}), l0={})",
            self.inner.alpha_plus(),
            self.inner.alpha_minus(),
            self.inner.l0()
        )
    }
}

fn label<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// One entry of a circle spectrum.
#[pyclass(name = "Root", module = "pointscatter_py", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyRoot {
    branch: String,
    m: i64,
    k: f64,
    fprime: f64,
    kind: String,
}

#[pymethods]
impl PyRoot {
    fn __repr__(&self) -> String {
        format!("Root(branch={:?}, m={}, k={}, fprime={}, kind={:?})", self.branch, self.m, self.k, self.fprime, self.kind)
    }
}

impl From<&SpectrumRoot> for PyRoot {
    fn from(r: &SpectrumRoot) -> Self {
        PyRoot { branch: r.branch.to_string(), m: r.m, k: r.k, fprime: r.fprime, kind: label(&r.kind) }
    }
}

/// A point interaction on a circle of circumference `length`.
#[pyclass(name = "CircleSystem", module = "pointscatter_py", frozen, skip_from_py_object)]
struct PyCircleSystem {
    inner: CircleSystem,
    preset: Option<(Preset, f64)>,
}

#[pymethods]
impl PyCircleSystem {
    #[new]
    #[pyo3(signature = (interaction, length = 1.0))]
    fn new(interaction: &PyPointInteraction, length: f64) -> PyResult<Self> {
        let inner = CircleSystem::new(interaction.inner, length).map_err(to_py)?;
        Ok(PyCircleSystem { inner, preset: interaction.preset })
    }

    #[getter]
    fn length(&self) -> f64 {
        self.inner.length
    }

    /// Positive roots in `(0, k_max]`, `branch` is `"+"`, `"-"` or `None`.
    #[pyo3(signature = (k_max, branch = None, tol = DEFAULT_TOL))]
    fn positive_roots(&self, k_max: f64, branch: Option<&str>, tol: f64) -> PyResult<Vec<PyRoot>> {
        let mut out = Vec::new();
        for b in branches(branch)? {
            out.extend(self.inner.positive_roots(b, k_max, tol).map_err(to_py)?.iter().map(PyRoot::from));
        }
        Ok(out)
    }

    fn zero_modes(&self) -> Vec<PyRoot> {
        self.inner.zero_modes().iter().map(PyRoot::from).collect()
    }

    /// Negative-energy states (`k` holds kappa) and the zero-energy linear
    /// state when present.
    #[pyo3(signature = (kappa_max = None))]
    fn bound_states(&self, kappa_max: Option<f64>) -> PyResult<Vec<PyRoot>> {
        let kmax = kappa_max.unwrap_or_else(|| self.inner.default_kappa_max());
        Ok(self.inner.bound_states(kmax).map_err(to_py)?.iter().map(PyRoot::from).collect())
    }

    /// Normalised eigenfunction values of a root at the points `xs`.
    fn eigenfunction(&self, root: &PyRoot, xs: Vec<f64>) -> PyResult<Vec<Complex64>> {
        let spectrum_root = SpectrumRoot {
            branch: branch(&root.branch)?,
            m: root.m,
            k: root.k,
            fprime: root.fprime,
            kind: serde_json::from_value(serde_json::Value::String(root.kind.clone()))
                .map_err(|e| PyValueError::new_err(e.to_string()))?,
        };
        let state = self.inner.eigenstate(&spectrum_root).map_err(to_py)?;
        Ok(xs.iter().map(|&x| state.eval(x)).collect())
    }

    /// Euclidean kernel `K(x, tau; x0)` by `"spectral"`, `"pathsum"` or
    /// `"closed"` (systems built from a preset only).
    #[pyo3(signature = (x, x0, tau, method = "spectral"))]
    fn kernel(&self, x: f64, x0: f64, tau: f64, method: &str) -> PyResult<Complex64> {
        let q = KernelQuery::new(x, x0, tau);
        q.validate(&self.inner).map_err(to_py)?;
        let v = match method {
            "spectral" => kernel_spectral(&self.inner, &q),
            "pathsum" => kernel_pathsum(&self.inner, &q),
            "closed" => match &self.preset {
                Some((p, l0)) => kernel_closed_form(p, *l0, self.inner.length, &q),
                None => return Err(PyValueError::new_err("closed-form kernels need a preset interaction")),
            },
            other => return Err(PyValueError::new_err(format!("unknown kernel method {other:?}"))),
        };
        Ok(v.map_err(to_py)?.value)
    }

    /// Both sides of the trace formula for a Gaussian of width `sigma`.
    #[pyo3(signature = (sigma, branch = "+", n_max = 40))]
    fn trace_check(&self, sigma: f64, branch: &str, n_max: usize) -> PyResult<(f64, f64, f64)> {
        let f = TestFunction::gaussian(sigma).map_err(to_py)?;
        let r = trace_check(&self.inner, self::branch(branch)?, &f, n_max, None, &QuadSpec::default()).map_err(to_py)?;
        Ok((r.lhs, r.rhs, r.abs_err))
    }
}

#[pymodule]
fn pointscatter_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPointInteraction>()?;
    m.add_class::<PyCircleSystem>()?;
    m.add_class::<PyRoot>()?;
    Ok(())
}
