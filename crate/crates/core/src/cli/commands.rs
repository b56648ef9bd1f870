use serde_json::{json, Value};

use super::selftest;
use super::{fmt_f64, CliError, Command, Outcome, RunConfig};
use crate::circle_spectrum::{CircleSystem, RootKind, SpectrumRoot, DEFAULT_TOL};
use crate::kernel::{
    grouped_weights, kernel_closed_form, kernel_pathsum, kernel_spectral, worldline_weights, KernelMethod,
    KernelQuery, KernelValue,
};
use crate::line_scattering::{coefficients, s_eigen, s_matrix, s_power, PowerMethod};
use crate::mat2::Mat2C;
use crate::params::Preset;
use crate::trace_formula::{trace_check, QuadSpec, TestFunction};

type CmdResult = Result<Outcome, CliError>;

pub(super) fn dispatch(command: Command, cfg: &RunConfig) -> CmdResult {
    match command {
        Command::Presets => presets(),
        Command::Smatrix => smatrix(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::TraceCheck => trace(cfg),
        Command::Kernel => kernel(cfg),
        Command::Worldlines => worldlines(cfg),
        Command::Selftest => selftest_cmd(),
    }
}

fn outcome(result: Value, csv_header: Vec<&'static str>, csv_rows: Vec<Vec<String>>) -> Outcome {
    Outcome { result, csv_header, csv_rows, tolerance_failure: None, text: None }
}

fn require<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Args(format!("missing required --{flag}")))
}

fn system(cfg: &RunConfig) -> Result<CircleSystem, CliError> {
    Ok(CircleSystem::new(cfg.interaction()?, cfg.circumference())?)
}

fn presets() -> CmdResult {
    let table = [
        ("reflectionless", "reflectionless:theta=<angle>", "alpha = (0, pi), e = (cos theta, sin theta, 0)"),
        (
            "scale-independent",
            "scale-independent:theta=<angle>,phi=<angle>",
            "alpha = (0, pi), e = (cos theta, sin theta cos phi, sin theta sin phi)",
        ),
        (
            "pure-reflection",
            "pure-reflection:alpha_plus=<angle>,alpha_minus=<angle>,sign=<+1|-1>",
            "e = (0, 0, sign)",
        ),
        ("parity", "parity:alpha_plus=<angle>,alpha_minus=<angle>,sign=<+1|-1>", "e = (sign, 0, 0)"),
        ("delta-prime", "delta-prime:c=<coupling>", "alpha = (0, pi), theta = arccos((1-c^2)/(1+c^2))"),
    ];
    debug_assert_eq!(table.len(), Preset::names().len());
    let result: Vec<Value> = table
        .iter()
        .map(|(name, syntax, desc)| json!({ "name": name, "syntax": syntax, "description": desc }))
        .collect();
    let rows = table.iter().map(|(n, s, d)| vec![n.to_string(), s.to_string(), d.to_string()]).collect();
    Ok(outcome(Value::Array(result), vec!["name", "syntax", "description"], rows))
}

fn complex_rows(name: &str, m: &Mat2C, rows: &mut Vec<Vec<String>>) {
    for (label, z) in ["11", "12", "21", "22"].iter().zip(m.entries()) {
        rows.push(vec![format!("{name}_{label}"), fmt_f64(z.re), fmt_f64(z.im)]);
    }
}

fn smatrix(cfg: &RunConfig) -> CmdResult {
    let pi = cfg.interaction()?;
    let k = require(cfg.k, "k")?;
    let n = cfg.n.unwrap_or(1);
    let method: PowerMethod = cfg.method.as_deref().unwrap_or("matrix-power").parse()?;
    let tol = cfg.tol.unwrap_or(1e-10);
    let s = s_matrix(&pi, k);
    let sn = s_power(&pi, k, n as i64, method);
    let eig = s_eigen(&pi, k);
    let unitarity = (sn.adjoint() * sn).dist(&Mat2C::identity());
    let (dp, dm) = pi.phase_shifts(k);
    let result = json!({
        "interaction": pi,
        "k": k,
        "n": n,
        "method": method,
        "phase_shifts": [dp, dm],
        "coefficients": coefficients(&pi, k),
        "s_matrix": s,
        "eigenvalues": {
            "s_plus": eig.s_plus,
            "s_minus": eig.s_minus,
            "degenerate": eig.degenerate,
            "discriminant": eig.discriminant,
        },
        "s_power": sn,
        "unitarity_error": unitarity,
    });
    let mut rows = Vec::new();
    complex_rows("s", &s, &mut rows);
    complex_rows("s_power", &sn, &mut rows);
    rows.push(vec!["s_plus".into(), fmt_f64(eig.s_plus.re), fmt_f64(eig.s_plus.im)]);
    rows.push(vec!["s_minus".into(), fmt_f64(eig.s_minus.re), fmt_f64(eig.s_minus.im)]);
    let mut out = outcome(result, vec!["quantity", "re", "im"], rows);
    if unitarity > tol {
        out.tolerance_failure = Some(format!("unitarity error {unitarity:e} exceeds {tol:e}"));
    }
    Ok(out)
}

fn root_row(r: &SpectrumRoot) -> Vec<String> {
    let kind = serde_json::to_value(r.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    vec![r.branch.to_string(), r.m.to_string(), fmt_f64(r.k), fmt_f64(r.fprime), kind]
}

fn spectrum(cfg: &RunConfig) -> CmdResult {
    let sys = system(cfg)?;
    let k_max = cfg.k_max.unwrap_or(50.0 / sys.length);
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let kappa_max = cfg.kappa_max.unwrap_or_else(|| sys.default_kappa_max());
    let branches = cfg.branch.unwrap_or_default().branches();
    let mut roots: Vec<SpectrumRoot> = sys.zero_modes();
    roots.extend(sys.positive_spectrum(k_max, tol)?);
    roots.extend(sys.bound_states(kappa_max)?);
    roots.retain(|r| branches.contains(&r.branch) || r.kind == RootKind::ZeroEnergyLinear);
    let rows = roots.iter().map(root_row).collect();
    let result = json!({
        "interaction": sys.interaction,
        "L": sys.length,
        "k_max": k_max,
        "kappa_max": kappa_max,
        "roots": roots,
    });
    Ok(outcome(result, vec!["branch", "m", "k", "fprime", "kind"], rows))
}

fn trace(cfg: &RunConfig) -> CmdResult {
    let sys = system(cfg)?;
    let f = TestFunction::gaussian(cfg.sigma.unwrap_or(0.5 * sys.length))?;
    let n_max = cfg.n_max.unwrap_or(40);
    let tol = cfg.tol.unwrap_or(1e-7);
    let quad = QuadSpec::default();
    let mut reports = Vec::new();
    for b in cfg.branch.unwrap_or_default().branches() {
        reports.push(trace_check(&sys, b, &f, n_max, cfg.k_max, &quad)?);
    }
    let failures: Vec<String> = reports
        .iter()
        .filter(|r| !(r.abs_err < tol * r.lhs.abs().max(1.0)))
        .map(|r| format!("branch {}: |lhs - rhs| = {:e}", r.branch, r.abs_err))
        .collect();
    let rows = reports
        .iter()
        .map(|r| {
            vec![r.branch.to_string(), fmt_f64(r.lhs), fmt_f64(r.rhs), fmt_f64(r.abs_err), fmt_f64(r.est_trunc_err)]
        })
        .collect();
    let result = json!({
        "interaction": sys.interaction,
        "L": sys.length,
        "test_function": f,
        "n_max": n_max,
        "tol": tol,
        "pass": failures.is_empty(),
        "reports": reports,
    });
    let mut out = outcome(result, vec!["branch", "lhs", "rhs", "abs_err", "est_trunc_err"], rows);
    if !failures.is_empty() {
        out.tolerance_failure = Some(failures.join("; "));
    }
    Ok(out)
}

fn kernel(cfg: &RunConfig) -> CmdResult {
    let sys = system(cfg)?;
    let mut q = KernelQuery::new(require(cfg.x, "x")?, require(cfg.x0, "x0")?, require(cfg.tau, "tau")?);
    q.n_max = cfg.n_max;
    q.m_max = cfg.m_max;
    q.k_max = cfg.k_max;
    q.validate(&sys)?;
    let method: KernelMethod = cfg.method.as_deref().unwrap_or("both").parse()?;
    let tol = cfg.tol.unwrap_or(1e-6);
    let mut values: Vec<KernelValue> = Vec::new();
    match method {
        KernelMethod::Spectral => values.push(kernel_spectral(&sys, &q)?),
        KernelMethod::Pathsum => values.push(kernel_pathsum(&sys, &q)?),
        KernelMethod::Both => {
            values.push(kernel_spectral(&sys, &q)?);
            values.push(kernel_pathsum(&sys, &q)?);
        }
        KernelMethod::Closed => {
            let (preset, l0) =
                cfg.preset()?.ok_or_else(|| CliError::Args("--method closed needs --preset".into()))?;
            values.push(kernel_closed_form(&preset, l0, sys.length, &q)?);
        }
    }
    let rows = values
        .iter()
        .map(|v| {
            let m = serde_json::to_value(v.method).ok().and_then(|m| m.as_str().map(String::from)).unwrap_or_default();
            vec![m, fmt_f64(v.value.re), fmt_f64(v.value.im), fmt_f64(v.est_err), v.terms.to_string()]
        })
        .collect();
    let mut result = json!({
        "interaction": sys.interaction,
        "L": sys.length,
        "x": q.x,
        "x0": q.x0,
        "tau": q.tau,
        "values": values,
    });
    let mut failure = None;
    if let [a, b] = values.as_slice() {
        let diff = (a.value - b.value).norm();
        let scale = a.value.norm().max(1.0);
        result["abs_diff"] = json!(diff);
        result["agree"] = json!(diff <= tol * scale);
        if diff > tol * scale {
            failure = Some(format!("spectral and path-sum values differ by {diff:e}"));
        }
    }
    let mut out = outcome(result, vec!["method", "re", "im", "est_err", "terms"], rows);
    out.tolerance_failure = failure;
    Ok(out)
}

fn worldlines(cfg: &RunConfig) -> CmdResult {
    let pi = cfg.interaction()?;
    let k = require(cfg.k, "k")?;
    let n = cfg.n.unwrap_or(2);
    let tol = cfg.tol.unwrap_or(1e-12);
    let lines = worldline_weights(&pi, k, n)?;
    let grouped = grouped_weights(&lines);
    let sn = s_power(&pi, k, n as i64, PowerMethod::MatrixPower);
    let deviation = grouped.dist(&sn);
    let label = |v: &Value| v.as_str().map(String::from).unwrap_or_default();
    let rows = lines
        .iter()
        .map(|w| {
            let dirs: Vec<String> = w.directions.iter().map(|d| label(&json!(d))).collect();
            let events: Vec<String> = w.events.iter().map(|e| label(&json!(e))).collect();
            vec![dirs.join(" "), events.join(" "), fmt_f64(w.weight.re), fmt_f64(w.weight.im)]
        })
        .collect();
    let result = json!({
        "interaction": pi,
        "k": k,
        "n": n,
        "worldlines": lines,
        "grouped": grouped,
        "s_power": sn,
        "max_deviation": deviation,
    });
    let mut out = outcome(result, vec!["directions", "events", "re", "im"], rows);
    if deviation > tol {
        out.tolerance_failure = Some(format!("grouped weights deviate from S^n by {deviation:e}"));
    }
    Ok(out)
}

fn selftest_cmd() -> CmdResult {
    let checks = selftest::run_all();
    let rows = checks
        .iter()
        .map(|c| {
            vec![
                c.name.to_string(),
                if c.passed { "PASS" } else { "FAIL" }.to_string(),
                fmt_f64(c.value),
                fmt_f64(c.tol),
            ]
        })
        .collect();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    let text = selftest::table(&checks);
    let mut out = outcome(json!(checks), vec!["name", "status", "value", "tol"], rows);
    out.text = Some(text);
    if !failed.is_empty() {
        out.tolerance_failure = Some(format!("failed checks: {}", failed.join(", ")));
    }
    Ok(out)
}
