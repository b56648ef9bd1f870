//! Command-line front end.
//!
//! Every subcommand reads a [`RunConfig`] assembled from an optional JSON
//! file (`--config`) and flags, runs, and writes either a JSON document
//! `{command, config, result}` or CSV rows. Failures print
//! `{"error": kind, "detail": message}` to stderr.
//!
//! Exit codes: 0 success, 1 internal error, 2 invalid arguments, 3 a
//! numerical tolerance or truncation check failed.

mod commands;
pub mod selftest;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::params::{parse_number, Branch, PointInteraction, Preset};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_ARGS: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Branch selection for commands that can treat one or both branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BranchSel {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    #[default]
    #[serde(rename = "both")]
    Both,
}

impl BranchSel {
    pub fn branches(self) -> Vec<Branch> {
        match self {
            BranchSel::Plus => vec![Branch::Plus],
            BranchSel::Minus => vec![Branch::Minus],
            BranchSel::Both => Branch::BOTH.to_vec(),
        }
    }
}

impl std::str::FromStr for BranchSel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "+" | "plus" => Ok(BranchSel::Plus),
            "-" | "minus" => Ok(BranchSel::Minus),
            "both" => Ok(BranchSel::Both),
            other => Err(format!("branch must be +, - or both, got `{other}`")),
        }
    }
}

/// All run controls. Fields left unset take command-specific defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub alpha_plus: Option<f64>,
    pub alpha_minus: Option<f64>,
    pub e: Option<[f64; 3]>,
    #[serde(rename = "L0")]
    pub l0: Option<f64>,
    #[serde(rename = "L")]
    pub length: Option<f64>,
    pub k: Option<f64>,
    pub n: Option<u32>,
    pub k_max: Option<f64>,
    pub tol: Option<f64>,
    pub kappa_max: Option<f64>,
    pub sigma: Option<f64>,
    pub n_max: Option<usize>,
    pub m_max: Option<usize>,
    pub branch: Option<BranchSel>,
    pub x: Option<f64>,
    pub x0: Option<f64>,
    pub tau: Option<f64>,
    pub method: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    /// Rejects non-positive numeric controls and unresolvable presets.
    pub fn validate(&self) -> Result<(), Error> {
        let positive = [
            ("L0", self.l0),
            ("L", self.length),
            ("kmax", self.k_max),
            ("tol", self.tol),
            ("kappa-max", self.kappa_max),
            ("sigma", self.sigma),
            ("tau", self.tau),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidParameter(format!("--{name} must be positive, got {v}")));
                }
            }
        }
        for (name, v) in [("nmax", self.n_max), ("mmax", self.m_max)] {
            if v == Some(0) {
                return Err(Error::InvalidParameter(format!("--{name} must be positive")));
            }
        }
        self.interaction()?;
        Ok(())
    }

    /// The preset, if the interaction was given as one.
    pub fn preset(&self) -> Result<Option<(Preset, f64)>, Error> {
        match &self.preset {
            None => Ok(None),
            Some(s) => {
                let (p, l0) = Preset::parse(s)?;
                Ok(Some((p, self.l0.unwrap_or(l0))))
            }
        }
    }

    /// Resolves the interaction: a preset wins over raw parameters; raw
    /// parameters default to the free particle `(0, π, e_x = 1)`. A raw `e`
    /// within 1e-6 of unit length is normalized, so that rounded decimal
    /// input is accepted.
    pub fn interaction(&self) -> Result<PointInteraction, Error> {
        if let Some((p, l0)) = self.preset()? {
            if self.alpha_plus.is_some() || self.alpha_minus.is_some() || self.e.is_some() {
                return Err(Error::InvalidParameter(
                    "give either --preset or raw --alpha-plus/--alpha-minus/--e, not both".into(),
                ));
            }
            return p.interaction(l0);
        }
        PointInteraction::new(
            self.alpha_plus.unwrap_or(0.0),
            self.alpha_minus.unwrap_or(std::f64::consts::PI),
            self.e.map(normalize_near_unit).unwrap_or([1.0, 0.0, 0.0]),
            self.l0.unwrap_or(1.0),
        )
    }

    pub fn circumference(&self) -> f64 {
        self.length.unwrap_or(1.0)
    }

    /// Overlays every field set in `flags`.
    fn merge(mut self, flags: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if flags.$f.is_some() { self.$f = flags.$f; } )* };
        }
        take!(
            preset, alpha_plus, alpha_minus, e, l0, length, k, n, k_max, tol, kappa_max, sigma, n_max, m_max, branch,
            x, x0, tau, method, out, format
        );
        self
    }
}

#[derive(Debug, Parser)]
#[command(name = "pointscatter", version, about = "Point-interaction scattering, spectra, trace formulae and kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// List the named presets and their syntax.
    Presets,
    /// S-matrix, its eigenvalues and the n-times S-matrix at one momentum.
    Smatrix,
    /// Positive roots, zero modes and bound states on the circle.
    Spectrum,
    /// Both sides of the trace formula for a Gaussian test function.
    TraceCheck,
    /// Euclidean kernel K(x, tau; x0).
    Kernel,
    /// Scattering histories and their weights.
    Worldlines,
    /// Quick run of the invariant suite with a pass/fail table.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Presets => "presets",
            Command::Smatrix => "smatrix",
            Command::Spectrum => "spectrum",
            Command::TraceCheck => "trace-check",
            Command::Kernel => "kernel",
            Command::Worldlines => "worldlines",
            Command::Selftest => "selftest",
        }
    }
}

fn normalize_near_unit(e: [f64; 3]) -> [f64; 3] {
    let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() < 1e-6 {
        e.map(|v| v / norm)
    } else {
        e
    }
}

fn number(s: &str) -> Result<f64, String> {
    parse_number(s).map_err(|e| e.to_string())
}

fn vector(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s.split(',').map(|p| number(p.trim())).collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| format!("expected three comma-separated components, got `{s}`"))
}

#[derive(Debug, Args)]
struct Flags {
    /// Preset as `name:key=val,...`, e.g. `delta-prime:c=1`.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true, value_parser = number, allow_hyphen_values = true)]
    alpha_plus: Option<f64>,
    #[arg(long, global = true, value_parser = number, allow_hyphen_values = true)]
    alpha_minus: Option<f64>,
    /// Unit vector `ex,ey,ez`.
    #[arg(long, global = true, value_parser = vector, allow_hyphen_values = true)]
    e: Option<[f64; 3]>,
    #[arg(long = "L0", global = true, value_parser = number)]
    l0: Option<f64>,
    /// Circumference of the circle.
    #[arg(long = "L", global = true, value_parser = number)]
    length: Option<f64>,
    /// Momentum for `smatrix` and `worldlines`.
    #[arg(long, global = true, value_parser = number, allow_hyphen_values = true)]
    k: Option<f64>,
    /// Power of the S-matrix or number of passes.
    #[arg(long, global = true)]
    n: Option<u32>,
    #[arg(long, global = true, value_parser = number)]
    kmax: Option<f64>,
    #[arg(long, global = true, value_parser = number)]
    tol: Option<f64>,
    #[arg(long, global = true, value_parser = number)]
    kappa_max: Option<f64>,
    #[arg(long, global = true, value_parser = number)]
    sigma: Option<f64>,
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[arg(long, global = true)]
    mmax: Option<usize>,
    /// `+`, `-` or `both`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    branch: Option<BranchSel>,
    #[arg(long, global = true, value_parser = number)]
    x: Option<f64>,
    #[arg(long, global = true, value_parser = number)]
    x0: Option<f64>,
    #[arg(long, global = true, value_parser = number)]
    tau: Option<f64>,
    /// Kernel method (spectral, pathsum, closed, both) or S-matrix power
    /// method (matrix-power, spectral, chebyshev).
    #[arg(long, global = true)]
    method: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// JSON file with a RunConfig; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Add the wall-clock time to JSON output.
    #[arg(long, global = true)]
    timestamp: bool,
}

impl Flags {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            preset: self.preset.clone(),
            alpha_plus: self.alpha_plus,
            alpha_minus: self.alpha_minus,
            e: self.e,
            l0: self.l0,
            length: self.length,
            k: self.k,
            n: self.n,
            k_max: self.kmax,
            tol: self.tol,
            kappa_max: self.kappa_max,
            sigma: self.sigma,
            n_max: self.nmax,
            m_max: self.mmax,
            branch: self.branch,
            x: self.x,
            x0: self.x0,
            tau: self.tau,
            method: self.method.clone(),
            out: self.out.clone(),
            format: self.format,
        }
    }
}

/// What a command produced.
pub(crate) struct Outcome {
    pub result: Value,
    pub csv_header: Vec<&'static str>,
    pub csv_rows: Vec<Vec<String>>,
    /// Set when a numerical check failed; the output is still written.
    pub tolerance_failure: Option<String>,
    /// Plain-text rendering used when no `--format` was requested.
    pub text: Option<String>,
}

#[derive(Debug)]
pub(crate) enum CliError {
    Args(String),
    Numeric(Error),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::UnknownPreset(_) => CliError::Args(e.to_string()),
            Error::Io(_) | Error::Json(_) => CliError::Internal(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::UnknownPreset(_) => "unknown_preset",
        Error::InconclusiveBracket { .. } => "inconclusive_bracket",
        Error::Degenerate { .. } => "degenerate",
        Error::ContinuationPole { .. } => "continuation_pole",
        Error::FakeZeroMode => "fake_zero_mode",
        Error::Truncation(_) => "truncation",
        Error::NegativeFPrime { .. } => "negative_fprime",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

fn report(kind: &str, detail: &str) {
    let msg = json!({ "error": kind, "detail": detail });
    eprintln!("{msg}");
}

/// Caps the global rayon pool from `POINTSCATTER_THREADS`. Only the first
/// call has an effect.
fn configure_threads() {
    if let Some(n) = std::env::var("POINTSCATTER_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(std::io::stdout(), "{e}");
                return EXIT_OK;
            }
            report("invalid_arguments", e.to_string().trim());
            return EXIT_ARGS;
        }
    };
    configure_threads();

    let config = match load_config(&cli.flags) {
        Ok(c) => c,
        Err(msg) => {
            report("invalid_arguments", &msg);
            return EXIT_ARGS;
        }
    };
    if let Err(e) = config.validate() {
        report(error_kind(&e), &e.to_string());
        return EXIT_ARGS;
    }

    let outcome = match commands::dispatch(cli.command, &config) {
        Ok(o) => o,
        Err(CliError::Args(msg)) => {
            report("invalid_parameter", &msg);
            return EXIT_ARGS;
        }
        Err(CliError::Numeric(e)) => {
            report(error_kind(&e), &e.to_string());
            return EXIT_TOLERANCE;
        }
        Err(CliError::Internal(msg)) => {
            report("internal", &msg);
            return EXIT_INTERNAL;
        }
    };

    let rendered = match render(cli.command, &config, &outcome, cli.flags.timestamp) {
        Ok(r) => r,
        Err(msg) => {
            report("internal", &msg);
            return EXIT_INTERNAL;
        }
    };
    if let Err(e) = emit(&config, &rendered) {
        report("io", &e.to_string());
        return EXIT_INTERNAL;
    }
    match outcome.tolerance_failure {
        Some(detail) => {
            report("tolerance", &detail);
            EXIT_TOLERANCE
        }
        None => EXIT_OK,
    }
}

fn load_config(flags: &Flags) -> Result<RunConfig, String> {
    let base = match &flags.config {
        None => RunConfig::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let value: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            // Accept either a bare RunConfig or a full output document.
            let cfg = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(cfg).map_err(|e| format!("{}: {e}", path.display()))?
        }
    };
    Ok(base.merge(flags.to_config()))
}

fn render(command: Command, config: &RunConfig, outcome: &Outcome, timestamp: bool) -> Result<String, String> {
    if config.format.is_none() {
        if let Some(text) = &outcome.text {
            return Ok(text.clone());
        }
    }
    match config.format.unwrap_or_default() {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&outcome.csv_header).map_err(|e| e.to_string())?;
            for row in &outcome.csv_rows {
                w.write_record(row).map_err(|e| e.to_string())?;
            }
            let bytes = w.into_inner().map_err(|e| e.to_string())?;
            String::from_utf8(bytes).map_err(|e| e.to_string())
        }
        Format::Json => {
            let mut doc = json!({
                "command": command.name(),
                "config": config,
                "result": outcome.result,
            });
            if timestamp {
                let secs = std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                doc["timestamp"] = json!(secs);
            }
            serde_json::to_string_pretty(&doc).map(|s| s + "\n").map_err(|e| e.to_string())
        }
    }
}

fn emit(config: &RunConfig, text: &str) -> std::io::Result<()> {
    match &config.out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

/// Shortest round-trip representation, used for CSV cells.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
