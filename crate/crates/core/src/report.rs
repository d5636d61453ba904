//! Result files written by the command-line driver.
//!
//! CSV files open with a `#` line holding the canonical command line,
//! followed by a header row. JSON files hold one [`Report`] object. CSV runs
//! written to a file also get a `<stem>.constants.json` sidecar with the
//! reference constants.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiments::{ConstantEstimate, DtSupCell, SweepRow, LOWER_BRACKET, TREND_FACTOR, UPPER_BRACKET};
use crate::sde::WeakErrorRow;

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Relative tolerance of the `ζ` limit and the bridge-maximum asymptotic.
pub const ASYMPTOTIC_TOLERANCE: f64 = 0.15;

/// Reference constants shared by the checks and by downstream plotting.
pub fn reference_constants() -> BTreeMap<String, f64> {
    [
        ("upper_bracket", UPPER_BRACKET),
        ("lower_bracket", LOWER_BRACKET),
        ("trend_factor", TREND_FACTOR),
        ("sqrt2", std::f64::consts::SQRT_2),
        ("inv_sqrt2", std::f64::consts::FRAC_1_SQRT_2),
        ("cx_upper_low", 1.4),
        ("cx_upper_high", 14.0),
        ("cx_lower_low", 0.2),
        ("cx_lower_high", 0.8),
        ("eta_bar_low", 1.2),
        ("eta_bar_high", 3.2),
        ("asymptotic_tolerance", ASYMPTOTIC_TOLERANCE),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Resolved parameters of a run. Only the fields a subcommand uses are set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kappas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ns: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub substeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub drift: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input: Option<String>,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunParams {
    /// Command line that reproduces the run (without `--threads`, `--out`
    /// and `--format`, which do not change the numbers).
    pub fn command_line(&self, experiment: &str) -> String {
        let mut s = format!("fclt {experiment} --seed {}", self.seed);
        let mut push = |flag: &str, v: Option<String>| {
            if let Some(v) = v {
                s.push_str(&format!(" --{flag} {v}"));
            }
        };
        push("reps", self.reps.map(|v| v.to_string()));
        push("kappas", self.kappas.as_deref().map(join));
        push("ns", self.ns.as_deref().map(join));
        push("dt", self.dt.map(|v| v.to_string()));
        push("horizon", self.horizon.map(|v| v.to_string()));
        push("substeps", self.substeps.map(|v| v.to_string()));
        push("T", self.t.map(|v| v.to_string()));
        push("a", self.a.map(|v| v.to_string()));
        push("alpha", self.alpha.map(|v| v.to_string()));
        push("K", self.k.map(|v| v.to_string()));
        push("drift", self.drift.clone());
        push("input", self.input.clone());
        s
    }
}

/// One run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<R> {
    pub experiment: String,
    pub command: String,
    pub params: RunParams,
    pub rows: Vec<R>,
    /// Headline estimates for constant-type runs.
    #[serde(default)]
    pub summary: Vec<ConstantEstimate>,
    pub constants: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

impl<R> Report<R> {
    pub fn new(experiment: &str, params: RunParams, rows: Vec<R>) -> Self {
        Self {
            command: params.command_line(experiment),
            experiment: experiment.to_string(),
            params,
            rows,
            summary: Vec::new(),
            constants: reference_constants(),
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A row type with a fixed CSV layout.
pub trait Tabular {
    fn header() -> &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl Tabular for SweepRow {
    fn header() -> &'static [&'static str] {
        &["kappa", "upper_mean", "upper_stderr", "lower_mean", "lower_stderr", "envelope", "ratio_upper", "ratio_lower"]
    }
    fn record(&self) -> Vec<String> {
        [
            self.kappa,
            self.upper.mean,
            self.upper.stderr,
            self.lower.mean,
            self.lower.stderr,
            self.envelope,
            self.ratio_upper,
            self.ratio_lower,
        ]
        .map(num)
        .to_vec()
    }
}

impl Tabular for WeakErrorRow {
    fn header() -> &'static [&'static str] {
        &["kappa", "error_mean", "error_stderr", "envelope", "ratio"]
    }
    fn record(&self) -> Vec<String> {
        [self.kappa, self.error.mean, self.error.stderr, self.envelope, self.ratio]
            .map(num)
            .to_vec()
    }
}

impl Tabular for DtSupCell {
    fn header() -> &'static [&'static str] {
        &["n", "signed_mean", "signed_stderr", "abs_mean", "abs_stderr", "tail_oracle", "gumbel_oracle", "sqrt2"]
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            num(self.signed.mean),
            num(self.signed.stderr),
            num(self.absolute.mean),
            num(self.absolute.stderr),
            num(self.tail_oracle),
            num(self.gumbel_oracle),
            num(std::f64::consts::SQRT_2),
        ]
    }
}

/// One line of a constant estimate: the headline value, a per-parameter
/// cell, or a named side result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub quantity: String,
    pub param: Option<f64>,
    pub mean: f64,
    pub stderr: Option<f64>,
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub target: Option<f64>,
}

impl ConstantRow {
    /// Flatten an estimate: headline first, then cells, then extras.
    pub fn from_estimate(e: &ConstantEstimate) -> Vec<Self> {
        let mut out = vec![Self {
            quantity: e.name.clone(),
            param: None,
            mean: e.value.mean,
            stderr: Some(e.value.stderr),
            low: e.bracket.map(|b| b.0),
            high: e.bracket.map(|b| b.1),
            target: e.target,
        }];
        for c in &e.cells {
            out.push(Self {
                quantity: format!("{}_cell", e.name),
                param: Some(c.param),
                mean: c.estimate.mean,
                stderr: Some(c.estimate.stderr),
                low: None,
                high: None,
                target: None,
            });
        }
        for (name, v) in &e.extras {
            out.push(Self {
                quantity: name.clone(),
                param: None,
                mean: *v,
                stderr: None,
                low: None,
                high: None,
                target: None,
            });
        }
        out
    }
}

impl Tabular for ConstantRow {
    fn header() -> &'static [&'static str] {
        &["quantity", "param", "mean", "stderr", "low", "high", "target"]
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.quantity.clone(),
            opt(self.param),
            num(self.mean),
            opt(self.stderr),
            opt(self.low),
            opt(self.high),
            opt(self.target),
        ]
    }
}

/// Reference value with an optional Monte Carlo check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub name: String,
    pub closed_form: f64,
    pub validity: String,
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub pass: Option<bool>,
}

impl Tabular for OracleRow {
    fn header() -> &'static [&'static str] {
        &["name", "closed_form", "validity", "mc_mean", "mc_stderr", "pass"]
    }
    fn record(&self) -> Vec<String> {
        vec![
            self.name.clone(),
            num(self.closed_form),
            self.validity.clone(),
            opt(self.mc_mean),
            opt(self.mc_stderr),
            self.pass.map(|p| p.to_string()).unwrap_or_default(),
        ]
    }
}

/// One grid point of a sampled path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub t: f64,
    pub value: f64,
}

impl Tabular for PathPoint {
    fn header() -> &'static [&'static str] {
        &["t", "value"]
    }
    fn record(&self) -> Vec<String> {
        vec![num(self.t), num(self.value)]
    }
}

/// One grid point of a coupled pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPoint {
    pub t: f64,
    pub w: f64,
    pub w_kappa: f64,
    pub residual: f64,
}

impl Tabular for PairPoint {
    fn header() -> &'static [&'static str] {
        &["t", "w", "w_kappa", "residual"]
    }
    fn record(&self) -> Vec<String> {
        [self.t, self.w, self.w_kappa, self.residual].map(num).to_vec()
    }
}

/// CSV text of a report: metadata line, header, rows.
pub fn to_csv<R: Tabular>(report: &Report<R>) -> Result<String> {
    let mut buf = format!("# {}\n", report.command).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(R::header())?;
        for r in &report.rows {
            w.write_record(r.record())?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

pub fn to_json<R: Serialize>(report: &Report<R>) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

/// Path of the constants sidecar next to `out`.
pub fn sidecar_path(out: &FsPath) -> PathBuf {
    out.with_extension("constants.json")
}

/// Write the report in `format` to `out`, or to `stdout` when no path is
/// given.
pub fn emit<R: Tabular + Serialize>(report: &Report<R>, format: Format, out: Option<&FsPath>, stdout: &mut dyn Write) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv(report)?,
        Format::Json => to_json(report)?,
    };
    match out {
        Some(p) => {
            fs::write(p, text)?;
            if format == Format::Csv {
                fs::write(sidecar_path(p), serde_json::to_string_pretty(&report.constants)? + "\n")?;
            }
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}
