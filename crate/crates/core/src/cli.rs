//! The `fclt` command line.
//!
//! Exit codes: 0 when every hard check passes, 1 when one fails, 2 on a
//! configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::couplings::{build_ar1_pair, build_ct_pair, build_dt0_pair, CoupledPair, CouplingKind, Kappa};
use crate::error::{config, Result};
use crate::experiments::{
    default_kappas, default_max_kappas, dt_sup_asymptotic, estimate_cx_lower_and_zeta, estimate_cx_upper,
    eta_bar_stats, maxima_report, sweep_rate, ConstantEstimate, MaxMode, ETA_TAIL_LEVELS,
};
use crate::grid::{Path, TimeGrid};
use crate::metrics::{l1_diff, mc_mean, BracketConfig, MCEstimate};
use crate::oracles::{closed_moment, l1_rate, oracle_table, var_wkappa_ct, ClosedMoment};
use crate::paths::{ou_via_time_change, sample_ar1, sample_bm, sample_bridge, sample_ou_stationary, Ar1Params};
use crate::report::{
    emit, ConstantRow, Format, OracleRow, PairPoint, PathPoint, Report, RunParams, Tabular, ASYMPTOTIC_TOLERANCE,
};
use crate::rng::RngStreamSpec;
use crate::sde::{weak_error_sweep, DriftKind, DriftSpec, Drift};

/// Stream index of each experiment family under the master seed.
pub mod streams {
    pub const SAMPLE: u64 = 0;
    pub const SWEEP: u64 = 1;
    pub const CX_UPPER: u64 = 2;
    pub const OU_MAX_PROFILE: u64 = 3;
    pub const ETA_BAR: u64 = 4;
    pub const DT_SUP: u64 = 5;
    pub const SDE: u64 = 6;
    pub const ORACLES: u64 = 7;
}

#[derive(Parser, Debug)]
#[command(name = "fclt", version, about = "Couplings, rate brackets and constants for the Gaussian functional CLT")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Monte Carlo replicates.
    #[arg(long, global = true)]
    pub reps: Option<u64>,
    /// Comma-separated κ values.
    #[arg(long, global = true)]
    pub kappas: Option<String>,
    /// Comma-separated sample sizes N (asymptotic dt-sup).
    #[arg(long, global = true)]
    pub ns: Option<String>,
    /// Time step (the OU step on the dilated interval for ct).
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Window of the weighted norm, or path length.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    /// Fine points per cell for dt0 and ar1.
    #[arg(long, global = true)]
    pub substeps: Option<usize>,
    /// Bounded interval [0, T].
    #[arg(long = "T", global = true)]
    pub t: Option<f64>,
    /// AR(1) coefficient.
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// Mean-reversion rate α of the linear and combined maps.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Lipschitz constant of the drift.
    #[arg(long = "K", global = true)]
    pub k: Option<f64>,
    /// Drift: tanh, sin or linear.
    #[arg(long, global = true)]
    pub drift: Option<String>,
    /// Driving coupling for sde: ct, dt0 or ar1.
    #[arg(long, global = true)]
    pub input: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Dump one sample path.
    Sample {
        #[arg(value_enum)]
        process: SampleKind,
    },
    /// Closed-form reference values with Monte Carlo checks.
    VerifyOracles,
    /// Upper and lower rate brackets across κ.
    Sweep {
        #[arg(value_enum)]
        mode: SweepMode,
    },
    /// Constant estimates.
    Constants {
        #[arg(value_enum)]
        which: ConstantKind,
    },
    /// Extreme-value asymptotics.
    Asymptotic {
        #[arg(value_enum)]
        which: AsymptoticKind,
    },
    /// Weak-approximation sweeps for examples 1, 2 and 3.
    Sde {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        example: u8,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Bm,
    Bridge,
    Ou,
    OuTimeChange,
    Ar1,
    Ct,
    Dt0,
    Ar1Pair,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Ct,
    Dt0,
    Ar1,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantKind {
    /// Lower constant c_X.
    #[value(name = "cx")]
    LowerCx,
    /// Upper constant C_X.
    #[value(name = "CX")]
    UpperCx,
    Zeta,
    Eta,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticKind {
    DtSup,
}

fn parse_list<T: std::str::FromStr>(flag: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .or_else(|_| config(format!("--{flag}: cannot parse {v:?}")))
        })
        .collect()
}

fn check_reps(reps: u64) -> Result<u64> {
    if reps < 2 {
        return config(format!("--reps must be at least 2, got {reps}"));
    }
    Ok(reps)
}

impl Opts {
    fn kappas_or(&self, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>> {
        let ks = match &self.kappas {
            Some(s) => parse_list("kappas", s)?,
            None => default(),
        };
        for &k in &ks {
            Kappa::new(k)?;
        }
        Ok(ks)
    }

    fn reps_or(&self, default: u64) -> Result<u64> {
        check_reps(self.reps.unwrap_or(default))
    }

    fn bracket_config(&self) -> BracketConfig {
        BracketConfig {
            horizon: self.horizon.unwrap_or(4.0),
            ct_step: self.dt.unwrap_or(0.1),
            substeps: self.substeps.unwrap_or(8),
            bounded: self.t,
        }
    }
}

fn coupling(name: &str, a: f64) -> Result<CouplingKind> {
    match name {
        "ct" => Ok(CouplingKind::Ct),
        "dt0" => Ok(CouplingKind::Dt0),
        "ar1" => {
            Ar1Params::new(a)?;
            Ok(CouplingKind::Ar1 { a })
        }
        other => config(format!("unknown input {other:?} (expected ct, dt0 or ar1)")),
    }
}

/// Output of one subcommand, ready to write.
struct Outcome {
    text_summary: Vec<String>,
    failures: Vec<String>,
}

fn finish<R: Tabular + Serialize>(
    mut report: Report<R>,
    failures: Vec<String>,
    text_summary: Vec<String>,
    opts: &Opts,
    stdout: &mut dyn Write,
) -> Result<Outcome> {
    report.failures = failures.clone();
    emit(&report, opts.format, opts.out.as_deref(), stdout)?;
    Ok(Outcome { text_summary, failures })
}

fn describe(e: &ConstantEstimate) -> String {
    let mut s = format!("{} = {:.5} ± {:.5} (n = {})", e.name, e.value.mean, e.value.stderr, e.value.n);
    if let Some((lo, hi)) = e.bracket {
        s.push_str(&format!(", bracket ({lo}, {hi})"));
    }
    if let Some(t) = e.target {
        s.push_str(&format!(", reference {t:.5}"));
    }
    s
}

fn constant_report(
    experiment: &str,
    params: RunParams,
    est: ConstantEstimate,
    failures: Vec<String>,
    mut summary: Vec<String>,
    opts: &Opts,
    stdout: &mut dyn Write,
) -> Result<Outcome> {
    summary.insert(0, describe(&est));
    let mut report = Report::new(experiment, params, ConstantRow::from_estimate(&est));
    report.summary = vec![est];
    finish(report, failures, summary, opts, stdout)
}

fn bracket_failure(e: &ConstantEstimate) -> Vec<String> {
    match e.in_bracket() {
        Some(false) => {
            let (lo, hi) = e.bracket.unwrap();
            vec![format!("{} = {:.5} ± {:.5} outside ({lo}, {hi})", e.name, e.value.mean, e.value.stderr)]
        }
        _ => Vec::new(),
    }
}

fn run_sample(kind: SampleKind, opts: &Opts, stdout: &mut dyn Write) -> Result<Outcome> {
    let stream = RngStreamSpec::new(opts.seed, streams::SAMPLE);
    let a = opts.a.unwrap_or(0.5);
    let mut params = RunParams { seed: opts.seed, ..Default::default() };
    let path_points = |p: &Path| -> Vec<PathPoint> {
        p.grid().times().zip(p.values()).map(|(t, &value)| PathPoint { t, value }).collect()
    };
    let pair_points = |p: &CoupledPair| -> Vec<PairPoint> {
        p.grid()
            .times()
            .enumerate()
            .map(|(k, t)| PairPoint { t, w: p.w().at(k), w_kappa: p.w_kappa().at(k), residual: p.residual().at(k) })
            .collect()
    };
    let name = format!("sample {}", kind.to_possible_value().unwrap().get_name());
    match kind {
        SampleKind::Ar1 => {
            let n = opts.horizon.unwrap_or(100.0);
            if !(n >= 1.0 && n.fract() == 0.0) {
                return config(format!("--horizon is the number of AR(1) terms, got {n}"));
            }
            params.horizon = Some(n);
            params.a = Some(a);
            let xs = sample_ar1(n as usize, Ar1Params::new(a)?, stream)?;
            let rows = xs.iter().enumerate().map(|(k, &value)| PathPoint { t: k as f64, value }).collect();
            finish(Report::new(&name, params, rows), vec![], vec![format!("{n} terms")], opts, stdout)
        }
        SampleKind::Bm | SampleKind::Bridge | SampleKind::Ou | SampleKind::OuTimeChange => {
            let horizon = opts.horizon.unwrap_or(1.0);
            let dt = opts.dt.unwrap_or(0.01);
            params.horizon = Some(horizon);
            params.dt = Some(dt);
            let g = TimeGrid::new(horizon, dt)?;
            let p = match kind {
                SampleKind::Bm => sample_bm(&g, stream),
                SampleKind::Bridge => sample_bridge(&g, stream)?,
                SampleKind::Ou => sample_ou_stationary(&g, stream),
                _ => ou_via_time_change(&g, stream)?,
            };
            let summary = vec![format!("{} points", p.len())];
            finish(Report::new(&name, params, path_points(&p)), vec![], summary, opts, stdout)
        }
        SampleKind::Ct | SampleKind::Dt0 | SampleKind::Ar1Pair => {
            let horizon = opts.horizon.unwrap_or(1.0);
            let kappa = Kappa::new(opts.kappas_or(|| vec![4.0])?[0])?;
            params.horizon = Some(horizon);
            params.kappas = Some(vec![kappa.value()]);
            let pair = match kind {
                SampleKind::Ct => {
                    let dt = opts.dt.unwrap_or(0.1);
                    params.dt = Some(dt);
                    build_ct_pair(kappa, horizon, dt, stream)?
                }
                _ => {
                    let m = opts.substeps.unwrap_or(8);
                    params.substeps = Some(m);
                    if kind == SampleKind::Dt0 {
                        build_dt0_pair(kappa, horizon, m, stream)?
                    } else {
                        if !kappa.is_integer() {
                            return config(format!("ar1 needs integer kappa, got {}", kappa.value()));
                        }
                        params.a = Some(a);
                        build_ar1_pair(Ar1Params::new(a)?, kappa, horizon, m, stream)?
                    }
                }
            };
            let summary = vec![format!("{} points", pair.grid().len())];
            finish(Report::new(&name, params, pair_points(&pair)), vec![], summary, opts, stdout)
        }
    }
}

fn run_oracles(opts: &Opts, stdout: &mut dyn Write) -> Result<Outcome> {
    let reps = opts.reps_or(100_000)?;
    let dt = opts.dt.unwrap_or(0.01);
    let m = opts.substeps.unwrap_or(128);
    let params = RunParams { seed: opts.seed, reps: Some(reps), dt: Some(dt), substeps: Some(m), ..Default::default() };
    let base = RngStreamSpec::new(opts.seed, streams::ORACLES);

    let maxima = maxima_report(reps, dt, MaxMode::Continuous, &[0.5, 1.0], base.child(0))?;
    let one = Kappa::new(1.0)?;
    let var = mc_mean(reps, base.child(1), |s| {
        let p = build_ct_pair(one, 1.0, dt, s)?;
        Ok(p.w_kappa().value_at(1.0)?.powi(2))
    })?;
    let l1 = mc_mean(reps, base.child(2), |s| l1_diff(&build_dt0_pair(one, 1.0, m, s)?, 1.0))?;

    // (estimate, extra relative tolerance on top of 3σ)
    let mc = |name: &str| -> Option<(MCEstimate, f64)> {
        match name {
            "E_max_bridge" => Some((maxima.mean_max_bridge, 0.0)),
            "E_max_bm" => Some((maxima.mean_max_bm, 0.0)),
            "P_max_bridge_gt_0.5" => Some((maxima.bridge_tails[0].1, 0.0)),
            "P_max_bridge_gt_1" => Some((maxima.bridge_tails[1].1, 0.0)),
            "P_max_bm_gt_1" => Some((maxima.bm_tails[1].1, 0.0)),
            "var_wkappa_ct_t1_k1" => Some((var, 0.0)),
            // trapezoid rule on the fine grid
            "l1_rate_kappa_1" => Some((l1, 0.02)),
            _ => None,
        }
    };
    debug_assert_eq!(var_wkappa_ct(1.0, 1.0).ok(), oracle_table().iter().find(|o| o.name == "var_wkappa_ct_t1_k1").map(|o| o.value));
    debug_assert_eq!(l1_rate(1.0).ok(), oracle_table().iter().find(|o| o.name == "l1_rate_kappa_1").map(|o| o.value));

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for o in oracle_table() {
        let check = mc(&o.name);
        let pass = check.map(|(e, rel)| (e.mean - o.value).abs() <= 3.0 * e.stderr + rel * o.value.abs());
        if let Some((e, _)) = check {
            let verdict = if pass == Some(true) { "ok" } else { "FAIL" };
            summary.push(format!("{:<24} {:.6}  mc {:.6} ± {:.6}  {verdict}", o.name, o.value, e.mean, e.stderr));
            if pass == Some(false) {
                failures.push(format!("{}: mc {:.6} ± {:.6} vs {:.6}", o.name, e.mean, e.stderr, o.value));
            }
        } else {
            summary.push(format!("{:<24} {:.6}", o.name, o.value));
        }
        rows.push(OracleRow {
            name: o.name,
            closed_form: o.value,
            validity: o.validity,
            mc_mean: check.map(|c| c.0.mean),
            mc_stderr: check.map(|c| c.0.stderr),
            pass,
        });
    }
    finish(Report::new("verify-oracles", params, rows), failures, summary, opts, stdout)
}

fn run_sweep(mode: SweepMode, opts: &Opts, stdout: &mut dyn Write) -> Result<Outcome> {
    let a = opts.a.unwrap_or(0.5);
    let kind = match mode {
        SweepMode::Ct => CouplingKind::Ct,
        SweepMode::Dt0 => CouplingKind::Dt0,
        SweepMode::Ar1 => {
            Ar1Params::new(a)?;
            CouplingKind::Ar1 { a }
        }
    };
    let kappas = opts.kappas_or(|| default_kappas(kind))?;
    let reps = opts.reps_or(10_000)?;
    let cfg = opts.bracket_config();
    cfg.validate()?;
    let mut params = RunParams {
        seed: opts.seed,
        reps: Some(reps),
        kappas: Some(kappas.clone()),
        t: cfg.bounded,
        ..Default::default()
    };
    if cfg.bounded.is_none() {
        params.horizon = Some(cfg.horizon);
    }
    match kind {
        CouplingKind::Ct => params.dt = Some(cfg.ct_step),
        CouplingKind::Dt0 => params.substeps = Some(cfg.substeps),
        CouplingKind::Ar1 { a } => {
            params.substeps = Some(cfg.substeps);
            params.a = Some(a);
        }
    }
    let table = sweep_rate(kind, &kappas, reps, &cfg, RngStreamSpec::new(opts.seed, streams::SWEEP))?;
    let failures = table.failures();
    let mut summary: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("kappa {:>8}  ratio_upper {:.4}  ratio_lower {:.4}", r.kappa, r.ratio_upper, r.ratio_lower))
        .collect();
    if table.rows.len() > 1 {
        summary.push(format!("trend upper {:.3}, lower {:.3}", table.upper_trend(), table.lower_trend()));
    }
    let name = format!("sweep {}", mode.to_possible_value().unwrap().get_name());
    finish(Report::new(&name, params, table.rows), failures, summary, opts, stdout)
}

fn run_constants(which: ConstantKind, opts: &Opts, stdout: &mut dyn Write) -> Result<Outcome> {
    let seed = opts.seed;
    let name = format!("constants {}", which.to_possible_value().unwrap().get_name());
    match which {
        ConstantKind::UpperCx => {
            let reps = opts.reps_or(1000)?;
            let horizon = opts.horizon.unwrap_or(1000.0);
            let dt = opts.dt.unwrap_or(0.01);
            let params = RunParams { seed, reps: Some(reps), horizon: Some(horizon), dt: Some(dt), ..Default::default() };
            let e = estimate_cx_upper(reps, horizon, dt, RngStreamSpec::new(seed, streams::CX_UPPER))?;
            let failures = bracket_failure(&e);
            let summary = vec![format!(
                "doubled horizon {:.5} (relative change {:.4}), signed {:.5}",
                e.extra("doubled").unwrap(),
                e.extra("relative_change").unwrap(),
                e.extra("signed").unwrap()
            )];
            constant_report(&name, params, e, failures, summary, opts, stdout)
        }
        ConstantKind::LowerCx | ConstantKind::Zeta => {
            let reps = opts.reps_or(1000)?;
            let dt = opts.dt.unwrap_or(0.01);
            let kappas = opts.kappas_or(default_max_kappas)?;
            let params = RunParams { seed, reps: Some(reps), kappas: Some(kappas.clone()), dt: Some(dt), ..Default::default() };
            let (cx, zeta) =
                estimate_cx_lower_and_zeta(&kappas, reps, dt, RngStreamSpec::new(seed, streams::OU_MAX_PROFILE))?;
            if which == ConstantKind::LowerCx {
                let failures = bracket_failure(&cx);
                let mut summary = vec![format!("attained at kappa {}", cx.extra("argmin_kappa").unwrap())];
                if let Some(r) = cx.extra("sup_over_sqrt_2lnk_at_max_kappa") {
                    summary.push(format!("E max X / sqrt(2 ln kappa) at largest kappa: {r:.4}"));
                }
                constant_report(&name, params, cx, failures, summary, opts, stdout)
            } else {
                let rel = zeta.relative_error().unwrap();
                let failures = if rel > ASYMPTOTIC_TOLERANCE {
                    vec![format!("zeta = {:.5} is {:.1}% from {:.5}", zeta.value.mean, 100.0 * rel, zeta.target.unwrap())]
                } else {
                    Vec::new()
                };
                let summary = vec![format!("relative error {:.4} (tolerance {ASYMPTOTIC_TOLERANCE})", rel)];
                constant_report(&name, params, zeta, failures, summary, opts, stdout)
            }
        }
        ConstantKind::Eta => {
            let reps = opts.reps_or(1_000_000)?;
            let dt = opts.dt.unwrap_or(1e-4);
            let params = RunParams { seed, reps: Some(reps), dt: Some(dt), ..Default::default() };
            let e = eta_bar_stats(reps, dt, RngStreamSpec::new(seed, streams::ETA_BAR))?;
            let mut failures = bracket_failure(&e);
            let mut summary = Vec::new();
            let lo = 2.0 * closed_moment(ClosedMoment::EMaxBridge)?;
            let hi = 4.0 * closed_moment(ClosedMoment::EMaxBm)?;
            let s3 = 3.0 * e.value.stderr;
            if !(e.value.mean >= lo - s3 && e.value.mean <= hi + s3) {
                failures.push(format!("mean {:.5} outside the comparison interval [{lo:.5}, {hi:.5}]", e.value.mean));
            }
            summary.push(format!("comparison interval [{lo:.5}, {hi:.5}]"));
            for x in ETA_TAIL_LEVELS {
                let p = e.extra(&format!("tail_{x}")).unwrap();
                let se = e.extra(&format!("tail_{x}_stderr")).unwrap();
                let b = e.extra(&format!("bound_{x}")).unwrap();
                summary.push(format!("P(eta > {x}) = {p:.3e} ± {se:.1e}, bound {b:.4}"));
                if p > b + 3.0 * se {
                    failures.push(format!("P(eta > {x}) = {p:.3e} above bound {b:.4}"));
                }
            }
            constant_report(&name, params, e, failures, summary, opts, stdout)
        }
    }
}

/// Largest relative gap between the maxima of `|η_k|` and `η_k`.
pub const ABS_SIGNED_GAP: f64 = 0.05;

fn run_asymptotic(opts: &Opts, stdout: &mut dyn Write) -> Result<Outcome> {
    let reps = opts.reps_or(1000)?;
    let ns: Vec<u64> = match &opts.ns {
        Some(s) => parse_list("ns", s)?,
        None => vec![10, 100, 1_000, 10_000, 100_000],
    };
    let params = RunParams { seed: opts.seed, reps: Some(reps), ns: Some(ns.clone()), ..Default::default() };
    let (est, cells) = dt_sup_asymptotic(&ns, reps, RngStreamSpec::new(opts.seed, streams::DT_SUP))?;
    let rel = est.relative_error().unwrap();
    let mut failures = Vec::new();
    if rel > ASYMPTOTIC_TOLERANCE {
        failures.push(format!("measured {:.5} is {:.1}% from {:.5}", est.value.mean, 100.0 * rel, est.target.unwrap()));
    }
    let gap = est.extra("abs_vs_signed_relative").unwrap();
    if gap > ABS_SIGNED_GAP {
        failures.push(format!("max |eta| and max eta differ by {:.1}% at the largest N", 100.0 * gap));
    }
    let supported = if est.extra("supports_tail_oracle") == Some(1.0) { "1/sqrt(2)" } else { "sqrt(2)" };
    let summary = vec![
        describe(&est),
        format!(
            "distance to sqrt(2): {:.5}, to 1/sqrt(2): {:.5}; data supports {supported}",
            est.extra("distance_to_sqrt2").unwrap(),
            est.extra("distance_to_inv_sqrt2").unwrap()
        ),
        format!("Gumbel-corrected prediction at largest N: {:.5}", est.extra("gumbel_oracle").unwrap()),
        format!("max |eta| vs max eta: {:.2}% apart", 100.0 * gap),
    ];
    let mut report = Report::new("asymptotic dt-sup", params, cells);
    report.summary = vec![est];
    finish(report, failures, summary, opts, stdout)
}

fn run_sde(example: u8, opts: &Opts, stdout: &mut dyn Write) -> Result<Outcome> {
    let alpha = opts.alpha.unwrap_or(2.0);
    let k = opts.k.unwrap_or(1.0);
    let drift_kind: DriftKind = opts.drift.as_deref().unwrap_or("tanh").parse()?;
    let drift = Drift::new(drift_kind, k)?;
    let mut cfg = opts.bracket_config();
    let spec = match example {
        1 => DriftSpec::Linear { alpha },
        2 => {
            let t = cfg.bounded.take().unwrap_or(1.0);
            DriftSpec::Lipschitz { drift, t }
        }
        _ => DriftSpec::Combined { alpha, drift },
    };
    spec.validate()?;
    let a = opts.a.unwrap_or(0.5);
    let input_name = opts.input.as_deref().unwrap_or(if example == 2 { "dt0" } else { "ct" });
    let input = coupling(input_name, a)?;
    let kappas = opts.kappas_or(|| (2..=10).map(|e| 2f64.powi(e)).collect())?;
    let reps = opts.reps_or(1000)?;

    let mut params = RunParams {
        seed: opts.seed,
        reps: Some(reps),
        kappas: Some(kappas.clone()),
        input: Some(input_name.to_string()),
        ..Default::default()
    };
    match spec {
        DriftSpec::Linear { alpha } => params.alpha = Some(alpha),
        DriftSpec::Lipschitz { drift, t } => {
            params.t = Some(t);
            params.k = Some(drift.k);
            params.drift = Some(drift.kind.to_string());
        }
        DriftSpec::Combined { alpha, drift } => {
            params.alpha = Some(alpha);
            params.k = Some(drift.k);
            params.drift = Some(drift.kind.to_string());
        }
    }
    if example != 2 {
        match cfg.bounded {
            Some(t) => params.t = Some(t),
            None => params.horizon = Some(cfg.horizon),
        }
    }
    match input {
        CouplingKind::Ct => params.dt = Some(cfg.ct_step),
        CouplingKind::Dt0 => params.substeps = Some(cfg.substeps),
        CouplingKind::Ar1 { a } => {
            params.substeps = Some(cfg.substeps);
            params.a = Some(a);
        }
    }

    let table = weak_error_sweep(&spec, input, &kappas, reps, &cfg, RngStreamSpec::new(opts.seed, streams::SDE))?;
    let failures = table.failures();
    let mut summary = vec![format!("C_psi = {:.5}", spec.c_psi())];
    summary.extend(table.rows.iter().map(|r| {
        format!(
            "kappa {:>8}  error {:.5} ± {:.5}  ratio {:.4}  rate ratio {:.4}  pathwise violations {}",
            r.kappa, r.error.mean, r.error.stderr, r.ratio, r.rate_ratio, r.violations
        )
    }));
    let name = format!("sde {example}");
    finish(Report::new(&name, params, table.rows), failures, summary, opts, stdout)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<Outcome> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Sample { process } => run_sample(*process, opts, stdout),
        Command::VerifyOracles => run_oracles(opts, stdout),
        Command::Sweep { mode } => run_sweep(*mode, opts, stdout),
        Command::Constants { which } => run_constants(*which, opts, stdout),
        Command::Asymptotic { which: AsymptoticKind::DtSup } => run_asymptotic(opts, stdout),
        Command::Sde { example } => run_sde(*example, opts, stdout),
    }
}

/// Parse `args` (including the program name) and run. Data goes to
/// `--out` or `stdout`; the pass/fail summary goes to `stdout` when the data
/// is written to a file and to `stderr` otherwise. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 2 {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.opts.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker threads: {e}");
            return 2;
        }
    };
    let mut data = Vec::new();
    let outcome = pool.install(|| dispatch(&cli, &mut data));
    if let Err(e) = stdout.write_all(&data) {
        let _ = writeln!(stderr, "error: {e}");
        return 2;
    }
    let to_file = cli.opts.out.is_some();
    let log: &mut dyn Write = if to_file { stdout } else { stderr };
    match outcome {
        Ok(o) => {
            for line in &o.text_summary {
                let _ = writeln!(log, "{line}");
            }
            if o.failures.is_empty() {
                let _ = writeln!(log, "PASS");
                0
            } else {
                for f in &o.failures {
                    let _ = writeln!(log, "FAIL: {f}");
                }
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
