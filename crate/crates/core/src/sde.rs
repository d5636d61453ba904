//! Solution maps driven by a path `f`, applied to both members of a coupled
//! pair.
//!
//! Three maps are provided:
//! * `Ψ_α(f)(t) = f(t) - α ∫_0^t e^{-α(t-s)} f(s) ds` (additive OU noise);
//! * `y = ∫ b(y) ds + f` for a Lipschitz drift `b`;
//! * `y = -α ∫ y ds + ∫ b(y) ds + f`, solved in its variation-of-parameters
//!   form `y = ∫ e^{-α(t-s)} b(y(s)) ds + Ψ_α(f)`.
//!
//! Inputs are treated as piecewise linear between grid points, and the
//! exponential kernel is integrated exactly on each cell.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::couplings::{build_ar1_pair, build_ct_pair, build_dt0_pair, CoupledPair, CouplingKind, Kappa};
use crate::error::{config, Error, Result};
use crate::grid::Path;
use crate::metrics::{column, mc_samples, sup_norm, weighted_norm, BracketConfig, MCEstimate, WeightedNormConfig};
use crate::oracles::rate_envelope;
use crate::paths::Ar1Params;
use crate::rng::RngStreamSpec;

/// Built-in drifts, all with `b(0) = 0` and Lipschitz constant `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftKind {
    /// `K tanh(x)`
    Tanh,
    /// `K sin(x)`
    Sin,
    /// `-K x`
    Linear,
}

impl FromStr for DriftKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Self::Tanh),
            "sin" => Ok(Self::Sin),
            "linear" => Ok(Self::Linear),
            other => config(format!("unknown drift name {other:?} (expected tanh, sin or linear)")),
        }
    }
}

impl fmt::Display for DriftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Tanh => "tanh",
            Self::Sin => "sin",
            Self::Linear => "linear",
        })
    }
}

/// A drift from the built-in menu together with its Lipschitz constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub kind: DriftKind,
    pub k: f64,
}

impl Drift {
    pub fn new(kind: DriftKind, k: f64) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) {
            return config(format!("Lipschitz constant K must be >= 0, got {k}"));
        }
        Ok(Self { kind, k })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            DriftKind::Tanh => self.k * x.tanh(),
            DriftKind::Sin => self.k * x.sin(),
            DriftKind::Linear => -self.k * x,
        }
    }
}

/// Which solution map to apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "lowercase")]
pub enum DriftSpec {
    /// `Ψ_α`.
    Linear { alpha: f64 },
    /// `y = ∫ b(y) ds + f`, compared in sup norm on `[0, t]`.
    Lipschitz { drift: Drift, t: f64 },
    /// `y = -α ∫ y ds + ∫ b(y) ds + f`; needs `α > K`.
    Combined { alpha: f64, drift: Drift },
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return config(format!("alpha must be > 0, got {alpha}"));
    }
    Ok(())
}

impl DriftSpec {
    /// The default instance of each numbered example: `α = 2`; `tanh` with
    /// `K = 1` and `T = 1`; `α = 2, K = 1, tanh`.
    pub fn example(n: u8) -> Result<Self> {
        let tanh = Drift::new(DriftKind::Tanh, 1.0)?;
        match n {
            1 => Ok(Self::Linear { alpha: 2.0 }),
            2 => Ok(Self::Lipschitz { drift: tanh, t: 1.0 }),
            3 => Ok(Self::Combined { alpha: 2.0, drift: tanh }),
            _ => config(format!("unknown example {n} (expected 1, 2 or 3)")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Linear { alpha } => check_alpha(alpha),
            Self::Lipschitz { drift, t } => {
                Drift::new(drift.kind, drift.k)?;
                if !(t > 0.0 && t.is_finite()) {
                    return config(format!("T must be > 0, got {t}"));
                }
                Ok(())
            }
            Self::Combined { alpha, drift } => {
                check_alpha(alpha)?;
                Drift::new(drift.kind, drift.k)?;
                if alpha <= drift.k {
                    return config(format!("combined drift needs alpha > K, got alpha = {alpha}, K = {}", drift.k));
                }
                Ok(())
            }
        }
    }

    /// Lipschitz constant of the map: `2`, `e^{KT}` or `2α / (α - K)`.
    pub fn c_psi(&self) -> f64 {
        match *self {
            Self::Linear { .. } => 2.0,
            Self::Lipschitz { drift, t } => (drift.k * t).exp(),
            Self::Combined { alpha, drift } => 2.0 * alpha / (alpha - drift.k),
        }
    }

    /// Number used on the command line (`sde 1|2|3`).
    pub fn number(&self) -> u8 {
        match self {
            Self::Linear { .. } => 1,
            Self::Lipschitz { .. } => 2,
            Self::Combined { .. } => 3,
        }
    }

    /// Apply the map to one driving path.
    pub fn apply(&self, f: &Path) -> Result<Path> {
        match *self {
            Self::Linear { alpha } => psi_alpha(f, alpha),
            Self::Lipschitz { drift, t } => solve_drift(f, drift, t),
            Self::Combined { alpha, drift } => solve_combined(f, alpha, drift),
        }
    }
}

/// Per-cell weights of `α ∫_cell e^{-α(t_{k+1}-s)} f̂(s) ds = p_0 f_k + q f_{k+1}`
/// for linear `f̂`, plus the decay `e^{-αΔ}`.
#[derive(Debug, Clone, Copy)]
struct KernelWeights {
    decay: f64,
    /// `1 - e^{-αΔ}`
    p: f64,
    /// weight of the right end point, `1 - p / (αΔ)`
    q: f64,
}

impl KernelWeights {
    fn new(alpha: f64, step: f64) -> Self {
        let x = alpha * step;
        let p = -(-x).exp_m1();
        let q = if x < 1e-3 {
            // x/2! - x²/3! + x³/4! - x⁴/5!
            x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)))
        } else {
            1.0 - p / x
        };
        Self { decay: 1.0 - p, p, q }
    }
}

/// `Ψ_α(f)(t) = f(t) - α ∫_0^t e^{-α(t-s)} f(s) ds` on the grid of `f`.
pub fn psi_alpha(f: &Path, alpha: f64) -> Result<Path> {
    check_alpha(alpha)?;
    let w = KernelWeights::new(alpha, f.grid().step());
    let v = f.values();
    let mut out = Vec::with_capacity(v.len());
    let mut conv = 0.0; // α times the convolution
    out.push(v[0]);
    for k in 1..v.len() {
        conv = w.decay * conv + (w.p - w.q) * v[k - 1] + w.q * v[k];
        out.push(v[k] - conv);
    }
    Ok(Path::from_parts(*f.grid(), out))
}

fn last_index(f: &Path, t_end: f64) -> Result<usize> {
    let g = f.grid();
    if !(t_end > 0.0) || t_end > g.t_end() * (1.0 + 1e-9) {
        return config(format!("T = {t_end} is outside the path horizon {}", g.t_end()));
    }
    Ok(g.floor_index(t_end))
}

/// `y(t) = ∫_0^t b(y) ds + f(t)` on `[0, t_end]` by explicit stepping
/// `y_{k+1} = y_k + b(y_k) Δ + f_{k+1} - f_k`, `y_0 = f_0`, for any drift
/// `b`. The output is truncated at the last grid point `≤ t_end`.
pub fn solve_drift_with(f: &Path, b: impl Fn(f64) -> f64, t_end: f64) -> Result<Path> {
    let last = last_index(f, t_end)?;
    let h = f.grid().step();
    let v = &f.values()[..=last];
    let mut out = Vec::with_capacity(v.len());
    let mut y = v[0];
    out.push(y);
    for k in 1..v.len() {
        y += b(y) * h + (v[k] - v[k - 1]);
        out.push(y);
    }
    Path::new(crate::grid::TimeGrid::with_steps(h, last)?, out)
}

/// [`solve_drift_with`] for a built-in drift.
pub fn solve_drift(f: &Path, drift: Drift, t_end: f64) -> Result<Path> {
    Drift::new(drift.kind, drift.k)?;
    solve_drift_with(f, |x| drift.eval(x), t_end)
}

/// `y = ∫_0^t e^{-α(t-s)} b(y(s)) ds + Ψ_α(f)(t)`, with `b(y)` frozen at the
/// left end of each cell and the kernel integrated exactly.
pub fn solve_combined(f: &Path, alpha: f64, drift: Drift) -> Result<Path> {
    DriftSpec::Combined { alpha, drift }.validate()?;
    let psi = psi_alpha(f, alpha)?;
    let w = KernelWeights::new(alpha, f.grid().step());
    let cell = w.p / alpha;
    let mut out = Vec::with_capacity(psi.len());
    let mut conv = 0.0;
    let mut y = psi.at(0);
    out.push(y);
    for &p in &psi.values()[1..] {
        conv = w.decay * conv + cell * drift.eval(y);
        y = conv + p;
        out.push(y);
    }
    Ok(Path::from_parts(*f.grid(), out))
}

/// Norm in which a map is compared: the weighted norm on `[0, horizon]`,
/// or the sup norm on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SdeNorm {
    Weighted { horizon: f64 },
    Sup { t: f64 },
}

impl SdeNorm {
    /// Sup norm on `[0, T]` for the drift map and for bounded configs,
    /// the weighted norm otherwise.
    pub fn for_spec(spec: &DriftSpec, cfg: &BracketConfig) -> Self {
        match (spec, cfg.bounded) {
            (DriftSpec::Lipschitz { t, .. }, _) => Self::Sup { t: *t },
            (_, Some(t)) => Self::Sup { t },
            (_, None) => Self::Weighted { horizon: cfg.horizon },
        }
    }

    pub fn window(&self) -> f64 {
        match *self {
            Self::Weighted { horizon } => horizon,
            Self::Sup { t } => t,
        }
    }

    pub fn eval(&self, path: &Path) -> Result<f64> {
        match *self {
            Self::Weighted { horizon } => {
                let cfg = WeightedNormConfig { horizon, ..Default::default() };
                weighted_norm(path, &cfg).map(|r| r.value)
            }
            Self::Sup { t } => sup_norm(path, t),
        }
    }
}

/// Coupled pair covering `[0, horizon]`.
fn pair_for(kind: CouplingKind, kappa: Kappa, horizon: f64, cfg: &BracketConfig, s: RngStreamSpec) -> Result<CoupledPair> {
    match kind {
        CouplingKind::Ct => build_ct_pair(kappa, horizon, cfg.ct_step, s),
        CouplingKind::Dt0 => build_dt0_pair(kappa, horizon, cfg.substeps, s),
        CouplingKind::Ar1 { a } => build_ar1_pair(Ar1Params::new(a)?, kappa, horizon, cfg.substeps, s),
    }
}

/// Slack of the pathwise check `‖Ψ(w_kappa) - Ψ(w)‖ ≤ C_ψ (1 + Δ/2) ‖w_kappa - w‖`.
///
/// On a grid with step `Δ` the linear interpolant of `h` can exceed the
/// grid weighted norm by the factor `1 + Δ`, which enters through the
/// kernel term only. The drift map needs no slack.
pub fn transfer_slack(step: f64) -> f64 {
    0.5 * step
}

/// Per-replicate `[‖Ψ(w_kappa) - Ψ(w)‖, ‖w_kappa - w‖, grid step]`.
fn transfer_sample(
    spec: &DriftSpec,
    kind: CouplingKind,
    kappa: Kappa,
    norm: SdeNorm,
    cfg: &BracketConfig,
    s: RngStreamSpec,
) -> Result<[f64; 3]> {
    let pair = pair_for(kind, kappa, norm.window(), cfg, s)?;
    let y_k = spec.apply(pair.w_kappa())?;
    let y = spec.apply(pair.w())?;
    let out = norm.eval(&y_k.sub(&y)?)?;
    let inp = norm.eval(&pair.difference())?;
    Ok([out, inp, pair.grid().step()])
}

/// Outcome of the pathwise Lipschitz check over a batch of coupled pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub c_psi: f64,
    pub step: f64,
    /// Relative slack `Δ/2` allowed on top of `C_ψ`.
    pub slack: f64,
    pub pairs: u64,
    /// Largest `‖Ψ(w_kappa) - Ψ(w)‖ / ‖w_kappa - w‖` seen.
    pub max_ratio: f64,
    /// Pairs with `‖ΔΨ‖ > C_ψ (1 + slack) ‖Δw‖`.
    pub violations: u64,
}

impl TransferReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Check `‖Ψ(w_kappa) - Ψ(w)‖ ≤ C_ψ (1 + Δ/2) ‖w_kappa - w‖` on `pairs`
/// independent coupled pairs.
pub fn lipschitz_transfer(
    spec: &DriftSpec,
    kind: CouplingKind,
    kappa: Kappa,
    pairs: u64,
    cfg: &BracketConfig,
    stream: RngStreamSpec,
) -> Result<TransferReport> {
    spec.validate()?;
    cfg.validate()?;
    let norm = SdeNorm::for_spec(spec, cfg);
    let rows = mc_samples(pairs, stream, |s| transfer_sample(spec, kind, kappa, norm, cfg, s))?;
    let c_psi = spec.c_psi();
    let step = rows[0][2];
    let slack = transfer_slack(step);
    let mut max_ratio: f64 = 0.0;
    let mut violations = 0;
    for [out, inp, _] in &rows {
        if *inp > 0.0 {
            max_ratio = max_ratio.max(out / inp);
        }
        if *out > c_psi * (1.0 + slack) * inp * (1.0 + 1e-12) + 1e-300 {
            violations += 1;
        }
    }
    Ok(TransferReport {
        c_psi,
        step,
        slack,
        pairs,
        max_ratio,
        violations,
    })
}

/// One κ of a weak-error sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakErrorRow {
    pub kappa: f64,
    /// `E‖Ψ(w_kappa) - Ψ(w)‖`.
    pub error: MCEstimate,
    /// `E‖w_kappa - w‖` on the same pairs.
    pub driver: MCEstimate,
    /// `C_ψ · driver`.
    pub envelope: f64,
    /// `error / envelope`.
    pub ratio: f64,
    /// `error / √(ln(1 + κ) / κ)`.
    pub rate_ratio: f64,
    /// Pairs breaking the pathwise bound.
    pub violations: u64,
}

/// Weak-approximation errors across κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakErrorTable {
    pub spec: DriftSpec,
    pub input: CouplingKind,
    pub config: BracketConfig,
    pub norm: SdeNorm,
    pub reps: u64,
    pub rows: Vec<WeakErrorRow>,
}

impl WeakErrorTable {
    /// `max / min` of `rate_ratio` across rows.
    pub fn rate_trend(&self) -> f64 {
        let (lo, hi) = self.rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.rate_ratio), hi.max(r.rate_ratio))
        });
        hi / lo
    }

    /// Failed hard checks: mean error above `C_ψ (1 + Δ/2) E‖Δw‖ + 3σ`,
    /// pathwise violations, and a rate trend above 2.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let c = self.spec.c_psi();
        for r in &self.rows {
            let slack = transfer_slack(row_step(self.input, r.kappa, &self.config));
            let bound = c * (1.0 + slack) * r.driver.mean + 3.0 * r.error.stderr.hypot(c * r.driver.stderr);
            if r.error.mean > bound {
                out.push(format!("kappa {}: error {:.5} > bound {bound:.5}", r.kappa, r.error.mean));
            }
            if r.violations > 0 {
                out.push(format!("kappa {}: {} pairs break the pathwise bound", r.kappa, r.violations));
            }
        }
        if self.rows.len() > 1 && self.rate_trend() > crate::experiments::TREND_FACTOR {
            out.push(format!("rate ratio trend {:.3} > {}", self.rate_trend(), crate::experiments::TREND_FACTOR));
        }
        out
    }
}

fn row_step(kind: CouplingKind, kappa: f64, cfg: &BracketConfig) -> f64 {
    match kind {
        CouplingKind::Ct => cfg.ct_step / kappa,
        _ => 1.0 / (kappa * cfg.substeps as f64),
    }
}

/// `E‖Ψ(w_kappa) - Ψ(w)‖` against `C_ψ E‖w_kappa - w‖` and the rate
/// envelope, per κ. Streams follow [`crate::experiments::sweep_rate`].
pub fn weak_error_sweep(
    spec: &DriftSpec,
    input: CouplingKind,
    kappas: &[f64],
    reps: u64,
    cfg: &BracketConfig,
    stream: RngStreamSpec,
) -> Result<WeakErrorTable> {
    spec.validate()?;
    cfg.validate()?;
    if kappas.is_empty() {
        return config("sweep needs at least one kappa");
    }
    let ks = kappas.iter().map(|&k| Kappa::new(k)).collect::<Result<Vec<_>>>()?;
    if let CouplingKind::Ar1 { a } = input {
        Ar1Params::new(a)?;
        if let Some(k) = ks.iter().find(|k| !k.is_integer()) {
            return config(format!("ar1 input needs integer kappa, got {}", k.value()));
        }
    }
    let norm = SdeNorm::for_spec(spec, cfg);
    let c = spec.c_psi();
    let mut rows = Vec::with_capacity(ks.len());
    for k in ks {
        let samples = mc_samples(reps, stream.child(k.value().to_bits()), |s| {
            transfer_sample(spec, input, k, norm, cfg, s)
        })?;
        let slack = transfer_slack(samples[0][2]);
        let violations = samples
            .iter()
            .filter(|r| r[0] > c * (1.0 + slack) * r[1] * (1.0 + 1e-12) + 1e-300)
            .count() as u64;
        let error = MCEstimate::from_samples(&column(&samples, 0))?;
        let driver = MCEstimate::from_samples(&column(&samples, 1))?;
        let envelope = c * driver.mean;
        rows.push(WeakErrorRow {
            kappa: k.value(),
            error,
            driver,
            envelope,
            ratio: error.mean / envelope,
            rate_ratio: error.mean / rate_envelope(k.value())?,
            violations,
        });
    }
    Ok(WeakErrorTable {
        spec: *spec,
        input,
        config: *cfg,
        norm,
        reps,
        rows,
    })
}
