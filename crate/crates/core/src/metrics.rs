//! Path norms and Monte Carlo estimators of Wasserstein-1 brackets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::couplings::{build_ar1_pair, build_dt0_pair, CoupledPair, CouplingKind, Kappa, MAX_STEPS};
use crate::error::{config, Error, Result};
use crate::grid::Path;
use crate::paths::{stream_ou, Ar1Params};
use crate::rng::RngStreamSpec;

/// Mean, standard error and replicate count of a Monte Carlo functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl MCEstimate {
    /// Sample mean and `sd / √n`, accumulated in slice order.
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.len() < 2 {
            return config(format!("need at least 2 replicates, got {}", xs.len()));
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        Ok(Self {
            mean,
            stderr: (ss / (n - 1.0) / n).sqrt(),
            n: xs.len() as u64,
        })
    }

    /// Fraction of samples above `x`, with its binomial standard error.
    pub fn exceedance(xs: &[f64], x: f64) -> Result<Self> {
        let ind: Vec<f64> = xs.iter().map(|&v| (v > x) as u8 as f64).collect();
        Self::from_samples(&ind)
    }
}

/// Evaluates `f` on replicates `0..reps`, replicate `r` drawing from
/// `base.child(r)`. Replicates may run on any thread; results come back in
/// replicate order.
pub fn mc_samples<const N: usize, F>(reps: u64, base: RngStreamSpec, f: F) -> Result<Vec<[f64; N]>>
where
    F: Fn(RngStreamSpec) -> Result<[f64; N]> + Sync,
{
    if reps < 2 {
        return config(format!("need at least 2 replicates, got {reps}"));
    }
    let raw: Vec<Result<[f64; N]>> = (0..reps).into_par_iter().map(|r| f(base.child(r))).collect();
    let mut out = Vec::with_capacity(raw.len());
    for (r, item) in raw.into_iter().enumerate() {
        let v = item?;
        if let Some(&bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                replicate: r as u64,
                value: bad,
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// Column `j` of a replicate table.
pub fn column<const N: usize>(rows: &[[f64; N]], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

/// [`MCEstimate`] of several functionals computed from the same replicates.
pub fn mc_mean_n<const N: usize, F>(reps: u64, base: RngStreamSpec, f: F) -> Result<[MCEstimate; N]>
where
    F: Fn(RngStreamSpec) -> Result<[f64; N]> + Sync,
{
    let rows = mc_samples(reps, base, f)?;
    let mut out = [MCEstimate { mean: 0.0, stderr: 0.0, n: 0 }; N];
    for (j, o) in out.iter_mut().enumerate() {
        *o = MCEstimate::from_samples(&column(&rows, j))?;
    }
    Ok(out)
}

/// [`MCEstimate`] of one functional.
pub fn mc_mean<F>(reps: u64, base: RngStreamSpec, f: F) -> Result<MCEstimate>
where
    F: Fn(RngStreamSpec) -> Result<f64> + Sync,
{
    mc_mean_n(reps, base, |s| f(s).map(|v| [v])).map(|[e]| e)
}

/// Evaluation window for the weighted sup norm `sup_t |f(t)| / (1 + t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormConfig {
    /// Largest time considered.
    pub horizon: f64,
    /// Evaluate every `stride`-th grid point.
    pub stride: usize,
    /// Also report the supremum over the second half of the window.
    pub tail_report: bool,
}

impl Default for WeightedNormConfig {
    fn default() -> Self {
        Self {
            horizon: 1e3,
            stride: 1,
            tail_report: false,
        }
    }
}

/// Result of [`weighted_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    /// Time of the last grid point evaluated.
    pub horizon: f64,
    /// Whether the path reached the configured horizon.
    pub reached: bool,
    /// Supremum over `(horizon / 2, horizon]`, when requested.
    pub tail: Option<f64>,
}

#[inline]
fn weighted_sup(values: &[f64], step: f64, stride: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .step_by(stride)
        .map(|(k, v)| v.abs() / (1.0 + k as f64 * step))
        .fold(0.0, f64::max)
}

/// `max_k |f(t_k)| / (1 + t_k)` over grid points with `t_k ≤ horizon`.
/// A path shorter than the horizon is evaluated on its whole grid and the
/// report says so.
pub fn weighted_norm(path: &Path, cfg: &WeightedNormConfig) -> Result<NormReport> {
    if !(cfg.horizon >= 1.0) {
        return config(format!("weighted-norm horizon must be >= 1, got {}", cfg.horizon));
    }
    if cfg.stride == 0 {
        return config("weighted-norm stride must be at least 1");
    }
    if path.is_empty() {
        return config("weighted norm of an empty path");
    }
    let g = path.grid();
    let reached = g.t_end() >= cfg.horizon * (1.0 - 1e-9);
    let last = g.floor_index(cfg.horizon);
    let vals = &path.values()[..=last];
    let value = weighted_sup(vals, g.step(), cfg.stride);
    let tail = cfg.tail_report.then(|| {
        let start = g.floor_index(0.5 * g.time(last)) + 1;
        vals.iter()
            .enumerate()
            .skip(start)
            .step_by(cfg.stride)
            .map(|(k, v)| v.abs() / (1.0 + g.time(k)))
            .fold(0.0, f64::max)
    });
    Ok(NormReport {
        value,
        horizon: g.time(last),
        reached,
        tail,
    })
}

/// `max |f(t_k)|` over grid points in `[0, t_end]`.
pub fn sup_norm(path: &Path, t_end: f64) -> Result<f64> {
    let g = path.grid();
    if !(t_end >= 0.0) || t_end > g.t_end() * (1.0 + 1e-9) {
        return config(format!(
            "sup norm window [0, {t_end}] exceeds the path horizon {}",
            g.t_end()
        ));
    }
    let last = g.floor_index(t_end);
    Ok(path.values()[..=last].iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Trapezoid approximation of `∫_0^T |w_kappa - w| dt`; `T` must be a grid
/// point.
pub fn l1_diff(pair: &CoupledPair, t_end: f64) -> Result<f64> {
    if pair.w().grid() != pair.w_kappa().grid() {
        return config("coupled paths live on different grids");
    }
    let g = pair.grid();
    let Some(last) = g.index_of(t_end).filter(|&k| k > 0) else {
        return config(format!("T = {t_end} is not a positive grid point of the pair"));
    };
    let d: Vec<f64> = pair.w_kappa().values()[..=last]
        .iter()
        .zip(pair.w().values())
        .map(|(a, b)| (a - b).abs())
        .collect();
    Ok(g.step() * (d.iter().sum::<f64>() - 0.5 * (d[0] + d[last])))
}

/// One-dimensional Wasserstein-1 distance between two empirical laws of
/// equal size: the mean gap between order statistics.
pub fn marginal_w1(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return config("marginal W1 needs non-empty samples");
    }
    if p.len() != q.len() {
        return config(format!("sample sizes differ: {} vs {}", p.len(), q.len()));
    }
    let mut a = p.to_vec();
    let mut b = q.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// Discretisation and window of the bracket estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketConfig {
    /// Window `[0, horizon]` for the weighted norm (ignored when `bounded`).
    pub horizon: f64,
    /// Step on the dilated interval `[0, κ·horizon]` for `ct`.
    pub ct_step: f64,
    /// Fine points per cell `[(n-1)/κ, n/κ]` for `dt0` and `ar1`.
    pub substeps: usize,
    /// Sup norm on `[0, T]` instead of the weighted norm.
    pub bounded: Option<f64>,
}

impl Default for BracketConfig {
    fn default() -> Self {
        Self {
            horizon: 4.0,
            ct_step: 0.1,
            substeps: 8,
            bounded: None,
        }
    }
}

impl BracketConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.bounded {
            if !(t >= 1.0 && t.is_finite()) {
                return config(format!("bounded interval length must be >= 1, got {t}"));
            }
        } else if !(self.horizon >= 1.0 && self.horizon.is_finite()) {
            return config(format!("norm horizon must be >= 1, got {}", self.horizon));
        }
        if !(self.ct_step > 0.0 && self.ct_step.is_finite()) {
            return config(format!("ct step must be positive, got {}", self.ct_step));
        }
        if self.substeps == 0 {
            return config("substeps must be at least 1");
        }
        Ok(())
    }

    /// Length of the window the upper functional looks at.
    pub fn window(&self) -> f64 {
        self.bounded.unwrap_or(self.horizon)
    }

    /// End of the window for the lower functional: `[0, 1]`, or `[0, T]` in
    /// bounded mode.
    pub fn lower_window(&self) -> f64 {
        self.bounded.unwrap_or(1.0)
    }
}

/// Upper and lower bracket estimates for one κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub upper: MCEstimate,
    pub lower: MCEstimate,
}

/// Upper functional `‖w_kappa - w‖` and lower functional, both from one
/// streamed OU path on the dilated grid.
///
/// `w_kappa - w = (X(0) - X(κt)) / (2√κ)`; the lower functional is
/// `max_{t ≤ L} (X(κt) - X(0)) / (4√κ)`.
fn ct_functionals(kappa: f64, cfg: &BracketConfig, stream: RngStreamSpec) -> Result<[f64; 2]> {
    let step = cfg.ct_step;
    let window = cfg.window();
    let n_f = (kappa * window / step * (1.0 - 1e-12)).ceil();
    if n_f > MAX_STEPS as f64 {
        return config(format!("ct path needs {n_f:.0} steps, above the budget of {MAX_STEPS}"));
    }
    let n = n_f as usize;
    let lower_last = ((kappa * cfg.lower_window() / step) * (1.0 + 1e-12)).floor() as usize;
    let t_step = step / kappa;
    let c = 0.5 / kappa.sqrt();
    let mut x0 = 0.0;
    let mut upper: f64 = 0.0;
    let mut hi: f64 = 0.0;
    stream_ou(step, n, &mut stream.rng(), |k, x| {
        if k == 0 {
            x0 = x;
            return;
        }
        let d = x - x0;
        let u = match cfg.bounded {
            Some(_) => d.abs(),
            None => d.abs() / (1.0 + k as f64 * t_step),
        };
        upper = upper.max(u);
        if k <= lower_last {
            hi = hi.max(d);
        }
    });
    Ok([c * upper, 0.5 * c * hi])
}

/// Upper and lower functionals of a discrete-time pair: `‖w_kappa - w‖`
/// and `½ max_{t ≤ L} (w_kappa - w)(t)`.
fn dt_functionals(pair: &CoupledPair, cfg: &BracketConfig) -> Result<[f64; 2]> {
    let d = pair.difference();
    let upper = match cfg.bounded {
        Some(t) => sup_norm(&d, t)?,
        None => {
            let g = d.grid();
            let last = g.floor_index(cfg.horizon);
            weighted_sup(&d.values()[..=last], g.step(), 1)
        }
    };
    let last = d.grid().floor_index(cfg.lower_window());
    let hi = d.values()[..=last].iter().fold(0.0f64, |m, &v| m.max(v));
    Ok([upper, 0.5 * hi])
}

/// Upper and lower functionals for one replicate.
pub fn bracket_functionals(
    kind: CouplingKind,
    kappa: Kappa,
    cfg: &BracketConfig,
    stream: RngStreamSpec,
) -> Result<[f64; 2]> {
    let k = kappa.value();
    match kind {
        CouplingKind::Ct => ct_functionals(k, cfg, stream),
        CouplingKind::Dt0 => {
            let pair = build_dt0_pair(kappa, cfg.window(), cfg.substeps, stream)?;
            dt_functionals(&pair, cfg)
        }
        CouplingKind::Ar1 { a } => {
            let pair = build_ar1_pair(Ar1Params::new(a)?, kappa, cfg.window(), cfg.substeps, stream)?;
            dt_functionals(&pair, cfg)
        }
    }
}

/// Monte Carlo upper and lower bracket for `d_W(law W^κ, law W)`.
///
/// The upper estimate is `E‖w_kappa - w‖` under the coupling. The lower
/// estimate is `E max_{[0,1]} X^κ / (2√κ)` for `ct` and its analogue
/// `½ E max_{[0,1]} (w_kappa - w)` for the discrete constructions.
pub fn w1_bracket(
    kind: CouplingKind,
    kappa: Kappa,
    cfg: &BracketConfig,
    reps: u64,
    stream: RngStreamSpec,
) -> Result<Bracket> {
    cfg.validate()?;
    if let CouplingKind::Ar1 { a } = kind {
        Ar1Params::new(a)?;
    }
    let [upper, lower] = mc_mean_n(reps, stream, |s| bracket_functionals(kind, kappa, cfg, s))?;
    Ok(Bracket { upper, lower })
}

/// Coupling upper bound `E‖w_kappa - w‖` on the Wasserstein-1 distance.
pub fn w1_upper(
    kind: CouplingKind,
    kappa: Kappa,
    cfg: &BracketConfig,
    reps: u64,
    stream: RngStreamSpec,
) -> Result<MCEstimate> {
    w1_bracket(kind, kappa, cfg, reps, stream).map(|b| b.upper)
}

/// Lower bound `E max_{0≤t≤1} X^κ(t) / (2√κ)` with `X^κ(t) = (X(κt) - X(0)) / 2`.
pub fn w1_lower_ct(kappa: Kappa, cfg: &BracketConfig, reps: u64, stream: RngStreamSpec) -> Result<MCEstimate> {
    w1_bracket(CouplingKind::Ct, kappa, cfg, reps, stream).map(|b| b.lower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::build_ct_pair;
    use crate::grid::TimeGrid;
    use crate::oracles::l1_rate;
    use crate::paths::{sample_bm, sample_bridge};
    use proptest::prelude::*;

    fn base(k: u64) -> RngStreamSpec {
        RngStreamSpec::new(42, 2).child(k)
    }

    #[test]
    fn estimate_of_constant_and_centered() {
        let e = mc_mean(1000, base(0), |_| Ok(1.0)).unwrap();
        assert_eq!((e.mean, e.stderr, e.n), (1.0, 0.0, 1000));
        let g = TimeGrid::new(1.0, 0.5).unwrap();
        let e = mc_mean(100_000, base(1), |s| Ok(sample_bm(&g, s).at(2))).unwrap();
        assert!(e.mean.abs() < 3.0 * e.stderr);
        assert!(mc_mean(1, base(0), |_| Ok(1.0)).is_err());
    }

    #[test]
    fn non_finite_replicate_is_reported() {
        let err = mc_mean(10, base(0), |s| {
            Ok(if s == base(0).child(7) { f64::NAN } else { 0.0 })
        })
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { replicate: 7, .. }), "{err}");
    }

    #[test]
    fn mc_is_independent_of_thread_count() {
        let g = TimeGrid::new(1.0, 0.01).unwrap();
        let f = |s| Ok(sample_bm(&g, s).max());
        let a = mc_mean(2000, base(3), f).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| mc_mean(2000, base(3), f)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bridge_max_mean() {
        let g = TimeGrid::new(1.0, 1e-4).unwrap();
        let e = mc_mean(100_000, base(4), |s| Ok(sample_bridge(&g, s)?.max())).unwrap();
        let target = (2.0 * std::f64::consts::PI).sqrt() / 4.0;
        assert!((e.mean / target - 1.0).abs() < 0.02, "{e:?}");
    }

    #[test]
    fn weighted_norm_examples() {
        let g = TimeGrid::new(10.0, 0.01).unwrap();
        let cfg = WeightedNormConfig::default();
        let zero = weighted_norm(&Path::zeros(g), &cfg).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(!zero.reached);
        let lin = Path::from_fn(g, |t| t).unwrap();
        let r = weighted_norm(&lin, &cfg).unwrap();
        assert!((r.value - 10.0 / 11.0).abs() < 1e-12);
        assert!((r.horizon - 10.0).abs() < 1e-9);
        let short = WeightedNormConfig { horizon: 4.0, tail_report: true, ..cfg };
        let r = weighted_norm(&lin, &short).unwrap();
        assert!(r.reached);
        assert!((r.value - 0.8).abs() < 1e-12);
        assert!((r.tail.unwrap() - 0.8).abs() < 1e-12);
        assert!(weighted_norm(&lin, &WeightedNormConfig { horizon: 0.5, ..cfg }).is_err());
    }

    #[test]
    fn sup_norm_examples() {
        let g = TimeGrid::new(2.0, 0.001).unwrap();
        assert_eq!(sup_norm(&Path::zeros(g), 2.0).unwrap(), 0.0);
        let p = Path::from_fn(g, |t| 0.7 * (std::f64::consts::PI * t).sin()).unwrap();
        assert!((sup_norm(&p, 2.0).unwrap() - 0.7).abs() < 1e-12);
        assert!(sup_norm(&p, 3.0).is_err());
    }

    #[test]
    fn weighted_norm_of_bm_is_stable_under_doubling() {
        let g = TimeGrid::new(2000.0, 0.05).unwrap();
        let short = WeightedNormConfig { horizon: 1000.0, ..Default::default() };
        let long = WeightedNormConfig { horizon: 2000.0, ..Default::default() };
        let [a, b] = mc_mean_n(10_000, base(5), |s| {
            let p = sample_bm(&g, s);
            Ok([weighted_norm(&p, &short)?.value, weighted_norm(&p, &long)?.value])
        })
        .unwrap();
        assert!((b.mean / a.mean - 1.0).abs() < 0.01, "{a:?} {b:?}");
    }

    #[test]
    fn l1_of_dt0_matches_closed_form() {
        for (kappa, reps) in [(1.0, 100_000), (16.0, 100_000)] {
            let k = Kappa::new(kappa).unwrap();
            let e = mc_mean(reps, base(6), |s| {
                let pair = build_dt0_pair(k, 1.0, 128, s)?;
                l1_diff(&pair, 1.0)
            })
            .unwrap();
            let target = l1_rate(kappa).unwrap();
            assert!((e.mean / target - 1.0).abs() < 0.02, "κ = {kappa}: {e:?} vs {target}");
        }
    }

    #[test]
    fn l1_of_identical_paths_is_zero() {
        let k = Kappa::new(4.0).unwrap();
        let pair = build_ar1_pair(Ar1Params::new(0.0).unwrap(), k, 1.0, 4, base(0)).unwrap();
        assert_eq!(pair.residual().values().iter().map(|v| v.abs()).sum::<f64>(), 0.0);
        assert!(l1_diff(&pair, 0.3).is_err());
        assert!(l1_diff(&pair, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn marginal_w1_examples() {
        let p: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        assert_eq!(marginal_w1(&p, &p).unwrap(), 0.0);
        let q: Vec<f64> = p.iter().map(|v| v + 0.25).collect();
        assert!((marginal_w1(&p, &q).unwrap() - 0.25).abs() < 1e-12);
        assert!(marginal_w1(&[], &[]).is_err());
        assert!(marginal_w1(&p, &q[..50]).is_err());
    }

    #[test]
    fn marginal_w1_gaussian_scale() {
        let n = 100_000;
        let mut z = vec![0.0; n];
        base(7).rng().fill_normal(&mut z);
        let mut y = vec![0.0; n];
        base(8).rng().fill_normal(&mut y);
        for sigma in [0.5, 0.1] {
            let q: Vec<f64> = y.iter().map(|v| sigma * v).collect();
            let d = marginal_w1(&z, &q).unwrap();
            let target = (1.0 - sigma) * (2.0 / std::f64::consts::PI).sqrt();
            assert!((d - target).abs() < 0.01, "σ = {sigma}: {d} vs {target}");
        }
    }

    #[test]
    fn ct_streamed_functionals_match_pair() {
        // The streamed estimator sees the same law as the pair builder: compare
        // means at κ = 4.
        let k = Kappa::new(4.0).unwrap();
        let cfg = BracketConfig { horizon: 2.0, ct_step: 0.1, ..Default::default() };
        let b = w1_bracket(CouplingKind::Ct, k, &cfg, 20_000, base(9)).unwrap();
        let wcfg = WeightedNormConfig { horizon: 2.0, ..Default::default() };
        let [u, l] = mc_mean_n(20_000, base(10), |s| {
            let pair = build_ct_pair(k, 2.0, 0.1, s)?;
            let d = pair.difference();
            let last = pair.grid().floor_index(1.0);
            let hi = d.values()[..=last].iter().fold(0.0f64, |m, &v| m.max(-v));
            Ok([weighted_norm(&d, &wcfg)?.value, 0.5 * hi])
        })
        .unwrap();
        let z = |a: MCEstimate, b: MCEstimate| (a.mean - b.mean).abs() / a.stderr.hypot(b.stderr);
        assert!(z(b.upper, u) < 4.0, "{:?} vs {u:?}", b.upper);
        assert!(z(b.lower, l) < 4.0, "{:?} vs {l:?}", b.lower);
        assert!(b.lower.mean > 3.0 * b.lower.stderr);
    }

    #[test]
    fn ct_kappa_one_upper_is_positive_and_finite() {
        let k = Kappa::new(1.0).unwrap();
        let e = w1_upper(CouplingKind::Ct, k, &BracketConfig::default(), 2000, base(11)).unwrap();
        assert!(e.mean > 0.0 && e.mean.is_finite());
        let l = w1_lower_ct(k, &BracketConfig::default(), 2000, base(11)).unwrap();
        assert!(l.mean > 3.0 * l.stderr);
        assert!(l.mean <= e.mean + 3.0 * e.stderr.hypot(l.stderr));
    }

    #[test]
    fn marginal_lower_bounds_coupling_upper() {
        let k = Kappa::new(2.0).unwrap();
        let cfg = BracketConfig::default();
        let rows = mc_samples(20_000, base(12), |s| {
            let pair = build_ct_pair(k, cfg.horizon, cfg.ct_step, s)?;
            let i = pair.grid().index_of(1.0).expect("t = 1 on the grid");
            let d = pair.difference();
            let last = pair.grid().floor_index(cfg.horizon);
            Ok([
                pair.w_kappa().at(i) / 2.0,
                pair.w().at(i) / 2.0,
                weighted_sup(&d.values()[..=last], d.grid().step(), 1),
            ])
        })
        .unwrap();
        let m = marginal_w1(&column(&rows, 0), &column(&rows, 1)).unwrap();
        let up = MCEstimate::from_samples(&column(&rows, 2)).unwrap();
        assert!(m <= up.mean + 3.0 * up.stderr, "{m} vs {up:?}");
    }

    #[test]
    fn bounded_mode_uses_sup_norm() {
        let k = Kappa::new(4.0).unwrap();
        let weighted = BracketConfig { horizon: 1.0, ..Default::default() };
        let bounded = BracketConfig { bounded: Some(1.0), ..Default::default() };
        for kind in [CouplingKind::Ct, CouplingKind::Dt0] {
            let a = bracket_functionals(kind, k, &weighted, base(13)).unwrap();
            let b = bracket_functionals(kind, k, &bounded, base(13)).unwrap();
            assert!(b[0] >= a[0] && b[0] <= 2.0 * a[0] + 1e-15);
            assert_eq!(a[1], b[1]);
        }
    }

    #[test]
    fn bracket_config_validation() {
        let bad = [
            BracketConfig { horizon: 0.5, ..Default::default() },
            BracketConfig { ct_step: 0.0, ..Default::default() },
            BracketConfig { substeps: 0, ..Default::default() },
            BracketConfig { bounded: Some(0.2), ..Default::default() },
        ];
        for cfg in bad {
            let k = Kappa::new(2.0).unwrap();
            assert!(w1_bracket(CouplingKind::Dt0, k, &cfg, 10, base(0)).is_err());
        }
        let k = Kappa::new(2.0).unwrap();
        let cfg = BracketConfig::default();
        assert!(w1_bracket(CouplingKind::Ar1 { a: 1.0 }, k, &cfg, 10, base(0)).is_err());
    }

    proptest! {
        #[test]
        fn weighted_norm_is_a_norm(
            f in prop::collection::vec(-10.0f64..10.0, 21),
            g in prop::collection::vec(-10.0f64..10.0, 21),
            c in -5.0f64..5.0,
        ) {
            let grid = TimeGrid::new(2.0, 0.1).unwrap();
            let cfg = WeightedNormConfig { horizon: 2.0, ..Default::default() };
            let pf = Path::new(grid, f).unwrap();
            let pg = Path::new(grid, g).unwrap();
            let nf = weighted_norm(&pf, &cfg).unwrap().value;
            let ng = weighted_norm(&pg, &cfg).unwrap().value;
            let ns = weighted_norm(&pf.add(&pg).unwrap(), &cfg).unwrap().value;
            let nc = weighted_norm(&pf.scale(c), &cfg).unwrap().value;
            prop_assert!(ns <= nf + ng + 1e-12);
            prop_assert!((nc - c.abs() * nf).abs() <= 1e-12 * (1.0 + nf));
            // Sup norm on [0, T] is at most (1 + T) times the weighted norm.
            prop_assert!(sup_norm(&pf, 2.0).unwrap() <= 3.0 * nf + 1e-12);
        }
    }
}
