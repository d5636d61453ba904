//! Joint constructions of a Brownian motion `W` and the rescaled process
//! `W^κ` on one probability space.
//!
//! * `ct`: `W^κ(t) = κ^{-1/2} ∫_0^{κt} X(s) ds` for the stationary OU process
//!   `X`, written as `κ^{-1/2} W(κt) + (X(0) - X(κt)) / (2√κ)` where `W` is
//!   the Brownian motion driving `X`.
//! * `dt0`: the interpolated partial-sum process `S_κ` of iid standard
//!   normals, with `ξ_n = √κ (W(n/κ) - W((n-1)/κ))`.
//! * `ar1`: the interpolated partial sums of a stationary AR(1) sequence
//!   driven by the same `ξ_n`.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::grid::{Path, TimeGrid};
use crate::paths::{bm_into, Ar1Params};
use crate::rng::RngStreamSpec;

/// Largest number of fine steps a single coupled pair may use.
pub const MAX_STEPS: usize = 50_000_000;

/// Scaling parameter `κ ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Kappa(f64);

impl Kappa {
    pub fn new(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 1.0) {
            return config(format!("kappa must be a finite real number >= 1, got {value}"));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_integer(&self) -> bool {
        self.0.fract() == 0.0
    }
}

/// Which construction produced a [`CoupledPair`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CouplingKind {
    Ct,
    Dt0,
    Ar1 { a: f64 },
}

impl CouplingKind {
    pub fn name(&self) -> &'static str {
        match self {
            CouplingKind::Ct => "ct",
            CouplingKind::Dt0 => "dt0",
            CouplingKind::Ar1 { .. } => "ar1",
        }
    }
}

/// Jointly sampled `(W, W^κ)` on a common grid, plus the correction term.
///
/// The residual is `(X(0) - X(κ·)) / (2√κ)` for `ct`, `S_κ - W` for `dt0`
/// and `W^κ - S_κ` for `ar1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPair {
    w: Path,
    w_kappa: Path,
    residual: Path,
    kind: CouplingKind,
    kappa: Kappa,
    formula_discrepancy: Option<f64>,
}

impl CoupledPair {
    pub fn grid(&self) -> &TimeGrid {
        self.w.grid()
    }

    pub fn w(&self) -> &Path {
        &self.w
    }

    pub fn w_kappa(&self) -> &Path {
        &self.w_kappa
    }

    pub fn residual(&self) -> &Path {
        &self.residual
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    /// `w_kappa - w` on the shared grid.
    pub fn difference(&self) -> Path {
        let v = self
            .w_kappa
            .values()
            .iter()
            .zip(self.w.values())
            .map(|(a, b)| a - b)
            .collect();
        Path::from_parts(*self.grid(), v)
    }

    /// For `ar1` pairs: the largest absolute gap, over knots, between the
    /// identity-defined `X^κ` and the closed form
    /// `(a - a^m) G - Σ_{n=1}^m a^{m-n} ξ_n` with `m = κt`.
    pub fn formula_discrepancy(&self) -> Option<f64> {
        self.formula_discrepancy
    }
}

/// Joint law of `(ΔW, I)` over one step of size `Δ`, where
/// `I = ∫_t^{t+Δ} e^{-2(t+Δ-s)} dW(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointStepLaw {
    pub step: f64,
    pub var_dw: f64,
    pub var_i: f64,
    pub cov: f64,
}

impl JointStepLaw {
    pub fn new(step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return config(format!("step must be positive and finite, got {step}"));
        }
        Ok(Self {
            step,
            var_dw: step,
            var_i: -(-4.0 * step).exp_m1() / 4.0,
            cov: -(-2.0 * step).exp_m1() / 2.0,
        })
    }

    pub fn correlation(&self) -> f64 {
        self.cov / (self.var_dw * self.var_i).sqrt()
    }

    /// Lower Cholesky factor `(l11, l21, l22)`:
    /// `ΔW = l11 z1`, `I = l21 z1 + l22 z2`.
    pub fn cholesky(&self) -> (f64, f64, f64) {
        let l11 = self.var_dw.sqrt();
        let l21 = self.cov / l11;
        let l22 = (self.var_i - l21 * l21).max(0.0).sqrt();
        (l11, l21, l22)
    }
}

/// Number of fine steps needed to reach `horizon` in `cells_per_unit`
/// steps per unit of time, with the budget check.
fn steps_for(horizon: f64, steps_per_unit: f64) -> Result<usize> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return config(format!("horizon must be positive and finite, got {horizon}"));
    }
    let n = (horizon * steps_per_unit * (1.0 - 1e-12)).ceil().max(1.0);
    if n > MAX_STEPS as f64 {
        return config(format!(
            "coupling needs {n:.0} steps, above the budget of {MAX_STEPS}; use a larger step or smaller kappa/horizon"
        ));
    }
    Ok(n as usize)
}

/// `(X(0) - X) / (2√κ)`, the continuous-time residual.
pub(crate) fn ct_residual(x: &[f64], kappa: f64, out: &mut [f64]) {
    let c = 0.5 / kappa.sqrt();
    let x0 = x[0];
    for (o, &xv) in out.iter_mut().zip(x) {
        *o = c * (x0 - xv);
    }
}

/// Continuous-time coupling on `[0, horizon]`.
///
/// The OU process is stepped on the dilated interval `[0, κ·horizon]` with
/// step `step`, so the output grid has step `step / κ` (and may overshoot
/// `horizon` by less than one step).
pub fn build_ct_pair(
    kappa: Kappa,
    horizon: f64,
    step: f64,
    stream: RngStreamSpec,
) -> Result<CoupledPair> {
    build_ct_pair_with_source(kappa, horizon, step, stream).map(|(pair, _)| pair)
}

/// As [`build_ct_pair`], also returning the OU path on the dilated grid.
pub fn build_ct_pair_with_source(
    kappa: Kappa,
    horizon: f64,
    step: f64,
    stream: RngStreamSpec,
) -> Result<(CoupledPair, Path)> {
    let law = JointStepLaw::new(step)?;
    let k = kappa.value();
    let n = steps_for(k * horizon, 1.0 / step)?;
    let (l11, l21, l22) = law.cholesky();
    let rho = (-2.0 * step).exp();

    let mut noise = stream.child(0).rng();
    let x0 = stream.child(1).rng().standard_normal();

    let mut w_dil = vec![0.0; n + 1];
    let mut x = vec![0.0; n + 1];
    x[0] = x0;
    let mut z = [0.0; 2];
    for j in 1..=n {
        noise.fill_normal(&mut z);
        w_dil[j] = w_dil[j - 1] + l11 * z[0];
        x[j] = rho * x[j - 1] + 2.0 * (l21 * z[0] + l22 * z[1]);
    }

    let out_grid = TimeGrid::with_steps(step / k, n)?;
    let scale = 1.0 / k.sqrt();
    let w: Vec<f64> = w_dil.iter().map(|v| scale * v).collect();
    let mut residual = vec![0.0; n + 1];
    ct_residual(&x, k, &mut residual);
    let w_kappa = w.iter().zip(&residual).map(|(a, b)| a + b).collect();

    let pair = CoupledPair {
        w: Path::from_parts(out_grid, w),
        w_kappa: Path::from_parts(out_grid, w_kappa),
        residual: Path::from_parts(out_grid, residual),
        kind: CouplingKind::Ct,
        kappa,
        formula_discrepancy: None,
    };
    let source = Path::from_parts(TimeGrid::with_steps(step, n)?, x);
    Ok((pair, source))
}

/// `κ^{-1/2} ∫_0^{κt} X(s) ds` by the trapezoid rule, at every point of
/// `out_grid`. Each `κ t_k` must be a point of the grid of `x_path`.
pub fn wkappa_by_quadrature(x_path: &Path, kappa: Kappa, out_grid: &TimeGrid) -> Result<Path> {
    let k = kappa.value();
    let xg = x_path.grid();
    let h = xg.step();
    let x = x_path.values();

    let mut idx = Vec::with_capacity(out_grid.len());
    for t in out_grid.times() {
        match xg.index_of(k * t) {
            Some(i) => idx.push(i),
            None => {
                return config(format!(
                    "dilated time {} is not a point of the source grid (step {h}, end {})",
                    k * t,
                    xg.t_end()
                ))
            }
        }
    }
    let last = *idx.last().unwrap_or(&0);
    let mut cum = Vec::with_capacity(last + 1);
    let mut acc = 0.0;
    cum.push(0.0);
    for i in 1..=last {
        acc += 0.5 * h * (x[i - 1] + x[i]);
        cum.push(acc);
    }
    let scale = 1.0 / k.sqrt();
    Path::new(*out_grid, idx.iter().map(|&i| scale * cum[i]).collect())
}

/// Writes `κ^{-1/2} (Σ_{n ≤ ⌊κt⌋} x_n + (κt - ⌊κt⌋) x_{⌊κt⌋+1})` on the
/// fine grid `t_j = j / (κ m)`, where `terms[i]` holds `x_{i+1}`.
pub(crate) fn interpolated_partial_sums(terms: &[f64], kappa: f64, substeps: usize, out: &mut [f64]) {
    let scale = 1.0 / kappa.sqrt();
    let m = substeps as f64;
    let mut cum = 0.0;
    for (n, &x) in terms.iter().enumerate() {
        let base = n * substeps;
        for r in 0..substeps {
            out[base + r] = scale * (cum + (r as f64 / m) * x);
        }
        cum += x;
    }
    out[terms.len() * substeps] = scale * cum;
}

fn validate_substeps(substeps: usize) -> Result<()> {
    if substeps == 0 {
        return config("substeps per cell must be at least 1");
    }
    Ok(())
}

/// Brownian path on the fine grid and the derived innovations
/// `ξ_n = √κ (W(n/κ) - W((n-1)/κ))`.
fn dt_driver(
    kappa: f64,
    horizon: f64,
    substeps: usize,
    stream: RngStreamSpec,
) -> Result<(TimeGrid, Vec<f64>, Vec<f64>)> {
    validate_substeps(substeps)?;
    let cells = steps_for(kappa * horizon, 1.0)?;
    let n = cells
        .checked_mul(substeps)
        .filter(|&n| n <= MAX_STEPS)
        .map_or_else(
            || config(format!("{cells} cells x {substeps} substeps exceed the step budget")),
            Ok,
        )?;
    let grid = TimeGrid::with_steps(1.0 / (kappa * substeps as f64), n)?;
    let mut w = vec![0.0; n + 1];
    bm_into(grid.step(), &mut stream.child(0).rng(), &mut w);
    let root = kappa.sqrt();
    let xi = (1..=cells)
        .map(|c| root * (w[c * substeps] - w[(c - 1) * substeps]))
        .collect();
    Ok((grid, w, xi))
}

/// Discrete-time coupling with iid innovations on `[0, horizon]`.
///
/// `W` is sampled with `substeps` points per cell `[(n-1)/κ, n/κ]`; the
/// output grid covers `⌈κ·horizon⌉` whole cells.
pub fn build_dt0_pair(
    kappa: Kappa,
    horizon: f64,
    substeps: usize,
    stream: RngStreamSpec,
) -> Result<CoupledPair> {
    let k = kappa.value();
    let (grid, w, xi) = dt_driver(k, horizon, substeps, stream)?;
    let mut s = vec![0.0; grid.len()];
    interpolated_partial_sums(&xi, k, substeps, &mut s);
    let residual = s.iter().zip(&w).map(|(a, b)| a - b).collect();
    Ok(CoupledPair {
        w: Path::from_parts(grid, w),
        w_kappa: Path::from_parts(grid, s),
        residual: Path::from_parts(grid, residual),
        kind: CouplingKind::Dt0,
        kappa,
        formula_discrepancy: None,
    })
}

/// Discrete-time coupling with stationary AR(1) input, driven by the same
/// Brownian motion and innovations as [`build_dt0_pair`] under the same
/// stream.
///
/// The infinite past `G = Σ_{n ≤ 0} a^{-n} ξ_n` is drawn as one normal of
/// variance `1/(1-a²)`, so `X_0 = (1-a) G` and
/// `X_n = a X_{n-1} + (1-a) ξ_n`.
pub fn build_ar1_pair(
    params: Ar1Params,
    kappa: Kappa,
    horizon: f64,
    substeps: usize,
    stream: RngStreamSpec,
) -> Result<CoupledPair> {
    let k = kappa.value();
    let a = params.a();
    let (grid, w, xi) = dt_driver(k, horizon, substeps, stream)?;
    let g = params.past_sum_variance().sqrt() * stream.child(1).rng().standard_normal();

    let mut xs = Vec::with_capacity(xi.len());
    let mut x = (1.0 - a) * g;
    for &e in &xi {
        x = a * x + (1.0 - a) * e;
        xs.push(x);
    }

    let mut w_kappa = vec![0.0; grid.len()];
    interpolated_partial_sums(&xs, k, substeps, &mut w_kappa);
    let mut s = vec![0.0; grid.len()];
    interpolated_partial_sums(&xi, k, substeps, &mut s);
    let residual: Vec<f64> = w_kappa.iter().zip(&s).map(|(a, b)| a - b).collect();

    // Closed form at knot m, with s_m = Σ_{n=1}^m a^{m-n} ξ_n.
    let root = k.sqrt();
    let mut sm = 0.0;
    let mut am = 1.0;
    let mut worst: f64 = 0.0;
    for (i, &e) in xi.iter().enumerate() {
        sm = a * sm + e;
        am *= a;
        let formula = (a - am) * g - sm;
        let actual = root * residual[(i + 1) * substeps];
        worst = worst.max((formula - actual).abs());
    }

    Ok(CoupledPair {
        w: Path::from_parts(grid, w),
        w_kappa: Path::from_parts(grid, w_kappa),
        residual: Path::from_parts(grid, residual),
        kind: CouplingKind::Ar1 { a },
        kappa,
        formula_discrepancy: Some(worst),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::var_wkappa_ct;
    use crate::testutil::mean_se;

    fn stream(k: u64) -> RngStreamSpec {
        RngStreamSpec::new(42, 1).child(k)
    }

    #[test]
    fn kappa_validation() {
        assert!(Kappa::new(0.5).is_err());
        assert!(Kappa::new(f64::NAN).is_err());
        assert!(Kappa::new(1.0).is_ok());
        assert!(Kappa::new(3.0).unwrap().is_integer());
        assert!(!Kappa::new(2.5).unwrap().is_integer());
    }

    #[test]
    fn joint_law_is_psd_and_matches_small_step_limit() {
        for i in 1..=1000 {
            let d = i as f64 / 1000.0;
            let law = JointStepLaw::new(d).unwrap();
            let r = law.correlation();
            assert!(r > 0.0 && r <= 1.0, "Δ = {d}, ρ = {r}");
            let (l11, l21, l22) = law.cholesky();
            assert!((l11 * l11 - law.var_dw).abs() < 1e-15);
            assert!((l21 * l21 + l22 * l22 - law.var_i).abs() < 1e-15);
        }
        for d in [1e-8, 1e-6, 1e-4] {
            let law = JointStepLaw::new(d).unwrap();
            assert!((law.correlation() - 1.0).abs() < 10.0 * d, "Δ = {d}");
        }
        assert!(JointStepLaw::new(0.0).is_err());
    }

    #[test]
    fn ct_identity_holds_exactly() {
        let kappa = Kappa::new(7.5).unwrap();
        let (pair, x) = build_ct_pair_with_source(kappa, 2.0, 0.05, stream(0)).unwrap();
        assert_eq!(pair.w().at(0), 0.0);
        assert_eq!(pair.w_kappa().at(0), 0.0);
        assert_eq!(pair.w().grid(), pair.residual().grid());
        let scale = 0.5 / kappa.value().sqrt();
        for k in 0..pair.grid().len() {
            let d = pair.w_kappa().at(k) - pair.w().at(k) - pair.residual().at(k);
            assert!(d.abs() < 1e-14);
            let r = scale * (x.at(0) - x.at(k));
            assert!((pair.residual().at(k) - r).abs() < 1e-15);
        }
        assert!(pair.grid().t_end() >= 2.0 - 1e-12);
    }

    #[test]
    fn ct_variances_match_closed_forms() {
        let kappa = Kappa::new(1.0).unwrap();
        let mut wk1 = Vec::new();
        let mut w1 = Vec::new();
        for r in 0..100_000 {
            let pair = build_ct_pair(kappa, 1.0, 0.05, stream(r)).unwrap();
            wk1.push(pair.w_kappa().at(20).powi(2));
            w1.push(pair.w().at(20).powi(2));
        }
        let target = var_wkappa_ct(1.0, 1.0).unwrap();
        assert!((target - 0.5677).abs() < 1e-4);
        let (m, se) = mean_se(&wk1);
        assert!((m - target).abs() < 3.0 * se, "Var W^κ(1) = {m} ± {se}");
        let (m, se) = mean_se(&w1);
        assert!((m - 1.0).abs() < 3.0 * se, "Var W(1) = {m} ± {se}");
    }

    #[test]
    fn ct_budget_is_enforced() {
        let kappa = Kappa::new(1e6).unwrap();
        assert!(build_ct_pair(kappa, 1e3, 0.1, stream(0)).is_err());
    }

    #[test]
    fn quadrature_of_constants_and_zero() {
        let kappa = Kappa::new(4.0).unwrap();
        let xg = TimeGrid::new(8.0, 0.01).unwrap();
        let out = TimeGrid::new(2.0, 0.25).unwrap();
        let zero = wkappa_by_quadrature(&Path::zeros(xg), kappa, &out).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let c = 1.7;
        let cst = Path::from_fn(xg, |_| c).unwrap();
        let q = wkappa_by_quadrature(&cst, kappa, &out).unwrap();
        for (t, v) in out.times().zip(q.values()) {
            assert!((v - c * 2.0 * t).abs() < 1e-12, "t = {t}");
        }
        let bad = TimeGrid::with_steps(0.003, 100).unwrap();
        assert!(wkappa_by_quadrature(&cst, kappa, &bad).is_err());
        let long = TimeGrid::new(4.0, 0.25).unwrap();
        assert!(wkappa_by_quadrature(&cst, kappa, &long).is_err());
    }

    #[test]
    fn quadrature_agrees_with_identity_as_step_shrinks() {
        let kappa = Kappa::new(2.0).unwrap();
        let out = TimeGrid::new(1.0, 0.25).unwrap();
        let mut rms = Vec::new();
        for step in [0.05, 0.025, 0.0125] {
            let mut sq = 0.0;
            let mut count = 0.0;
            for r in 0..2000 {
                let (pair, x) = build_ct_pair_with_source(kappa, 1.0, step, stream(r)).unwrap();
                let q = wkappa_by_quadrature(&x, kappa, &out).unwrap();
                for (t, v) in out.times().zip(q.values()) {
                    let exact = pair.w_kappa().value_at(t).unwrap();
                    sq += (v - exact).powi(2);
                    count += 1.0;
                }
            }
            rms.push((sq / count).sqrt());
        }
        assert!(rms[0] / rms[1] >= 1.3 && rms[1] / rms[2] >= 1.3, "{rms:?}");
    }

    #[test]
    fn dt0_pins_residual_at_knots() {
        let kappa = Kappa::new(4.0).unwrap();
        let pair = build_dt0_pair(kappa, 3.0, 5, stream(2)).unwrap();
        assert_eq!(pair.grid().len(), 12 * 5 + 1);
        for n in 0..=12 {
            let r = pair.residual().value_at(n as f64 / 4.0).unwrap();
            assert!(r.abs() < 1e-14, "knot {n}: {r}");
        }
        let d = pair.difference();
        assert_eq!(d.values(), pair.residual().values());
    }

    #[test]
    fn dt0_cell_maximum_has_bridge_tail() {
        // √κ · max over the first cell is a bridge maximum; grid maxima at
        // 200 points per cell are low by about 0.5826/√200 ≈ 0.041.
        let kappa = Kappa::new(4.0).unwrap();
        let m = 200;
        let reps = 100_000;
        let mut hits = 0.0;
        for r in 0..reps {
            let pair = build_dt0_pair(kappa, 0.25, m, stream(r)).unwrap();
            let mx = pair.residual().max() * kappa.value().sqrt();
            hits += (mx > 0.75) as u32 as f64;
        }
        let p = hits / reps as f64;
        let target = (-2.0f64 * 0.75 * 0.75).exp();
        let se = (target * (1.0 - target) / reps as f64).sqrt();
        let bias = 0.5826 / (m as f64).sqrt() * 4.0 * 0.75 * target;
        assert!(p <= target + 3.0 * se && p >= target - bias - 3.0 * se, "{p} vs {target}");
    }

    #[test]
    fn ar1_at_zero_reduces_to_dt0() {
        let kappa = Kappa::new(8.0).unwrap();
        let params = Ar1Params::new(0.0).unwrap();
        let ar = build_ar1_pair(params, kappa, 2.0, 4, stream(5)).unwrap();
        let dt = build_dt0_pair(kappa, 2.0, 4, stream(5)).unwrap();
        assert_eq!(ar.w(), dt.w());
        assert_eq!(ar.w_kappa(), dt.w_kappa());
        assert!(ar.residual().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ar1_decomposition_and_formula_report() {
        let kappa = Kappa::new(16.0).unwrap();
        let params = Ar1Params::new(0.5).unwrap();
        let pair = build_ar1_pair(params, kappa, 1.0, 3, stream(9)).unwrap();
        let dt = build_dt0_pair(kappa, 1.0, 3, stream(9)).unwrap();
        for k in 0..pair.grid().len() {
            let s = dt.w_kappa().at(k);
            let d = pair.w_kappa().at(k) - s - pair.residual().at(k);
            assert!(d.abs() < 1e-14);
        }
        // The displayed coefficient formula is off by one power of a.
        assert!(pair.formula_discrepancy().unwrap() > 0.1);
        let zero = build_ar1_pair(Ar1Params::new(0.0).unwrap(), kappa, 1.0, 3, stream(9)).unwrap();
        assert!(zero.formula_discrepancy().unwrap() > 0.1);
    }

    #[test]
    fn ar1_residual_matches_shifted_formula() {
        // X^κ at knot m equals (a - a^{m+1}) G - Σ_{n=1}^m a^{m+1-n} ξ_n.
        // G is recovered from X_0 = (1 - a) G via the first cell:
        // W^κ(1/κ) √κ = X_1 = a X_0 + (1-a) ξ_1.
        let a = 0.6;
        let kappa = Kappa::new(10.0).unwrap();
        let pair = build_ar1_pair(Ar1Params::new(a).unwrap(), kappa, 1.0, 1, stream(3)).unwrap();
        let dt = build_dt0_pair(kappa, 1.0, 1, stream(3)).unwrap();
        let root = kappa.value().sqrt();
        let xi: Vec<f64> = (1..=10)
            .map(|n| root * (dt.w_kappa().at(n) - dt.w_kappa().at(n - 1)))
            .collect();
        let x1 = root * pair.w_kappa().at(1);
        let g = (x1 - (1.0 - a) * xi[0]) / (a * (1.0 - a));
        let mut sm = 0.0;
        for m in 1..=10 {
            sm = a * sm + xi[m - 1];
            let shifted = (a - a.powi(m as i32 + 1)) * g - a * sm;
            let actual = root * pair.residual().at(m);
            assert!((shifted - actual).abs() < 1e-9, "m = {m}: {shifted} vs {actual}");
        }
    }

    #[test]
    fn ar1_knot_variance_matches_covariance_sum() {
        let a = 0.5;
        let params = Ar1Params::new(a).unwrap();
        let kappa = Kappa::new(16.0).unwrap();
        let m = 16;
        let k = kappa.value();
        let mut target = m as f64 * params.covariance(0);
        for j in 1..m {
            target += 2.0 * (m - j) as f64 * params.covariance(j as u32);
        }
        target /= k;
        let vals: Vec<f64> = (0..100_000)
            .map(|r| {
                let p = build_ar1_pair(params, kappa, 1.0, 1, stream(r)).unwrap();
                p.w_kappa().at(m).powi(2)
            })
            .collect();
        let (v, se) = mean_se(&vals);
        assert!((v - target).abs() < 3.0 * se, "{v} ± {se} vs {target}");
    }

    #[test]
    fn dt_rejects_bad_inputs() {
        let kappa = Kappa::new(2.0).unwrap();
        assert!(build_dt0_pair(kappa, 1.0, 0, stream(0)).is_err());
        assert!(build_dt0_pair(kappa, -1.0, 4, stream(0)).is_err());
        assert!(build_dt0_pair(kappa, 1e9, 4, stream(0)).is_err());
    }
}
