//! Exact samplers for Brownian motion, the Brownian bridge, the stationary
//! Ornstein–Uhlenbeck process with covariance `exp(-2|t-s|)`, and the
//! stationary Gaussian AR(1) sequence.
//!
//! All samplers are pure functions of `(grid, stream)`: the same inputs give
//! bit-identical output.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::grid::{Path, TimeGrid};
use crate::rng::{RngStreamSpec, StreamRng};

/// Fills `out` (length `n_steps + 1`) with a Brownian path on a grid of the
/// given step, consuming `n_steps` normals from `rng`.
pub(crate) fn bm_into(step: f64, rng: &mut StreamRng, out: &mut [f64]) {
    let sd = step.sqrt();
    out[0] = 0.0;
    rng.fill_normal(&mut out[1..]);
    let mut w = 0.0;
    for v in &mut out[1..] {
        w += sd * *v;
        *v = w;
    }
}

/// One-step coefficients of the OU recursion `X' = rho X + innov_sd Z`.
pub(crate) fn ou_step_coefficients(step: f64) -> (f64, f64) {
    ((-2.0 * step).exp(), (-(-4.0 * step).exp_m1()).sqrt())
}

/// Fills `out` with a stationary OU path (`X(0) ~ N(0, 1)`), consuming
/// `out.len()` normals from `rng`.
pub(crate) fn ou_into(step: f64, rng: &mut StreamRng, out: &mut [f64]) {
    let (rho, sd) = ou_step_coefficients(step);
    rng.fill_normal(out);
    for k in 1..out.len() {
        out[k] = rho * out[k - 1] + sd * out[k];
    }
}

/// Streams a stationary OU path with `n` steps through `f(k, x_k)`,
/// drawing the same normals as [`ou_into`] without storing the path.
pub(crate) fn stream_ou(step: f64, n: usize, rng: &mut StreamRng, mut f: impl FnMut(usize, f64)) {
    let (rho, sd) = ou_step_coefficients(step);
    let mut x = rng.standard_normal();
    f(0, x);
    let mut buf = [0.0; 1024];
    let mut k = 0;
    while k < n {
        let len = (n - k).min(buf.len());
        rng.fill_normal(&mut buf[..len]);
        for &z in &buf[..len] {
            k += 1;
            x = rho * x + sd * z;
            f(k, x);
        }
    }
}

/// Standard Brownian motion on `grid`.
pub fn sample_bm(grid: &TimeGrid, stream: RngStreamSpec) -> Path {
    let mut values = vec![0.0; grid.len()];
    bm_into(grid.step(), &mut stream.rng(), &mut values);
    Path::from_parts(*grid, values)
}

fn check_unit_interval(grid: &TimeGrid) -> Result<()> {
    if (grid.t_end() - 1.0).abs() > 1e-9 {
        return config(format!(
            "Brownian bridge grid must span [0, 1], got [0, {}]",
            grid.t_end()
        ));
    }
    Ok(())
}

/// Standard Brownian bridge on `[0, 1]`, built as `B(t) = W(t) - t W(1)` from
/// [`sample_bm`] with the same stream.
pub fn sample_bridge(grid: &TimeGrid, stream: RngStreamSpec) -> Result<Path> {
    check_unit_interval(grid)?;
    let mut values = sample_bm(grid, stream).into_values();
    bridge_in_place(grid.step(), &mut values);
    Ok(Path::from_parts(*grid, values))
}

/// Turns a Brownian path on `[0, 1]` into the bridge `W(t) - t W(1)`.
pub(crate) fn bridge_in_place(step: f64, values: &mut [f64]) {
    let n = values.len() - 1;
    let end = values[n];
    for (k, v) in values.iter_mut().enumerate() {
        *v -= k as f64 * step * end;
    }
    values[n] = 0.0;
}

/// Stationary OU process with mean zero and covariance `exp(-2|t-s|)`, i.e.
/// the solution of `dX = -2X dt + 2 dW` started from `X(0) ~ N(0, 1)`.
///
/// Uses the exact transition `X(t+Δ) = e^{-2Δ} X(t) + sqrt(1 - e^{-4Δ}) Z`,
/// so every finite-dimensional marginal on the grid is exact.
pub fn sample_ou_stationary(grid: &TimeGrid, stream: RngStreamSpec) -> Path {
    let mut values = vec![0.0; grid.len()];
    ou_into(grid.step(), &mut stream.rng(), &mut values);
    Path::from_parts(*grid, values)
}

/// The same OU law realised by a time change of Brownian motion,
/// `X(t) = e^{-2t} W(e^{4t})`, with `W` sampled exactly at the warped times.
/// Meant as a cross-check of [`sample_ou_stationary`].
///
/// The warp `e^{4t}` is the one matching covariance `exp(-2|t-s|)`; the
/// slower warp `e^{-t} W(e^{2t})` produces covariance `exp(-|t-s|)`.
pub fn ou_via_time_change(grid: &TimeGrid, stream: RngStreamSpec) -> Result<Path> {
    if 4.0 * grid.t_end() > 700.0 {
        return config(format!(
            "time-change horizon {} overflows exp(4T); must be at most 175",
            grid.t_end()
        ));
    }
    let mut rng = stream.rng();
    let mut z = vec![0.0; grid.len()];
    rng.fill_normal(&mut z);
    let mut values = Vec::with_capacity(grid.len());
    // W(1) at the first warped time e^0 = 1.
    let mut w = z[0];
    values.push(w);
    for k in 1..grid.len() {
        let (t0, t1) = (grid.time(k - 1), grid.time(k));
        // e^{4 t1} - e^{4 t0} = e^{4 t0} (e^{4(t1 - t0)} - 1)
        let dvar = (4.0 * t0).exp() * (4.0 * (t1 - t0)).exp_m1();
        w += dvar.sqrt() * z[k];
        values.push((-2.0 * t1).exp() * w);
    }
    Ok(Path::from_parts(*grid, values))
}

/// Parameters of the stationary AR(1) sequence with covariance
/// `R(n) = (1 - a) a^n / (1 + a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Params {
    a: f64,
}

impl Ar1Params {
    pub fn new(a: f64) -> Result<Self> {
        if !(a.is_finite() && a.abs() < 1.0) {
            return config(format!("AR(1) coefficient must satisfy |a| < 1, got {a}"));
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Stationary variance `(1 - a) / (1 + a)`.
    pub fn x0_variance(&self) -> f64 {
        (1.0 - self.a) / (1.0 + self.a)
    }

    /// Stationary covariance at lag `n`.
    pub fn covariance(&self, n: u32) -> f64 {
        self.x0_variance() * self.a.powi(n as i32)
    }

    /// Variance of the infinite past sum `sum_{n <= 0} a^{-n} xi_n`.
    pub fn past_sum_variance(&self) -> f64 {
        1.0 / (1.0 - self.a * self.a)
    }
}

/// Stationary AR(1) sequence `X_0, ..., X_n` with
/// `X_{k+1} = a X_k + (1 - a) xi_{k+1}` and `X_0 ~ N(0, (1-a)/(1+a))`
/// independent of the innovations.
///
/// The innovation weight `1 - a` is the one that keeps the sequence
/// stationary with covariance `(1 - a) a^n / (1 + a)`; it is also what the
/// moving-average form `X_n = (1-a) sum_{k<=n} a^{n-k} xi_k` gives.
pub fn sample_ar1(n: usize, params: Ar1Params, stream: RngStreamSpec) -> Result<Vec<f64>> {
    if n == 0 {
        return config("AR(1) sample length must be at least 1");
    }
    let a = params.a();
    let mut out = vec![0.0; n + 1];
    stream.rng().fill_normal(&mut out);
    out[0] *= params.x0_variance().sqrt();
    for k in 1..=n {
        out[k] = a * out[k - 1] + (1.0 - a) * out[k];
    }
    Ok(out)
}
