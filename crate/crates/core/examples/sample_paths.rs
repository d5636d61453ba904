//! Brownian motion, Brownian bridge, the stationary OU process (two
//! samplers) and AR(1) sequences, with quick moment checks.

use fclt::grid::TimeGrid;
use fclt::metrics::mc_mean_n;
use fclt::paths::{ou_via_time_change, sample_ar1, sample_bm, sample_bridge, sample_ou_stationary, Ar1Params};
use fclt::rng::RngStreamSpec;

fn main() -> fclt::error::Result<()> {
    let base = RngStreamSpec::new(42, 0);
    let grid = TimeGrid::new(1.0, 0.01)?;
    let reps = 20_000;

    let [w1, b_half] = mc_mean_n(reps, base.child(0), |s| {
        let w = sample_bm(&grid, s.child(0));
        let b = sample_bridge(&grid, s.child(1))?;
        Ok([w.value_at(1.0)?.powi(2), b.value_at(0.5)?.powi(2)])
    })?;
    println!("Var W(1)   = {:.4} ± {:.4}  (exact 1)", w1.mean, w1.stderr);
    println!("Var B(1/2) = {:.4} ± {:.4}  (exact 0.25)", b_half.mean, b_half.stderr);

    // Lag-0.1 covariance of the stationary OU process, e^{-0.2}.
    let [rec, tc] = mc_mean_n(reps, base.child(1), |s| {
        let x = sample_ou_stationary(&grid, s.child(0));
        let y = ou_via_time_change(&grid, s.child(1))?;
        Ok([x.at(30) * x.at(40), y.at(30) * y.at(40)])
    })?;
    println!("OU lag-0.1 covariance: recursion {:.4}, time change {:.4}, exact {:.4}", rec.mean, tc.mean, (-0.2f64).exp());

    let params = Ar1Params::new(0.5)?;
    let [lag2] = mc_mean_n(reps, base.child(2), |s| {
        let xs = sample_ar1(3, params, s)?;
        Ok([xs[0] * xs[2]])
    })?;
    println!("AR(1) a = 0.5, Cov(X_0, X_2) = {:.4} ± {:.4}  (exact {:.4})", lag2.mean, lag2.stderr, params.covariance(2));
    Ok(())
}
