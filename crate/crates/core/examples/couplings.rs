//! The three couplings of a rescaled process with Brownian motion: the
//! continuous-time running integral of OU, interpolated partial sums of iid
//! normals, and partial sums of a stationary AR(1) sequence.

use fclt::couplings::{build_ar1_pair, build_ct_pair, build_dt0_pair, Kappa};
use fclt::paths::Ar1Params;
use fclt::rng::RngStreamSpec;

fn main() -> fclt::error::Result<()> {
    let stream = RngStreamSpec::new(42, 0);
    let kappa = Kappa::new(16.0)?;

    let ct = build_ct_pair(kappa, 2.0, 0.05, stream)?;
    let identity_gap = ct
        .difference()
        .values()
        .iter()
        .zip(ct.residual().values())
        .map(|(d, r)| (d - r).abs())
        .fold(0.0, f64::max);
    println!("ct: {} grid points, max |w_kappa - w - residual| = {identity_gap:.2e}", ct.grid().len());

    let dt0 = build_dt0_pair(kappa, 2.0, 16, stream)?;
    let knots: f64 = (0..=32).map(|n| dt0.residual().at(n * 16).abs()).fold(0.0, f64::max);
    println!("dt0: residual at the knots n/kappa is {knots:.1e}; between knots it is a scaled bridge");

    let ar1 = build_ar1_pair(Ar1Params::new(0.5)?, kappa, 2.0, 16, stream)?;
    println!(
        "ar1 (a = 0.5): max |w_kappa - w| = {:.4}, displayed closed-form discrepancy = {:.4}",
        ar1.difference().values().iter().fold(0.0f64, |m, v| m.max(v.abs())),
        ar1.formula_discrepancy().unwrap()
    );

    let same = build_ar1_pair(Ar1Params::new(0.0)?, kappa, 2.0, 16, stream)?;
    println!("ar1 with a = 0 equals dt0: {}", same.w_kappa() == dt0.w_kappa());
    Ok(())
}
