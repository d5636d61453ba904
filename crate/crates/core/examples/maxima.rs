//! Maxima of Brownian motion, the Brownian bridge and the OU process on
//! [0, 1]: grid versus exact continuous maxima, and the tail of η̄ = max X.

use fclt::experiments::{eta_bar_stats, maxima_report, MaxMode};
use fclt::rng::RngStreamSpec;

fn main() -> fclt::error::Result<()> {
    let stream = RngStreamSpec::new(42, 4);
    for mode in [MaxMode::Grid, MaxMode::Continuous] {
        let r = maxima_report(20_000, 0.01, mode, &[0.5, 1.0], stream)?;
        println!("{mode:?} maxima (dt = 0.01):");
        println!("  E max B = {:.4} ± {:.4} (exact 0.6267)", r.mean_max_bridge.mean, r.mean_max_bridge.stderr);
        println!("  E max W = {:.4} ± {:.4} (exact 0.7979)", r.mean_max_bm.mean, r.mean_max_bm.stderr);
        for (x, p, exact) in &r.bridge_tails {
            println!("  P(max B > {x}) = {:.4} ± {:.4} (exact {exact:.4})", p.mean, p.stderr);
        }
    }

    let eta = eta_bar_stats(20_000, 1e-3, stream.child(1))?;
    println!("E max_[0,1] X = {:.4} ± {:.4}", eta.value.mean, eta.value.stderr);
    for x in [3.5, 4.0] {
        println!(
            "  P(eta > {x}) = {:.2e}, concentration bound {:.3}",
            eta.extra(&format!("tail_{x}")).unwrap(),
            eta.extra(&format!("bound_{x}")).unwrap()
        );
    }
    Ok(())
}
