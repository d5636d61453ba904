//! Solution maps driven by W and by W^κ: the Lipschitz transfer of the
//! coupling distance and the resulting weak-error rates.

use fclt::couplings::{CouplingKind, Kappa};
use fclt::metrics::BracketConfig;
use fclt::rng::RngStreamSpec;
use fclt::sde::{lipschitz_transfer, weak_error_sweep, DriftSpec};

fn main() -> fclt::error::Result<()> {
    let cfg = BracketConfig::default();
    let kappa = Kappa::new(64.0)?;
    for n in 1..=3 {
        let spec = DriftSpec::example(n)?;
        let input = if n == 2 { CouplingKind::Dt0 } else { CouplingKind::Ct };
        let r = lipschitz_transfer(&spec, input, kappa, 100, &cfg, RngStreamSpec::new(42, 6))?;
        println!(
            "example {n}: C_psi = {:.3}, largest observed ratio {:.3}, violations {}",
            r.c_psi, r.max_ratio, r.violations
        );
    }

    let spec = DriftSpec::example(3)?;
    let table = weak_error_sweep(&spec, CouplingKind::Ct, &[4.0, 16.0, 64.0, 256.0], 300, &cfg, RngStreamSpec::new(42, 6))?;
    for r in &table.rows {
        println!(
            "kappa {:>4}: error {:.4} ± {:.4}, C_psi·E|w_kappa - w| = {:.4}, error / rate = {:.3}",
            r.kappa, r.error.mean, r.error.stderr, r.envelope, r.rate_ratio
        );
    }
    Ok(())
}
