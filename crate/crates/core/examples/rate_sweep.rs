//! Upper and lower Wasserstein-1 brackets across κ, divided by the rate
//! envelope √(ln(1 + κ) / κ).

use fclt::couplings::CouplingKind;
use fclt::experiments::sweep_rate;
use fclt::metrics::BracketConfig;
use fclt::rng::RngStreamSpec;

fn main() -> fclt::error::Result<()> {
    let cfg = BracketConfig::default();
    let kappas = [4.0, 16.0, 64.0, 256.0];
    for mode in [CouplingKind::Ct, CouplingKind::Dt0, CouplingKind::Ar1 { a: 0.5 }] {
        let table = sweep_rate(mode, &kappas, 1000, &cfg, RngStreamSpec::new(42, 1))?;
        println!("{}:", mode.name());
        for r in &table.rows {
            println!(
                "  kappa {:>5}  upper {:.4} ± {:.4}  lower {:.4} ± {:.4}  ratios {:.3} / {:.3}",
                r.kappa, r.upper.mean, r.upper.stderr, r.lower.mean, r.lower.stderr, r.ratio_upper, r.ratio_lower
            );
        }
        let failures = table.failures();
        println!("  checks: {}", if failures.is_empty() { "pass".to_string() } else { failures.join("; ") });
    }
    Ok(())
}
