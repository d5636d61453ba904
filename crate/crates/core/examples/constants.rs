//! The process constants: C_X (weighted supremum of |X(t) - X(0)|), c_X
//! (infimum of the normalised running maximum) and the limit of ζ_κ.

use fclt::experiments::{estimate_cx_lower_and_zeta, estimate_cx_upper};
use fclt::rng::RngStreamSpec;

fn main() -> fclt::error::Result<()> {
    let upper = estimate_cx_upper(200, 200.0, 0.01, RngStreamSpec::new(42, 2))?;
    println!(
        "C_X ≈ {:.3} ± {:.3} (bracket {:?}), doubled window {:.3}",
        upper.value.mean,
        upper.value.stderr,
        upper.bracket.unwrap(),
        upper.extra("doubled").unwrap()
    );

    let kappas = [1.0, 10.0, 100.0, 1000.0];
    let (cx, zeta) = estimate_cx_lower_and_zeta(&kappas, 200, 0.01, RngStreamSpec::new(42, 3))?;
    for (c, z) in cx.cells.iter().zip(&zeta.cells) {
        println!("kappa {:>6}: c_X cell {:.4}, zeta {:.4}", c.param, c.estimate.mean, z.estimate.mean);
    }
    println!("c_X ≈ {:.4} (bracket {:?})", cx.value.mean, cx.bracket.unwrap());
    println!("zeta at kappa = 1000: {:.4}, limit {:.4}", zeta.value.mean, zeta.target.unwrap());
    Ok(())
}
