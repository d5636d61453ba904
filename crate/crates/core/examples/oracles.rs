//! Closed-form reference values used as test oracles.

use fclt::oracles::{iid_max_rate, kolmogorov_cdf, oracle_table, rate_envelope};

fn main() -> fclt::error::Result<()> {
    for o in oracle_table() {
        println!("{:<24} {:>10.6}   valid for {}", o.name, o.value, o.validity);
    }
    for k in [1.0, 16.0, 256.0, 4096.0] {
        println!("rate envelope at kappa {k:>6}: {:.5}", rate_envelope(k)?);
    }
    println!("P(max |B| <= 1) = {:.6}", kolmogorov_cdf(1.0));
    println!("sqrt(ln N / 2) at N = 1e5: {:.4}", iid_max_rate(1e5)?);
    Ok(())
}
