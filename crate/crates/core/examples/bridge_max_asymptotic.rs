//! Growth of the maximum of N independent bridge maxima, against √2 and the
//! extreme-value prediction 1/√2.

use fclt::experiments::dt_sup_asymptotic;
use fclt::rng::RngStreamSpec;

fn main() -> fclt::error::Result<()> {
    let (est, cells) = dt_sup_asymptotic(&[10, 100, 1000, 10_000], 500, RngStreamSpec::new(42, 5))?;
    println!("{:>6}  {:>8}  {:>8}  {:>8}", "N", "signed", "abs", "gumbel");
    for c in &cells {
        println!("{:>6}  {:.5}  {:.5}  {:.5}", c.n, c.signed.mean, c.absolute.mean, c.gumbel_oracle);
    }
    println!(
        "distance to sqrt(2): {:.4}, to 1/sqrt(2): {:.4}",
        est.extra("distance_to_sqrt2").unwrap(),
        est.extra("distance_to_inv_sqrt2").unwrap()
    );
    Ok(())
}
