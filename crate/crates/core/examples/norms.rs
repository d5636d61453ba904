//! Path norms and simple distances: the weighted sup norm, the sup norm on
//! [0, T], the L1 distance of a coupled pair and the one-dimensional
//! Wasserstein-1 distance of samples.

use fclt::couplings::{build_dt0_pair, Kappa};
use fclt::grid::{Path, TimeGrid};
use fclt::metrics::{l1_diff, marginal_w1, mc_mean, sup_norm, weighted_norm, WeightedNormConfig};
use fclt::oracles::l1_rate;
use fclt::rng::RngStreamSpec;

fn main() -> fclt::error::Result<()> {
    let g = TimeGrid::new(10.0, 0.01)?;
    let f = Path::from_fn(g, |t| t)?;
    let cfg = WeightedNormConfig { horizon: 10.0, ..Default::default() };
    println!("weighted norm of f(t) = t on [0, 10]: {:.4}", weighted_norm(&f, &cfg)?.value);
    println!("sup norm on [0, 2]: {:.4}", sup_norm(&f, 2.0)?);

    for k in [1.0, 4.0, 16.0] {
        let kappa = Kappa::new(k)?;
        let e = mc_mean(20_000, RngStreamSpec::new(42, 8), |s| l1_diff(&build_dt0_pair(kappa, 1.0, 64, s)?, 1.0))?;
        println!("E int |S - W| at kappa {k:>2}: {:.4} ± {:.4} (closed form {:.4})", e.mean, e.stderr, l1_rate(k)?);
    }

    let p: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
    let q: Vec<f64> = p.iter().map(|x| x + 0.25).collect();
    println!("W1 between a sample and its shift by 0.25: {:.4}", marginal_w1(&p, &q)?);
    Ok(())
}
