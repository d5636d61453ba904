//! Closed-form reference values and bounds used to check the Monte Carlo
//! estimators.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::special::normal_sf;

/// Process whose running maximum over `[0, 1]` has a closed-form tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxProcess {
    Bridge,
    Bm,
}

/// `P(max_{[0,1]} > x)`: `e^{-2x²}` for the Brownian bridge and
/// `2(1 - Φ(x))` for Brownian motion.
pub fn max_tail(process: MaxProcess, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("maximum tail needs x >= 0, got {x}"));
    }
    Ok(match process {
        MaxProcess::Bridge => (-2.0 * x * x).exp(),
        MaxProcess::Bm => 2.0 * normal_sf(x),
    })
}

/// Named constants and rate functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ClosedMoment {
    /// `E max_{[0,1]} B = √(2π)/4`.
    EMaxBridge,
    /// `E max_{[0,1]} W = √(2/π)`.
    EMaxBm,
    /// `lim E ζ_κ = 1/√2`.
    ZetaLimit,
    /// `√(2 ln T)`, the almost-sure growth of `max_{[0,T]} X`.
    OuSupRate { t: f64 },
    /// `√(ln(N) / 2)`, the growth of the maximum of `N` iid variables with
    /// tail `e^{-2x²}`.
    IidMaxRate { n: f64 },
}

pub fn closed_moment(m: ClosedMoment) -> Result<f64> {
    match m {
        ClosedMoment::EMaxBridge => Ok((2.0 * PI).sqrt() / 4.0),
        ClosedMoment::EMaxBm => Ok((2.0 / PI).sqrt()),
        ClosedMoment::ZetaLimit => Ok(1.0 / SQRT_2),
        ClosedMoment::OuSupRate { t } => {
            if !(t > 1.0 && t.is_finite()) {
                return domain(format!("OU sup rate needs T > 1, got {t}"));
            }
            Ok((2.0 * t.ln()).sqrt())
        }
        ClosedMoment::IidMaxRate { n } => iid_max_rate(n),
    }
}

/// `√(ln(N) / 2)`: the level `x` at which `N e^{-2x²} = 1`.
pub fn iid_max_rate(n: f64) -> Result<f64> {
    if !(n > 1.0 && n.is_finite()) {
        return domain(format!("iid maximum rate needs N > 1, got {n}"));
    }
    Ok((0.5 * n.ln()).sqrt())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return domain(format!("kappa must be >= 1, got {kappa}"));
    }
    Ok(())
}

/// `√(ln(1 + κ) / κ)`.
pub fn rate_envelope(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok((kappa.ln_1p() / kappa).sqrt())
}

/// Gaussian concentration bound `e^{-(x - x*)² / (2σ²)}` for `x > x*`.
pub fn borell_tis_tail(x: f64, x_star: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    if !(x > x_star) {
        return domain(format!(
            "concentration bound holds only above the mean of the supremum: x = {x} <= {x_star}"
        ));
    }
    let d = x - x_star;
    Ok((-d * d / (2.0 * sigma * sigma)).exp())
}

/// `E ∫_0^1 |S_κ - W| dt = √(π / (32κ))` under the bridge-chain coupling.
pub fn l1_rate(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok((PI / (32.0 * kappa)).sqrt())
}

/// `Var W^κ(t) = t - (1 - e^{-2κt}) / (2κ)` for the continuous-time input.
pub fn var_wkappa_ct(t: f64, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("time must be >= 0, got {t}"));
    }
    Ok(t + (-2.0 * kappa * t).exp_m1() / (2.0 * kappa))
}

/// Distribution function of `max_{[0,1]} |B|` (Kolmogorov):
/// `1 - 2 Σ_{k≥1} (-1)^{k-1} e^{-2k²x²}`.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 0.3 {
        // Dual theta series; the alternating series converges slowly here.
        let c = (2.0 * PI).sqrt() / x;
        let mut s = 0.0;
        for k in 1..=10 {
            let j = (2 * k - 1) as f64;
            s += (-(j * j) * PI * PI / (8.0 * x * x)).exp();
        }
        return c * s;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    1.0 - 2.0 * s
}

/// One named oracle with its validity domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub name: String,
    pub value: f64,
    pub validity: String,
}

/// The table of reference values shown by `verify-oracles`.
pub fn oracle_table() -> Vec<OracleValue> {
    let entry = |name: &str, value: f64, validity: &str| OracleValue {
        name: name.to_string(),
        value,
        validity: validity.to_string(),
    };
    let v = |r: Result<f64>| r.expect("oracle arguments are inside their domain");
    vec![
        entry("E_max_bridge", v(closed_moment(ClosedMoment::EMaxBridge)), "max of bridge on [0,1]"),
        entry("E_max_bm", v(closed_moment(ClosedMoment::EMaxBm)), "max of BM on [0,1]"),
        entry("P_max_bridge_gt_0.5", v(max_tail(MaxProcess::Bridge, 0.5)), "x >= 0"),
        entry("P_max_bridge_gt_1", v(max_tail(MaxProcess::Bridge, 1.0)), "x >= 0"),
        entry("P_max_bm_gt_1", v(max_tail(MaxProcess::Bm, 1.0)), "x >= 0"),
        entry("zeta_limit", v(closed_moment(ClosedMoment::ZetaLimit)), "kappa -> infinity"),
        entry("eta_bar_tail_bound_3.5", v(borell_tis_tail(3.5, 3.2, 1.0)), "x > 3.2"),
        entry("l1_rate_kappa_1", v(l1_rate(1.0)), "kappa >= 1"),
        entry("var_wkappa_ct_t1_k1", v(var_wkappa_ct(1.0, 1.0)), "t >= 0, kappa >= 1"),
        entry("rate_envelope_kappa_1", v(rate_envelope(1.0)), "kappa >= 1"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn named_values() {
        let close = |a: f64, b: f64, tol: f64| assert!((a - b).abs() < tol, "{a} vs {b}");
        close(max_tail(MaxProcess::Bridge, 0.0).unwrap(), 1.0, 0.0 + 1e-15);
        close(max_tail(MaxProcess::Bridge, 1.0).unwrap(), 0.135_335_283_236_612_7, 1e-15);
        close(max_tail(MaxProcess::Bm, 0.0).unwrap(), 1.0, 1e-15);
        close(closed_moment(ClosedMoment::EMaxBridge).unwrap(), 0.626_657_068_657_750_1, 1e-15);
        close(closed_moment(ClosedMoment::EMaxBm).unwrap(), 0.797_884_560_802_865_4, 1e-15);
        close(closed_moment(ClosedMoment::ZetaLimit).unwrap(), 0.707_106_781_186_547_5, 1e-15);
        close(iid_max_rate(std::f64::consts::E.powi(2)).unwrap(), 1.0, 1e-15);
        close(closed_moment(ClosedMoment::OuSupRate { t: std::f64::consts::E }).unwrap(), SQRT_2, 1e-15);
        close(rate_envelope(1.0).unwrap(), 0.832_554_611_157_697_8, 1e-15);
        close(rate_envelope(std::f64::consts::E - 1.0).unwrap(), 0.762_873_978_366_890_2, 1e-12);
        close(borell_tis_tail(3.2 + SQRT_2, 3.2, 1.0).unwrap(), (-1.0f64).exp(), 1e-15);
        close(l1_rate(1.0).unwrap(), 0.313_328_534_328_875, 1e-12);
        close(l1_rate(4.0).unwrap(), 0.156_664_267_164_437_5, 1e-12);
        close(var_wkappa_ct(1.0, 1.0).unwrap(), 0.567_667_641_618_306_4, 1e-15);
        close(var_wkappa_ct(0.0, 3.0).unwrap(), 0.0, 1e-15);
        assert!((var_wkappa_ct(1.0, 1e6).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn domain_errors() {
        assert!(max_tail(MaxProcess::Bridge, -0.1).is_err());
        assert!(rate_envelope(0.5).is_err());
        assert!(l1_rate(0.9).is_err());
        assert!(borell_tis_tail(3.0, 3.2, 1.0).is_err());
        assert!(borell_tis_tail(3.2, 3.2, 1.0).is_err());
        assert!(borell_tis_tail(4.0, 3.2, 0.0).is_err());
        assert!(iid_max_rate(1.0).is_err());
        assert!(closed_moment(ClosedMoment::OuSupRate { t: 0.5 }).is_err());
        assert!(var_wkappa_ct(-1.0, 2.0).is_err());
    }

    #[test]
    fn borell_tis_near_threshold_is_one() {
        let v = borell_tis_tail(3.2 + 1e-9, 3.2, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn envelope_decreases_on_dyadic_grid() {
        let vals: Vec<f64> = (6..=14).map(|k| rate_envelope(2f64.powi(k)).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn kolmogorov_series_agree_and_match_tail() {
        // Both series are valid on an overlap.
        for i in 1..20 {
            let x = 0.2 + i as f64 * 0.01;
            let theta: f64 = {
                let c = (2.0 * PI).sqrt() / x;
                (1..=10)
                    .map(|k| {
                        let j = (2 * k - 1) as f64;
                        (-(j * j) * PI * PI / (8.0 * x * x)).exp()
                    })
                    .sum::<f64>()
                    * c
            };
            let alt: f64 = 1.0
                - 2.0
                    * (1..=200)
                        .map(|k| {
                            let kf = k as f64;
                            let t = (-2.0 * kf * kf * x * x).exp();
                            if k % 2 == 1 { t } else { -t }
                        })
                        .sum::<f64>();
            assert!((theta - alt).abs() < 1e-12, "x = {x}");
        }
        // For large x the two-sided tail is twice the one-sided tail.
        let x = 2.0;
        let tail = 1.0 - kolmogorov_cdf(x);
        assert!((tail / (2.0 * (-2.0 * x * x).exp()) - 1.0).abs() < 1e-6);
        assert_eq!(kolmogorov_cdf(0.0), 0.0);
    }

    #[test]
    fn table_is_finite() {
        for o in oracle_table() {
            assert!(o.value.is_finite(), "{}", o.name);
        }
    }

    proptest! {
        #[test]
        fn max_tails_are_decreasing_probabilities(x in 0.0f64..6.0, dx in 1e-6f64..1.0) {
            for p in [MaxProcess::Bridge, MaxProcess::Bm] {
                let a = max_tail(p, x).unwrap();
                let b = max_tail(p, x + dx).unwrap();
                prop_assert!((0.0..=1.0).contains(&a));
                prop_assert!(b < a);
            }
        }

        #[test]
        fn l1_rate_quarter_scaling(k in 1.0f64..1e6) {
            let r = l1_rate(4.0 * k).unwrap() / l1_rate(k).unwrap();
            prop_assert!((r - 0.5).abs() < 1e-14);
        }

        #[test]
        fn kolmogorov_cdf_is_monotone(x in 0.05f64..3.0, dx in 1e-4f64..0.5) {
            let a = kolmogorov_cdf(x);
            let b = kolmogorov_cdf(x + dx);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b >= a);
        }
    }
}
