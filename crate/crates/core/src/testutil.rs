//! Small statistics helpers shared by unit tests.

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Sample covariance and the standard error of the centred products.
pub fn cov_se(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (ma, mb) = (mean_se(a).0, mean_se(b).0);
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    mean_se(&prods)
}
