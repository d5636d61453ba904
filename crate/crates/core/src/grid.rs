use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Uniform time grid `t_k = k * step`, `k = 0..=n_steps`, starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    step: f64,
    n_steps: usize,
}

/// Relative tolerance used when matching a horizon to a whole number of steps.
const FIT_TOL: f64 = 1e-9;

impl TimeGrid {
    /// Grid with `n_steps` steps of size `step`.
    pub fn with_steps(step: f64, n_steps: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return config(format!("grid step must be positive and finite, got {step}"));
        }
        if n_steps == 0 {
            return config("grid must have at least one step");
        }
        Ok(Self { step, n_steps })
    }

    /// Grid on `[0, t_end]` with `n_steps` equal steps.
    pub fn uniform(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return config(format!("grid horizon must be positive and finite, got {t_end}"));
        }
        if n_steps == 0 {
            return config("grid must have at least one step");
        }
        Self::with_steps(t_end / n_steps as f64, n_steps)
    }

    /// Grid on `[0, t_end]` with the given step; `t_end` must be a whole
    /// number of steps up to rounding.
    pub fn new(t_end: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return config(format!("grid step must be positive and finite, got {step}"));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return config(format!("grid horizon must be positive and finite, got {t_end}"));
        }
        let n = (t_end / step).round();
        if n < 1.0 || ((n * step - t_end) / t_end).abs() > FIT_TOL {
            return config(format!(
                "horizon {t_end} is not a whole number of steps of size {step}"
            ));
        }
        Self::with_steps(step, n as usize)
    }

    /// Smallest grid with the given step that reaches at least `t_end`.
    pub fn covering(t_end: f64, step: f64) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return config(format!("grid horizon must be positive and finite, got {t_end}"));
        }
        let n = (t_end / step * (1.0 - FIT_TOL)).ceil().max(1.0);
        Self::with_steps(step, n as usize)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_steps)
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.time(k))
    }

    /// Index of the grid point at time `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = t / self.step;
        let k = x.round();
        if k < 0.0 || k > self.n_steps as f64 || (x - k).abs() > 1e-6 {
            return None;
        }
        Some(k as usize)
    }

    /// Index of the last grid point not exceeding `t`.
    pub fn floor_index(&self, t: f64) -> usize {
        let k = (t / self.step * (1.0 + FIT_TOL)).floor();
        (k.max(0.0) as usize).min(self.n_steps)
    }
}

/// A real function sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl Path {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return config(format!(
                "path has {} values but the grid has {} points",
                values.len(),
                grid.len()
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return config(format!("path value at index {k} is not finite"));
        }
        Ok(Self { grid, values })
    }

    /// Builds a path without the finiteness scan; for samplers whose output is
    /// finite by construction.
    pub(crate) fn from_parts(grid: TimeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.times().map(f).collect())
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self::from_parts(grid, vec![0.0; grid.len()])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Value at time `t`, which must lie on the grid.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        match self.grid.index_of(t) {
            Some(k) => Ok(self.values[k]),
            None => config(format!("time {t} is not a point of the path grid")),
        }
    }

    fn check_same_grid(&self, other: &Path) -> Result<()> {
        if self.grid != other.grid {
            return config("paths live on different grids");
        }
        Ok(())
    }

    /// Pointwise difference `self - other`.
    pub fn sub(&self, other: &Path) -> Result<Path> {
        self.check_same_grid(other)?;
        Ok(Self::from_parts(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Pointwise sum `self + other`.
    pub fn add(&self, other: &Path) -> Result<Path> {
        self.check_same_grid(other)?;
        Ok(Self::from_parts(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn scale(&self, c: f64) -> Path {
        Self::from_parts(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    /// Restriction to the grid points with `t <= t_end`.
    pub fn truncate(&self, t_end: f64) -> Result<Path> {
        if t_end > self.grid.t_end() * (1.0 + FIT_TOL) {
            return config(format!(
                "cannot truncate a path ending at {} to {t_end}",
                self.grid.t_end()
            ));
        }
        let k = self.grid.floor_index(t_end);
        if k == 0 {
            return config(format!("truncation at {t_end} leaves fewer than two points"));
        }
        let grid = TimeGrid::with_steps(self.grid.step, k)?;
        Ok(Self::from_parts(grid, self.values[..=k].to_vec()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_steps() {
        assert!(TimeGrid::new(1.0, 0.0).is_err());
        assert!(TimeGrid::new(1.0, -0.1).is_err());
        assert!(TimeGrid::new(1.0, f64::NAN).is_err());
        assert!(TimeGrid::new(1.0, 0.3).is_err());
        assert!(TimeGrid::with_steps(0.1, 0).is_err());
    }

    #[test]
    fn horizon_matches_steps() {
        let g = TimeGrid::new(1.0, 1e-4).unwrap();
        assert_eq!(g.n_steps(), 10_000);
        assert_eq!(g.len(), 10_001);
        assert!((g.t_end() - 1.0).abs() < 1e-12);
        let ts: Vec<f64> = g.times().collect();
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(ts[0], 0.0);
    }

    #[test]
    fn covering_reaches_horizon() {
        let g = TimeGrid::covering(1.05, 0.1).unwrap();
        assert_eq!(g.n_steps(), 11);
        let g = TimeGrid::covering(1.0, 0.1).unwrap();
        assert_eq!(g.n_steps(), 10);
    }

    #[test]
    fn index_lookup() {
        let g = TimeGrid::new(2.0, 0.25).unwrap();
        assert_eq!(g.index_of(0.5), Some(2));
        assert_eq!(g.index_of(0.6), None);
        assert_eq!(g.index_of(2.5), None);
        assert_eq!(g.floor_index(0.6), 2);
        assert_eq!(g.floor_index(9.0), 8);
    }

    #[test]
    fn path_validation() {
        let g = TimeGrid::new(1.0, 0.5).unwrap();
        assert!(Path::new(g, vec![0.0, 1.0]).is_err());
        assert!(Path::new(g, vec![0.0, f64::NAN, 1.0]).is_err());
        let p = Path::new(g, vec![0.0, 1.0, 2.0]).unwrap();
        let q = Path::from_fn(g, |t| t).unwrap();
        assert_eq!(p.sub(&q).unwrap().values(), &[0.0, 0.5, 1.0]);
        let other = Path::zeros(TimeGrid::new(1.0, 0.25).unwrap());
        assert!(p.sub(&other).is_err());
    }

    #[test]
    fn truncation() {
        let g = TimeGrid::new(4.0, 0.5).unwrap();
        let p = Path::from_fn(g, |t| t * t).unwrap();
        let q = p.truncate(1.0).unwrap();
        assert_eq!(q.len(), 3);
        assert_eq!(q.values(), &[0.0, 0.25, 1.0]);
        assert!(p.truncate(5.0).is_err());
    }
}
