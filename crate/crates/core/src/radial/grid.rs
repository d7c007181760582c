use serde::{Deserialize, Serialize};

use crate::error::{LhfError, Result};

/// Values of a radial quantity sampled on the points of a [`RadialGrid`].
pub type RadialFunction = Vec<f64>;

pub const DEFAULT_POINTS: usize = 600;
pub const DEFAULT_RMAX: f64 = 40.0;

/// Logarithmic radial mesh `r_i = r_min * exp(i * dx)`.
///
/// Integrals over `r` are evaluated as trapezoidal sums in `x = ln r`, so the
/// weight of point `i` is `r_i * dx` (halved at both ends).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r: Vec<f64>,
    weights: Vec<f64>,
    dx: f64,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_min > 0.0) || !(r_max > r_min) || !r_max.is_finite() {
            return Err(LhfError::Config(format!(
                "invalid grid extent r_min={r_min}, r_max={r_max}"
            )));
        }
        if n_points < 3 {
            return Err(LhfError::Config(format!(
                "grid needs at least 3 points, got {n_points}"
            )));
        }
        let dx = (r_max / r_min).ln() / (n_points - 1) as f64;
        let mut r: Vec<f64> = (0..n_points)
            .map(|i| r_min * (i as f64 * dx).exp())
            .collect();
        r[n_points - 1] = r_max;
        Ok(Self::from_parts(r, dx))
    }

    /// Rebuild a grid from explicit points, checking that they are positive,
    /// strictly increasing and logarithmically spaced.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 3 {
            return Err(LhfError::Config("grid needs at least 3 points".into()));
        }
        if points[0] <= 0.0 {
            return Err(LhfError::Config("grid points must be positive".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LhfError::Config(
                "grid points must be strictly increasing".into(),
            ));
        }
        let n = points.len();
        let dx = (points[n - 1] / points[0]).ln() / (n - 1) as f64;
        for w in points.windows(2) {
            let step = (w[1] / w[0]).ln();
            if (step - dx).abs() > 1e-9 * dx.max(1.0) {
                return Err(LhfError::Config(
                    "grid points are not logarithmically spaced".into(),
                ));
            }
        }
        Ok(Self::from_parts(points, dx))
    }

    fn from_parts(r: Vec<f64>, dx: f64) -> Self {
        let n = r.len();
        let mut weights: Vec<f64> = r.iter().map(|&ri| ri * dx).collect();
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        Self { r, weights, dx }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn r_min(&self) -> f64 {
        self.r[0]
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    pub fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(LhfError::GridMismatch {
                expected: self.len(),
                found: f.len(),
            });
        }
        Ok(())
    }

    /// `∫ f(r) dr` over the grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    /// `∫ f(r) g(r) dr`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        debug_assert_eq!(g.len(), self.len());
        f.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    /// `∫ f g h dr`.
    pub fn inner3(&self, f: &[f64], g: &[f64], h: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(h)
            .zip(&self.weights)
            .map(|(((a, b), c), w)| a * b * c * w)
            .sum()
    }

    /// Running integral `I_i = ∫_{r_0}^{r_i} f(r) dr`, sixth order in `dx`
    /// on interior intervals.
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        let g: Vec<f64> = f.iter().zip(&self.r).map(|(a, r)| a * r).collect();
        let mut out = vec![0.0; n];
        for i in 0..n - 1 {
            let step = if i >= 2 && i + 3 < n {
                (11.0 * (g[i - 2] + g[i + 3]) - 93.0 * (g[i - 1] + g[i + 2])
                    + 802.0 * (g[i] + g[i + 1]))
                    / 1440.0
            } else if i >= 1 && i + 2 < n {
                (-g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2]) / 24.0
            } else if i == 0 {
                (5.0 * g[0] + 8.0 * g[1] - g[2]) / 12.0
            } else {
                (-g[n - 3] + 8.0 * g[n - 2] + 5.0 * g[n - 1]) / 12.0
            };
            out[i + 1] = out[i] + step * self.dx;
        }
        out
    }

    /// Running integral from the outside, `J_i = ∫_{r_i}^{r_max} f(r) dr`.
    pub fn cumulative_from_outside(&self, f: &[f64]) -> Vec<f64> {
        let forward = self.cumulative(f);
        let total = forward[forward.len() - 1];
        forward.iter().map(|v| total - v).collect()
    }

    /// Index of the first point with `r >= radius`.
    pub fn index_at(&self, radius: f64) -> usize {
        self.r.partition_point(|&x| x < radius).min(self.len() - 1)
    }
}

/// Default mesh for nuclear charge `z`: `r_min = 1e-6 / z`, log-spaced up to
/// `r_max`.
pub fn build_grid(z: f64, n_points: usize, r_max: f64) -> Result<RadialGrid> {
    if !(z > 0.0) {
        return Err(LhfError::Config(format!("nuclear charge must be positive, got {z}")));
    }
    if n_points < 200 {
        return Err(LhfError::Config(format!(
            "grid needs at least 200 points, got {n_points}"
        )));
    }
    if !(r_max > 10.0) {
        return Err(LhfError::Config(format!("r_max must exceed 10 bohr, got {r_max}")));
    }
    RadialGrid::new(1e-6 / z, r_max, n_points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_match_definition() {
        let g = build_grid(2.0, 600, 40.0).unwrap();
        assert_eq!(g.len(), 600);
        assert!((g.r_min() - 5e-7).abs() < 1e-20);
        assert_eq!(g.r_max(), 40.0);
        let ratio = g.r()[1] / g.r()[0];
        for w in g.r().windows(2) {
            assert!((w[1] / w[0] - ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn normalized_hydrogen_density() {
        let g = build_grid(1.0, DEFAULT_POINTS, DEFAULT_RMAX).unwrap();
        let f: Vec<f64> = g.r().iter().map(|r| 4.0 * r * r * (-2.0 * r).exp()).collect();
        assert!((g.integrate(&f) - 1.0).abs() < 1e-10);
        let f: Vec<f64> = g.r().iter().map(|r| r * r * (-2.0 * r).exp()).collect();
        assert!((g.integrate(&f) - 0.25).abs() / 0.25 < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_grid(0.0, 600, 40.0).is_err());
        assert!(build_grid(1.0, 100, 40.0).is_err());
        assert!(build_grid(1.0, 600, 5.0).is_err());
        let g = build_grid(1.0, 300, 40.0).unwrap();
        let mut reversed = g.r().to_vec();
        reversed.reverse();
        assert!(RadialGrid::from_points(reversed).is_err());
        assert!(RadialGrid::from_points(g.r().to_vec()).is_ok());
    }

    #[test]
    fn cumulative_is_high_order() {
        let g = build_grid(1.0, 600, 40.0).unwrap();
        let f: Vec<f64> = g.r().iter().map(|r| (-r).exp()).collect();
        let c = g.cumulative(&f);
        for (i, r) in g.r().iter().enumerate().step_by(37) {
            let exact = (-g.r_min()).exp() - (-r).exp();
            assert!((c[i] - exact).abs() < 1e-10, "r={r}: {} vs {exact}", c[i]);
        }
    }
}
