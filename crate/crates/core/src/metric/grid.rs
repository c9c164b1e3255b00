use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug)]
struct GridInner {
    points: Vec<f64>,
    weights: Vec<f64>,
}

/// Probability grid `0 < u_1 < … < u_M < 1` on which quantile functions are sampled.
///
/// Carries the quadrature weights of the trapezoidal rule over `[u_1, u_M]`
/// with the two boundary masses `[0, u_1]` and `[u_M, 1]` assigned to the end
/// points (flat extrapolation). The weights sum to one, so
/// `Σ_j weight_j · f(u_j)` approximates `∫₀¹ f`.
#[derive(Debug, Clone)]
pub struct ProbGrid(Arc<GridInner>);

pub const DEFAULT_GRID_SIZE: usize = 100;

impl ProbGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        let m = points.len();
        if m < 2 {
            return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {m}")));
        }
        if !(points[0] > 0.0 && points[m - 1] < 1.0) {
            return Err(Error::InvalidArgument("grid points must lie in (0, 1)".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("grid points must be strictly increasing".into()));
        }
        let mut weights = alloc::vec![0.0; m];
        for j in 0..m - 1 {
            let h = 0.5 * (points[j + 1] - points[j]);
            weights[j] += h;
            weights[j + 1] += h;
        }
        weights[0] += points[0];
        weights[m - 1] += 1.0 - points[m - 1];
        Ok(ProbGrid(Arc::new(GridInner { points, weights })))
    }

    /// Equispaced interior grid `u_j = j / (M + 1)`, `j = 1..=M`.
    pub fn equispaced(m: usize) -> Result<Self> {
        let denom = (m + 1) as f64;
        Self::new((1..=m).map(|j| j as f64 / denom).collect())
    }

    pub fn len(&self) -> usize {
        self.0.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.0.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.0.weights
    }

    pub fn same_as(&self, other: &ProbGrid) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.points == other.0.points
    }
}

impl PartialEq for ProbGrid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

/// A 1-D distribution stored as its quantile function sampled on a [`ProbGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileObject {
    grid: ProbGrid,
    values: Vec<f64>,
}

impl QuantileObject {
    pub fn new(grid: ProbGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidObject(format!(
                "quantile vector has length {} but grid has {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidObject("quantile values must be finite".into()));
        }
        if let Some(j) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidObject(format!(
                "quantile values decrease at index {}",
                j + 1
            )));
        }
        Ok(QuantileObject { grid, values })
    }

    /// Quantile function `u ↦ mean + sd · Φ⁻¹(u)` of a normal law.
    pub fn normal(grid: &ProbGrid, mean: f64, sd: f64) -> Result<Self> {
        let values = grid
            .points()
            .iter()
            .map(|&u| mean + sd.abs() * crate::special::norm_quantile(u))
            .collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &ProbGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Evaluates the quantile function at `u` by linear interpolation,
    /// flat outside `[u_1, u_M]`.
    pub fn eval(&self, u: f64) -> f64 {
        interp_linear(self.grid.points(), &self.values, u)
    }
}

/// Piecewise-linear interpolation through `(xs, ys)` with flat extrapolation.
/// `xs` must be nondecreasing.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    // first index with xs[k] > x
    let k = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let (y0, y1) = (ys[k - 1], ys[k]);
    if x1 == x0 {
        return y1;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Empirical quantiles of `samples` on `grid`: sorted order statistics with
/// linear interpolation at position `(N − 1)·u`.
pub fn empirical_quantiles(samples: &[f64], grid: &ProbGrid) -> Result<QuantileObject> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples for empirical quantiles, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let last = (sorted.len() - 1) as f64;
    let values = grid
        .points()
        .iter()
        .map(|&u| {
            let h = last * u;
            let lo = h as usize;
            let frac = h - lo as f64;
            if lo + 1 < sorted.len() {
                sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
            } else {
                sorted[lo]
            }
        })
        .collect();
    QuantileObject::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        let g = ProbGrid::equispaced(37).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
        let g = ProbGrid::new(alloc::vec![0.1, 0.15, 0.7, 0.95]).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grid_validation() {
        assert!(ProbGrid::new(alloc::vec![0.5]).is_err());
        assert!(ProbGrid::new(alloc::vec![0.0, 0.5]).is_err());
        assert!(ProbGrid::new(alloc::vec![0.3, 0.3]).is_err());
        assert!(ProbGrid::new(alloc::vec![0.2, 1.0]).is_err());
    }

    #[test]
    fn quantile_rejects_decreasing() {
        let g = ProbGrid::equispaced(3).unwrap();
        assert!(QuantileObject::new(g.clone(), alloc::vec![1.0, 0.5, 2.0]).is_err());
        assert!(QuantileObject::new(g.clone(), alloc::vec![1.0, 2.0]).is_err());
        assert!(QuantileObject::new(g, alloc::vec![1.0, f64::NAN, 2.0]).is_err());
    }

    #[test]
    fn empirical_quantiles_constant_sample() {
        let g = ProbGrid::equispaced(10).unwrap();
        let q = empirical_quantiles(&[3.5; 7], &g).unwrap();
        assert!(q.values().iter().all(|&v| v == 3.5));
    }

    #[test]
    fn empirical_quantiles_of_integers() {
        // 99 interior points u_j = j/100
        let g = ProbGrid::equispaced(99).unwrap();
        let samples: Vec<f64> = (1..=1000).map(|v| v as f64).collect();
        let q = empirical_quantiles(&samples, &g).unwrap();
        for (&u, &v) in g.points().iter().zip(q.values()) {
            assert!((v - 1000.0 * u).abs() <= 1.0, "u={u} v={v}");
        }
    }

    #[test]
    fn empirical_quantiles_permutation_invariant() {
        let g = ProbGrid::equispaced(20).unwrap();
        let a = [0.3, -1.0, 2.5, 0.0, 7.0, 1.0];
        let b = [7.0, 1.0, 0.0, -1.0, 0.3, 2.5];
        assert_eq!(
            empirical_quantiles(&a, &g).unwrap(),
            empirical_quantiles(&b, &g).unwrap()
        );
    }

    #[test]
    fn too_few_samples() {
        let g = ProbGrid::equispaced(4).unwrap();
        assert!(empirical_quantiles(&[1.0], &g).is_err());
    }
}
