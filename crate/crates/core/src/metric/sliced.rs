//! Monte Carlo sliced 2-Wasserstein distance between multivariate empirical
//! measures, and a slicing embedding that lets a whole sample of point clouds
//! share one direction set.

use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::format;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::metric::GaussianMeasure;

/// `L` directions drawn uniformly on the unit sphere `S^{d−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    dim: usize,
    dirs: Vec<f64>,
}

impl DirectionSet {
    pub fn draw<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("slicing needs dimension >= 2, got {dim}")));
        }
        if count == 0 {
            return Err(Error::InvalidArgument("need at least one slicing direction".into()));
        }
        let mut dirs = Vec::with_capacity(dim * count);
        let mut v = alloc::vec![0.0; dim];
        for _ in 0..count {
            loop {
                for x in v.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    dirs.extend(v.iter().map(|x| x / norm));
                    break;
                }
            }
        }
        Ok(DirectionSet { dim, dirs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dirs.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn direction(&self, l: usize) -> &[f64] {
        &self.dirs[l * self.dim..(l + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.dirs.chunks_exact(self.dim)
    }
}

fn project_sorted(points: &DMatrix<f64>, dir: &[f64]) -> Vec<f64> {
    let mut proj: Vec<f64> = points
        .row_iter()
        .map(|row| row.iter().zip(dir).map(|(a, b)| a * b).sum())
        .collect();
    proj.sort_by(f64::total_cmp);
    proj
}

/// Squared 1-D Wasserstein-2 distance between two empirical measures given by
/// sorted samples, exact for unequal sample sizes (merged quantile steps).
pub fn w2_squared_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len(), b.len());
    if na == nb {
        return a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / na as f64;
    }
    let (mut i, mut j) = (0usize, 0usize);
    let mut t = 0.0_f64;
    let mut acc = 0.0;
    while i < na && j < nb {
        let next_a = (i + 1) as f64 / na as f64;
        let next_b = (j + 1) as f64 / nb as f64;
        let next = next_a.min(next_b);
        let d = a[i] - b[j];
        acc += (next - t) * d * d;
        t = next;
        if next_a <= next {
            i += 1;
        }
        if next_b <= next {
            j += 1;
        }
    }
    acc
}

fn check_cloud(c: &DMatrix<f64>, what: &str) -> Result<()> {
    if c.nrows() == 0 || c.ncols() == 0 {
        return Err(Error::InvalidArgument(format!("{what} point cloud is empty")));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} point cloud has non-finite entries")));
    }
    Ok(())
}

/// Monte Carlo sliced W2 between two point clouds (rows are points):
/// `sqrt((1/L) Σ_l W2²(θ_l # a, θ_l # b))` with `θ_l` uniform on the sphere.
pub fn sliced_wasserstein2_mc<R: Rng + ?Sized>(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    directions: usize,
    rng: &mut R,
) -> Result<f64> {
    check_cloud(a, "first")?;
    check_cloud(b, "second")?;
    if a.ncols() != b.ncols() {
        return Err(Error::Incompatible(format!(
            "point clouds live in R^{} and R^{}",
            a.ncols(),
            b.ncols()
        )));
    }
    let set = DirectionSet::draw(a.ncols(), directions, rng)?;
    Ok(sliced_with_directions(a, b, &set))
}

pub(crate) fn sliced_with_directions(a: &DMatrix<f64>, b: &DMatrix<f64>, set: &DirectionSet) -> f64 {
    let total: f64 = set
        .iter()
        .map(|dir| w2_squared_sorted(&project_sorted(a, dir), &project_sorted(b, dir)))
        .sum();
    (total / set.len() as f64).sqrt()
}

/// Sliced W2 between two Gaussian laws over a fixed direction set, using the
/// closed-form 1-D Gaussian W2 of each projection.
pub fn sliced_wasserstein2_gaussian(a: &GaussianMeasure, b: &GaussianMeasure, set: &DirectionSet) -> Result<f64> {
    if a.dim() != b.dim() || a.dim() != set.dim() {
        return Err(Error::Incompatible(format!(
            "dimensions {} / {} / directions {}",
            a.dim(),
            b.dim(),
            set.dim()
        )));
    }
    let total: f64 = set
        .iter()
        .map(|dir| {
            let theta = nalgebra::DVector::from_column_slice(dir);
            let dm = theta.dot(a.mean()) - theta.dot(b.mean());
            let sa = (theta.dot(&(a.cov() * &theta))).max(0.0).sqrt();
            let sb = (theta.dot(&(b.cov() * &theta))).max(0.0).sqrt();
            dm * dm + (sa - sb) * (sa - sb)
        })
        .sum();
    Ok((total / set.len() as f64).sqrt())
}

/// A point cloud stored through its sorted projections on a shared
/// [`DirectionSet`]. Distances between clouds sliced on the same set equal the
/// Monte Carlo sliced W2 estimate with those directions.
#[derive(Debug, Clone)]
pub struct SlicedCloud {
    directions: Arc<DirectionSet>,
    projections: Vec<Vec<f64>>,
}

impl SlicedCloud {
    pub fn new(points: &DMatrix<f64>, directions: Arc<DirectionSet>) -> Result<Self> {
        check_cloud(points, "sliced")?;
        if points.ncols() != directions.dim() {
            return Err(Error::Incompatible(format!(
                "cloud in R^{} but directions in R^{}",
                points.ncols(),
                directions.dim()
            )));
        }
        let projections = directions.iter().map(|dir| project_sorted(points, dir)).collect();
        Ok(SlicedCloud { directions, projections })
    }

    pub fn directions(&self) -> &Arc<DirectionSet> {
        &self.directions
    }

    pub fn projections(&self) -> &[Vec<f64>] {
        &self.projections
    }

    pub fn distance(&self, other: &SlicedCloud) -> Result<f64> {
        if !(Arc::ptr_eq(&self.directions, &other.directions) || self.directions == other.directions) {
            return Err(Error::Incompatible("sliced clouds use different direction sets".into()));
        }
        let total: f64 = self
            .projections
            .iter()
            .zip(&other.projections)
            .map(|(a, b)| w2_squared_sorted(a, b))
            .sum();
        Ok((total / self.projections.len() as f64).sqrt())
    }
}

impl PartialEq for SlicedCloud {
    fn eq(&self, other: &Self) -> bool {
        self.directions == other.directions && self.projections == other.projections
    }
}
