//! Object types, their validity invariants, and the distances between them.

mod distance;
mod grid;
mod objects;
mod sliced;

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

pub use distance::{
    beta_quantile_object, frobenius, hellinger_beta, l2_function_distance, wasserstein2_gaussian,
    wasserstein2_quantile, wasserstein2_quantile_sq,
};
pub use grid::{empirical_quantiles, interp_linear, ProbGrid, QuantileObject, DEFAULT_GRID_SIZE};
pub use objects::{GaussianMeasure, LaplacianObject, SampledFunction, SpdObject};
pub use sliced::{
    sliced_wasserstein2_gaussian, sliced_wasserstein2_mc, w2_squared_sorted, DirectionSet, SlicedCloud,
};

use crate::error::{Error, Result};

/// Resolution used when [`MetricObject::distance`] compares sampled functions.
pub const FUNCTION_GRID_SIZE: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectKind {
    Euclidean,
    Quantile,
    Gaussian,
    Spd,
    Laplacian,
    Function,
    SlicedCloud,
}

/// A predictor or response living in one of the supported metric spaces.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricObject {
    Euclidean(Vec<f64>),
    Quantile(QuantileObject),
    Gaussian(GaussianMeasure),
    Spd(SpdObject),
    Laplacian(LaplacianObject),
    Function(SampledFunction),
    SlicedCloud(SlicedCloud),
}

impl MetricObject {
    pub fn kind(&self) -> ObjectKind {
        match self {
            MetricObject::Euclidean(_) => ObjectKind::Euclidean,
            MetricObject::Quantile(_) => ObjectKind::Quantile,
            MetricObject::Gaussian(_) => ObjectKind::Gaussian,
            MetricObject::Spd(_) => ObjectKind::Spd,
            MetricObject::Laplacian(_) => ObjectKind::Laplacian,
            MetricObject::Function(_) => ObjectKind::Function,
            MetricObject::SlicedCloud(_) => ObjectKind::SlicedCloud,
        }
    }

    pub fn scalar(x: f64) -> Self {
        MetricObject::Euclidean(alloc::vec![x])
    }

    /// Native distance of the object's space. Fails for objects of different
    /// kinds or incompatible dimensions/grids.
    pub fn distance(&self, other: &MetricObject) -> Result<f64> {
        Ok(self.distance_sq(other)?.sqrt())
    }

    pub fn distance_sq(&self, other: &MetricObject) -> Result<f64> {
        use MetricObject::*;
        match (self, other) {
            (Euclidean(a), Euclidean(b)) => {
                if a.len() != b.len() {
                    return Err(Error::Incompatible(format!(
                        "vectors of length {} and {}",
                        a.len(),
                        b.len()
                    )));
                }
                Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
            }
            (Quantile(a), Quantile(b)) => wasserstein2_quantile_sq(a, b),
            (Gaussian(a), Gaussian(b)) => sq(wasserstein2_gaussian(a, b)),
            (Spd(a), Spd(b)) => sq(frobenius(a.mat(), b.mat())),
            (Laplacian(a), Laplacian(b)) => sq(frobenius(a.mat(), b.mat())),
            (Function(a), Function(b)) => sq(l2_function_distance(a, b, FUNCTION_GRID_SIZE)),
            (SlicedCloud(a), SlicedCloud(b)) => sq(a.distance(b)),
            (a, b) => Err(Error::Incompatible(format!(
                "cannot compare {:?} with {:?}",
                a.kind(),
                b.kind()
            ))),
        }
    }

    pub fn as_quantile(&self) -> Option<&QuantileObject> {
        match self {
            MetricObject::Quantile(q) => Some(q),
            _ => None,
        }
    }
}

fn sq(d: Result<f64>) -> Result<f64> {
    d.map(|d| d * d)
}

impl From<QuantileObject> for MetricObject {
    fn from(q: QuantileObject) -> Self {
        MetricObject::Quantile(q)
    }
}

impl From<GaussianMeasure> for MetricObject {
    fn from(g: GaussianMeasure) -> Self {
        MetricObject::Gaussian(g)
    }
}

impl From<SpdObject> for MetricObject {
    fn from(s: SpdObject) -> Self {
        MetricObject::Spd(s)
    }
}

impl From<LaplacianObject> for MetricObject {
    fn from(l: LaplacianObject) -> Self {
        MetricObject::Laplacian(l)
    }
}

impl From<SampledFunction> for MetricObject {
    fn from(f: SampledFunction) -> Self {
        MetricObject::Function(f)
    }
}

impl From<SlicedCloud> for MetricObject {
    fn from(c: SlicedCloud) -> Self {
        MetricObject::SlicedCloud(c)
    }
}

impl From<Vec<f64>> for MetricObject {
    fn from(v: Vec<f64>) -> Self {
        MetricObject::Euclidean(v)
    }
}
