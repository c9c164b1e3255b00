//! Nonlinear Fréchet regression: kernel weights, the empirical objective, and
//! prediction by weighted averaging followed by projection.

mod gcv;
mod glfr;

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{GramSystem, KernelSpec};
use crate::metric::{
    interp_linear, MetricObject, ObjectKind, QuantileObject, SampledFunction, SpdObject, FUNCTION_GRID_SIZE,
};
use crate::projections::{self, ProjectionConfig};

pub use gcv::{gcv_tune, gcv_tune_with_kernel, GcvRow, GcvTable};
pub use glfr::{glfr_weights, GLFR_CONDITION_LIMIT};

/// A prediction together with its projection diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub object: MetricObject,
    /// Negative weights were clipped (Gaussian barycenters only).
    pub clipped: bool,
}

/// Training sample plus its Gram system. Immutable once built.
#[derive(Debug, Clone)]
pub struct FittedModel {
    gram: GramSystem,
    responses: Vec<MetricObject>,
    projection: ProjectionConfig,
}

impl FittedModel {
    pub fn fit(
        predictors: Vec<MetricObject>,
        responses: Vec<MetricObject>,
        kernel: KernelSpec,
        epsilon: f64,
    ) -> Result<Self> {
        if predictors.len() != responses.len() {
            return Err(Error::InvalidArgument(format!(
                "{} predictors but {} responses",
                predictors.len(),
                responses.len()
            )));
        }
        let gram = GramSystem::build(predictors, kernel, epsilon)?;
        Self::from_gram(gram, responses)
    }

    pub fn from_gram(gram: GramSystem, responses: Vec<MetricObject>) -> Result<Self> {
        if gram.len() != responses.len() {
            return Err(Error::InvalidArgument(format!(
                "Gram system of size {} but {} responses",
                gram.len(),
                responses.len()
            )));
        }
        check_responses(&responses)?;
        Ok(FittedModel {
            gram,
            responses,
            projection: ProjectionConfig::default(),
        })
    }

    pub fn with_projection(mut self, cfg: ProjectionConfig) -> Result<Self> {
        cfg.validate()?;
        self.projection = cfg;
        Ok(self)
    }

    pub fn gram(&self) -> &GramSystem {
        &self.gram
    }

    pub fn responses(&self) -> &[MetricObject] {
        &self.responses
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn epsilon(&self) -> f64 {
        self.gram.epsilon()
    }

    pub fn kernel(&self) -> &KernelSpec {
        self.gram.kernel()
    }

    pub fn projection(&self) -> &ProjectionConfig {
        &self.projection
    }

    /// `c_x = Q (K + εI)⁻¹ d_x`
    fn coefficient(&self, x: &MetricObject) -> Result<DVector<f64>> {
        let (_, dx) = self.gram.cross_vector(x)?;
        Ok(crate::kernel::center(&self.gram.solve_k(&dx)))
    }

    /// `w_i = 1 + n [G (G + εI)⁻¹ c_x]_i`, so that `(1/n) Σ w_i d²(Y_i, y)`
    /// is the empirical objective at `x`.
    pub fn weights_at(&self, x: &MetricObject) -> Result<DVector<f64>> {
        let c = self.coefficient(x)?;
        let n = self.len() as f64;
        let centered = self.gram.g() * self.gram.solve_g(&c);
        Ok(centered.map(|v| 1.0 + n * v))
    }

    pub fn predict(&self, x: &MetricObject) -> Result<MetricObject> {
        Ok(self.predict_detailed(x)?.object)
    }

    pub fn predict_detailed(&self, x: &MetricObject) -> Result<Prediction> {
        let w = self.weights_at(x)?;
        weighted_prediction(&self.responses, w.as_slice(), &self.projection)
    }

    /// `J_n(y) = (1/n) Σ w_i d²(Y_i, y)`.
    pub fn objective_value(&self, x: &MetricObject, y: &MetricObject) -> Result<f64> {
        let w = self.weights_at(x)?;
        let h = self.squared_distances(y)?;
        Ok(w.dot(&h) / self.len() as f64)
    }

    /// `J_n(y) = (1/n) hᵀ1 + hᵀ G (G + εI)⁻¹ c_x`, evaluated with an LU solve
    /// instead of the cached Cholesky factor. Used to cross-check
    /// [`objective_value`](Self::objective_value).
    pub fn objective_value_matrix(&self, x: &MetricObject, y: &MetricObject) -> Result<f64> {
        let n = self.len();
        let h = self.squared_distances(y)?;
        let c = self.coefficient(x)?;
        let shifted = self.gram.g() + DMatrix::<f64>::identity(n, n) * self.epsilon();
        let solved = shifted
            .lu()
            .solve(&c)
            .ok_or_else(|| Error::Factorization("G + εI is singular".into()))?;
        Ok(h.sum() / n as f64 + h.dot(&(self.gram.g() * solved)))
    }

    fn squared_distances(&self, y: &MetricObject) -> Result<DVector<f64>> {
        let mut h = DVector::zeros(self.len());
        for (i, yi) in self.responses.iter().enumerate() {
            h[i] = yi.distance_sq(y)?;
        }
        Ok(h)
    }
}

fn check_responses(responses: &[MetricObject]) -> Result<()> {
    let first = responses
        .first()
        .ok_or_else(|| Error::DegenerateSample("no responses".into()))?;
    if first.kind() == ObjectKind::SlicedCloud {
        return Err(Error::InvalidArgument(
            "sliced point clouds are supported as predictors only".into(),
        ));
    }
    for (i, y) in responses.iter().enumerate().skip(1) {
        first.distance_sq(y).map_err(|e| e.in_subject(i))?;
    }
    Ok(())
}

/// Weighted average `(1/n) Σ w_i Y_i` in the responses' linear representation,
/// projected back onto the valid object set.
pub fn weighted_prediction(
    responses: &[MetricObject],
    weights: &[f64],
    cfg: &ProjectionConfig,
) -> Result<Prediction> {
    let n = responses.len();
    if n == 0 || weights.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{n} responses but {} weights",
            weights.len()
        )));
    }
    let scale = 1.0 / n as f64;
    let plain = |object| Ok(Prediction { object, clipped: false });
    match &responses[0] {
        MetricObject::Euclidean(first) => {
            let mut acc = alloc::vec![0.0; first.len()];
            for (y, &w) in responses.iter().zip(weights) {
                let MetricObject::Euclidean(v) = y else { return Err(mixed()) };
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += w * scale * b;
                }
            }
            plain(MetricObject::Euclidean(acc))
        }
        MetricObject::Quantile(first) => {
            let grid = first.grid().clone();
            let mut acc = alloc::vec![0.0; grid.len()];
            for (y, &w) in responses.iter().zip(weights) {
                let MetricObject::Quantile(q) = y else { return Err(mixed()) };
                for (a, b) in acc.iter_mut().zip(q.values()) {
                    *a += w * scale * b;
                }
            }
            let values = projections::project_monotone_weighted(&acc, grid.weights())?;
            plain(MetricObject::Quantile(QuantileObject::new(grid, values)?))
        }
        MetricObject::Gaussian(_) => {
            let measures = responses
                .iter()
                .map(|y| match y {
                    MetricObject::Gaussian(g) => Ok(g.clone()),
                    _ => Err(mixed()),
                })
                .collect::<Result<Vec<_>>>()?;
            let bary = projections::gaussian_barycenter(&measures, weights, cfg)?;
            Ok(Prediction {
                object: MetricObject::Gaussian(bary.measure),
                clipped: bary.clipped,
            })
        }
        MetricObject::Spd(first) => {
            let d = first.dim();
            let mut acc = DMatrix::<f64>::zeros(d, d);
            for (y, &w) in responses.iter().zip(weights) {
                let MetricObject::Spd(s) = y else { return Err(mixed()) };
                acc += s.mat() * (w * scale);
            }
            let projected = projections::project_psd(&acc, cfg.psd_floor)?;
            plain(MetricObject::Spd(SpdObject::new(projected)?))
        }
        MetricObject::Laplacian(first) => {
            let d = first.dim();
            let mut acc = DMatrix::<f64>::zeros(d, d);
            let mut bound = 0.0_f64;
            for (y, &w) in responses.iter().zip(weights) {
                let MetricObject::Laplacian(l) = y else { return Err(mixed()) };
                acc += l.mat() * (w * scale);
                bound = bound.max(l.bound());
            }
            plain(MetricObject::Laplacian(projections::project_laplacian(&acc, bound, cfg)?))
        }
        MetricObject::Function(_) => {
            let times: Vec<f64> = (0..FUNCTION_GRID_SIZE)
                .map(|k| k as f64 / (FUNCTION_GRID_SIZE - 1) as f64)
                .collect();
            let mut acc = alloc::vec![0.0; times.len()];
            for (y, &w) in responses.iter().zip(weights) {
                let MetricObject::Function(f) = y else { return Err(mixed()) };
                for (a, &t) in acc.iter_mut().zip(&times) {
                    *a += w * scale * interp_linear(f.times(), f.values(), t);
                }
            }
            plain(MetricObject::Function(SampledFunction::new(times, acc)?))
        }
        MetricObject::SlicedCloud(_) => Err(Error::InvalidArgument(
            "sliced point clouds are supported as predictors only".into(),
        )),
    }
}

fn mixed() -> Error {
    Error::Incompatible("responses of mixed kinds".into())
}
