//! Leave-one-out prediction and residual transport maps for 1-D distributional
//! responses.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{kernel_matrix, GramSystem, KernelSpec};
use crate::metric::{interp_linear, MetricObject, QuantileObject};
use crate::regression::{gcv_tune_with_kernel, FittedModel};

/// Number of response-domain abscissae at which transport maps are evaluated.
pub const TRANSPORT_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum EpsilonChoice {
    Fixed(f64),
    /// Re-tune on every fold over this grid.
    Gcv(Vec<f64>),
}

/// Outcome of one leave-one-out fold.
#[derive(Debug, Clone, PartialEq)]
pub struct LooFold {
    pub prediction: MetricObject,
    pub distance: f64,
    pub epsilon: f64,
}

/// Shared state for leave-one-out fits: the full kernel matrix is computed
/// once and each fold takes a sub-block. Folds are independent, so callers
/// may evaluate them in any order or in parallel.
#[derive(Debug, Clone)]
pub struct LooContext {
    predictors: Vec<MetricObject>,
    responses: Vec<MetricObject>,
    spec: KernelSpec,
    k: DMatrix<f64>,
    choice: EpsilonChoice,
}

impl LooContext {
    pub fn new(
        predictors: Vec<MetricObject>,
        responses: Vec<MetricObject>,
        spec: KernelSpec,
        choice: EpsilonChoice,
    ) -> Result<Self> {
        let n = predictors.len();
        if n < 3 {
            return Err(Error::DegenerateSample(format!("leave-one-out needs n >= 3, got {n}")));
        }
        if responses.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{n} predictors but {} responses",
                responses.len()
            )));
        }
        let k = kernel_matrix(&predictors, &spec)?;
        Ok(LooContext {
            predictors,
            responses,
            spec,
            k,
            choice,
        })
    }

    pub fn len(&self) -> usize {
        self.predictors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictors.is_empty()
    }

    pub fn responses(&self) -> &[MetricObject] {
        &self.responses
    }

    /// Fits on every pair but the `i`-th and predicts at `X_i`.
    pub fn fold(&self, i: usize) -> Result<LooFold> {
        self.fold_inner(i).map_err(|e| e.in_subject(i))
    }

    fn fold_inner(&self, i: usize) -> Result<LooFold> {
        let n = self.len();
        if i >= n {
            return Err(Error::InvalidArgument(format!("subject {i} out of range for n = {n}")));
        }
        let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let sub_k = self.k.select_rows(&keep).select_columns(&keep);
        let xs: Vec<MetricObject> = keep.iter().map(|&j| self.predictors[j].clone()).collect();
        let ys: Vec<MetricObject> = keep.iter().map(|&j| self.responses[j].clone()).collect();
        let epsilon = match &self.choice {
            EpsilonChoice::Fixed(e) => *e,
            EpsilonChoice::Gcv(grid) => gcv_tune_with_kernel(&xs, &ys, self.spec, sub_k.clone(), grid)?.0,
        };
        let gram = GramSystem::from_kernel_matrix(xs, self.spec, sub_k, epsilon)?;
        let model = FittedModel::from_gram(gram, ys)?;
        let prediction = model.predict(&self.predictors[i])?;
        let distance = self.responses[i].distance(&prediction)?;
        Ok(LooFold {
            prediction,
            distance,
            epsilon,
        })
    }
}

/// Runs every fold in subject order.
pub fn loo_predict(
    predictors: Vec<MetricObject>,
    responses: Vec<MetricObject>,
    spec: KernelSpec,
    choice: EpsilonChoice,
) -> Result<Vec<LooFold>> {
    let ctx = LooContext::new(predictors, responses, spec, choice)?;
    (0..ctx.len()).map(|i| ctx.fold(i)).collect()
}

/// Monotone 1-D map sampled at increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportMap {
    abscissae: Vec<f64>,
    values: Vec<f64>,
}

impl TransportMap {
    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mean of `|T(a) − a|` over the abscissae.
    pub fn mean_abs_displacement(&self) -> f64 {
        let total: f64 = self.abscissae.iter().zip(&self.values).map(|(a, t)| (t - a).abs()).sum();
        total / self.abscissae.len() as f64
    }
}

/// `count` equispaced points spanning the pooled range of the quantile
/// objects.
pub fn transport_abscissae(objects: &[&QuantileObject], count: usize) -> Result<Vec<f64>> {
    if objects.is_empty() || count < 2 {
        return Err(Error::InvalidArgument("need objects and at least 2 abscissae".into()));
    }
    let lo = objects.iter().map(|q| q.values()[0]).fold(f64::INFINITY, f64::min);
    let hi = objects
        .iter()
        .map(|q| q.values()[q.values().len() - 1])
        .fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::DegenerateSample("pooled response range is a single point".into()));
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

/// Optimal transport map `T = Q_fitted ∘ F_observed` from the observed law to
/// the fitted one, evaluated at `abscissae`.
///
/// `F_observed` inverts the observed quantile vector by linear interpolation,
/// taking the left end of flat segments. Outside the observed support the map
/// continues with the displacement it has at the nearer end.
pub fn residual_map(observed: &QuantileObject, fitted: &QuantileObject, abscissae: &[f64]) -> Result<TransportMap> {
    if !observed.grid().same_as(fitted.grid()) {
        return Err(Error::Incompatible("observed and fitted quantiles use different grids".into()));
    }
    if abscissae.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("abscissae must be strictly increasing".into()));
    }
    let u = observed.grid().points();
    let q = observed.values();
    let m = q.len();
    let (q_lo, q_hi) = (q[0], q[m - 1]);
    let values = abscissae
        .iter()
        .map(|&a| {
            if a <= q_lo {
                a + fitted.values()[0] - q_lo
            } else if a >= q_hi {
                a + fitted.values()[m - 1] - q_hi
            } else {
                fitted.eval(observed_cdf(u, q, a))
            }
        })
        .collect();
    Ok(TransportMap {
        abscissae: abscissae.to_vec(),
        values,
    })
}

/// Left-continuous inverse of the piecewise-linear quantile function, for
/// `a` strictly inside `(q[0], q[m−1])`.
fn observed_cdf(u: &[f64], q: &[f64], a: f64) -> f64 {
    let j = q.partition_point(|&v| v < a);
    // q[j−1] < a ≤ q[j]
    let (q0, q1) = (q[j - 1], q[j]);
    u[j - 1] + (u[j] - u[j - 1]) * (a - q0) / (q1 - q0)
}

/// Pointwise average of maps sharing the same abscissae.
pub fn mean_map(maps: &[TransportMap]) -> Result<TransportMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::InvalidArgument("no transport maps to average".into()))?;
    if maps.iter().any(|m| m.abscissae != first.abscissae) {
        return Err(Error::Incompatible("transport maps use different abscissae".into()));
    }
    let k = maps.len() as f64;
    let values = (0..first.abscissae.len())
        .map(|j| maps.iter().map(|m| m.values[j]).sum::<f64>() / k)
        .collect();
    Ok(TransportMap {
        abscissae: first.abscissae.clone(),
        values,
    })
}

/// Linear interpolation of a map at an arbitrary point (flat outside).
pub fn eval_map(map: &TransportMap, a: f64) -> f64 {
    interp_linear(&map.abscissae, &map.values, a)
}
