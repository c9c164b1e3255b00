//! Seeded simulation models and the train/test replication harness.
//!
//! Replicate `b` of a scenario draws from a ChaCha8 generator seeded with the
//! scenario seed and switched to stream `b`, so replicates are independent of
//! evaluation order.

mod models;
mod sampling;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{bandwidth_heuristic, KernelSpec, EPSILON_GRID};
use crate::metric::{sliced_wasserstein2_gaussian, MetricObject, DEFAULT_GRID_SIZE};
use crate::projections::ProjectionConfig;
use crate::regression::{gcv_tune, glfr_weights, weighted_prediction, FittedModel};

pub use models::{
    draw_i1_parameters, eigen_frame, gen_model_i1, gen_model_i2, gen_model_i8, gen_model_iii, gen_model_iv1,
    gen_models_i3_to_i5, gen_models_i6_i7_ii, i7_mean_sd, i8_eigenfunction, i8_mean_function, rank_scores,
    reference_gaussians, sample_covariance, transport_map, Sample, SpdLaw, BETA, GAMMA, I8_DENSE_POINTS,
    NU1_SQ, NU2, TGAMMA_RANGE,
};
pub use sampling::{gen_euclidean_x, truncated_gamma_mean_sqrt, TruncatedGamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelId {
    I1,
    I2,
    I3,
    I4,
    I5,
    I6,
    I7,
    I8Dense,
    I8Sparse,
    II1,
    II2,
    III1,
    III2,
    IV1,
}

impl ModelId {
    pub const ALL: [ModelId; 14] = [
        ModelId::I1,
        ModelId::I2,
        ModelId::I3,
        ModelId::I4,
        ModelId::I5,
        ModelId::I6,
        ModelId::I7,
        ModelId::I8Dense,
        ModelId::I8Sparse,
        ModelId::II1,
        ModelId::II2,
        ModelId::III1,
        ModelId::III2,
        ModelId::IV1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::I1 => "I1",
            ModelId::I2 => "I2",
            ModelId::I3 => "I3",
            ModelId::I4 => "I4",
            ModelId::I5 => "I5",
            ModelId::I6 => "I6",
            ModelId::I7 => "I7",
            ModelId::I8Dense => "I8dense",
            ModelId::I8Sparse => "I8sparse",
            ModelId::II1 => "II1",
            ModelId::II2 => "II2",
            ModelId::III1 => "III1",
            ModelId::III2 => "III2",
            ModelId::IV1 => "IV1",
        }
    }

    /// Models whose predictors are plain vectors (the only ones GLFR accepts).
    pub fn has_euclidean_predictors(self) -> bool {
        matches!(self, ModelId::I1 | ModelId::I2 | ModelId::III1 | ModelId::IV1)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model id '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Kernel weights, Gaussian RBF with the bandwidth heuristic, GCV-tuned ε.
    Gnlfr,
    /// Global linear weights; Euclidean predictors only.
    Glfr,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Gnlfr => "gnlfr",
            Method::Glfr => "glfr",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gnlfr" => Ok(Method::Gnlfr),
            "glfr" => Ok(Method::Glfr),
            _ => Err(Error::InvalidArgument(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub model_id: ModelId,
    /// Total sample size, split in halves for training and testing.
    pub n: usize,
    /// Observations per distributional object.
    pub m: usize,
    pub p: usize,
    pub r: usize,
    pub seed: u64,
    pub replicates: usize,
    pub mc_directions: usize,
    pub grid_size: usize,
    pub method: Method,
}

impl ScenarioSpec {
    pub fn new(model: ModelId) -> Self {
        ScenarioSpec {
            model_id: model,
            n: 200,
            m: 50,
            p: if model == ModelId::III2 { 5 } else { 4 },
            r: 3,
            seed: 1,
            replicates: 20,
            mc_directions: 50,
            grid_size: DEFAULT_GRID_SIZE,
            method: Method::Gnlfr,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n < 4 || self.n % 2 != 0 {
            return bad(format!("n must be even and at least 4, got {}", self.n));
        }
        if self.m < 1 || self.p < 1 || self.r < 1 || self.replicates < 1 || self.mc_directions < 1 {
            return bad("m, p, r, replicates and mc_directions must all be at least 1".into());
        }
        if self.grid_size < 2 {
            return bad(format!("grid_size must be at least 2, got {}", self.grid_size));
        }
        use ModelId::*;
        match self.model_id {
            I1 | I2 if self.p < 4 => return bad(format!("{} needs p >= 4", self.model_id)),
            I3 | I4 | I5 | I6 | I7 | II1 | II2 if self.m < 10 => {
                return bad(format!("{} needs m >= 10", self.model_id))
            }
            III1 | III2 | IV1 if self.r < 2 => return bad(format!("{} needs r >= 2", self.model_id)),
            III2 if self.m < 2 => return bad("III2 needs m >= 2 draws per covariance".into()),
            _ => {}
        }
        if self.method == Method::Glfr && !self.model_id.has_euclidean_predictors() {
            return bad(format!("GLFR needs Euclidean predictors; {} has none", self.model_id));
        }
        Ok(())
    }
}

/// Generator of replicate `b`.
pub fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Draws one data set of `spec.n` subjects.
pub fn generate<R: rand::Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Sample> {
    spec.validate()?;
    use ModelId::*;
    match spec.model_id {
        I1 => gen_model_i1(spec, rng),
        I2 => gen_model_i2(spec, rng),
        I3 | I4 | I5 => gen_models_i3_to_i5(spec, rng),
        I6 | I7 | II1 | II2 => gen_models_i6_i7_ii(spec, rng),
        I8Dense | I8Sparse => gen_model_i8(spec, rng),
        III1 | III2 => gen_model_iii(spec, rng),
        IV1 => gen_model_iv1(spec, rng),
    }
}

/// Result of one train/test replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    /// Mean response-space distance between test predictions and the true
    /// conditional Fréchet means.
    pub error: f64,
    /// Regularization chosen by GCV (NaN for GLFR).
    pub epsilon: f64,
    pub ridged: usize,
    /// Test predictions whose barycenter weights needed clipping.
    pub clipped: usize,
}

/// Generates replicate `b`, fits on the first half, and scores predictions on
/// the second half against the true conditional means.
pub fn run_replicate(spec: &ScenarioSpec, replicate: usize) -> Result<ReplicateOutcome> {
    run_replicate_inner(spec, replicate).map_err(|e| e.in_replicate(replicate))
}

fn run_replicate_inner(spec: &ScenarioSpec, replicate: usize) -> Result<ReplicateOutcome> {
    let mut rng = replicate_rng(spec.seed, replicate);
    let sample = generate(spec, &mut rng)?;
    let half = spec.n / 2;
    let (train_x, test_x) = sample.predictors.split_at(half);
    let train_y = &sample.responses[..half];
    let test_truth = &sample.truths[half..];

    let (predictions, epsilon) = match spec.method {
        Method::Gnlfr => {
            let kernel = KernelSpec::gaussian(bandwidth_heuristic(train_x)?)?;
            let (epsilon, _) = gcv_tune(train_x, train_y, kernel, &EPSILON_GRID)?;
            let model = FittedModel::fit(train_x.to_vec(), train_y.to_vec(), kernel, epsilon)?;
            let preds = test_x
                .iter()
                .map(|x| model.predict_detailed(x))
                .collect::<Result<Vec<_>>>()?;
            (preds, epsilon)
        }
        Method::Glfr => {
            let design = euclidean_design(train_x)?;
            let cfg = ProjectionConfig::default();
            let preds = test_x
                .iter()
                .map(|x| {
                    let MetricObject::Euclidean(v) = x else {
                        return Err(Error::InvalidArgument("GLFR needs Euclidean predictors".into()));
                    };
                    let w = glfr_weights(&design, v)?;
                    weighted_prediction(train_y, w.as_slice(), &cfg)
                })
                .collect::<Result<Vec<_>>>()?;
            (preds, f64::NAN)
        }
    };

    let mut total = 0.0;
    for (pred, truth) in predictions.iter().zip(test_truth) {
        total += response_error(&pred.object, truth, &sample)?;
    }
    Ok(ReplicateOutcome {
        error: total / test_truth.len() as f64,
        epsilon,
        ridged: sample.ridged,
        clipped: predictions.iter().filter(|p| p.clipped).count(),
    })
}

fn euclidean_design(xs: &[MetricObject]) -> Result<DMatrix<f64>> {
    let rows: Vec<&Vec<f64>> = xs
        .iter()
        .map(|x| match x {
            MetricObject::Euclidean(v) => Ok(v),
            _ => Err(Error::InvalidArgument("GLFR needs Euclidean predictors".into())),
        })
        .collect::<Result<_>>()?;
    let p = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]))
}

/// Native response distance; Gaussian responses are compared by sliced W2
/// over the sample's direction set.
fn response_error(pred: &MetricObject, truth: &MetricObject, sample: &Sample) -> Result<f64> {
    match (pred, truth, &sample.directions) {
        (MetricObject::Gaussian(a), MetricObject::Gaussian(b), Some(dirs)) => sliced_wasserstein2_gaussian(a, b, dirs),
        _ => pred.distance(truth),
    }
}

/// Per-replicate errors with their mean and standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct MpeReport {
    pub errors: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over `√B`; zero for a single replicate.
    pub stderr: f64,
}

impl MpeReport {
    pub fn from_errors(errors: Vec<f64>) -> Result<Self> {
        let b = errors.len();
        if b == 0 {
            return Err(Error::InvalidArgument("no replicate errors".into()));
        }
        let mean = errors.iter().sum::<f64>() / b as f64;
        let stderr = if b > 1 {
            let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (b - 1) as f64;
            (var / b as f64).sqrt()
        } else {
            0.0
        };
        Ok(MpeReport { errors, mean, stderr })
    }
}

/// Runs every replicate in order.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<MpeReport> {
    spec.validate()?;
    let errors = (0..spec.replicates)
        .map(|b| run_replicate(spec, b).map(|o| o.error))
        .collect::<Result<Vec<_>>>()?;
    MpeReport::from_errors(errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_names_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(m.name().parse::<ModelId>().unwrap(), m);
        }
        assert!("I9".parse::<ModelId>().is_err());
    }

    #[test]
    fn smoke_run_is_finite() {
        let mut spec = ScenarioSpec::new(ModelId::I1);
        spec.n = 4;
        spec.replicates = 1;
        let report = run_scenario(&spec).unwrap();
        assert!(report.mean.is_finite());
        assert_eq!(report.stderr, 0.0);
    }

    #[test]
    fn glfr_rejects_non_euclidean_models() {
        let mut spec = ScenarioSpec::new(ModelId::I3);
        spec.method = Method::Glfr;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn report_statistics() {
        let r = MpeReport::from_errors(alloc::vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.mean, 2.0);
        assert!((r.stderr - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
