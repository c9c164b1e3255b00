//! Data-generating mechanisms of the simulation models.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::metric::{
    beta_quantile_object, empirical_quantiles, hellinger_beta, wasserstein2_gaussian, wasserstein2_quantile_sq,
    DirectionSet, GaussianMeasure, LaplacianObject, MetricObject, ProbGrid, QuantileObject, SampledFunction,
    SlicedCloud, SpdObject,
};
use crate::projections::vech_inverse;
use crate::simgen::sampling::{
    beta, gamma, gen_euclidean_x, normal, normal_draws, uniform_open, TruncatedGamma,
};
use crate::simgen::{ModelId, ScenarioSpec};

pub const BETA: [f64; 4] = [1.0, -2.0, 0.0, 1.0];
pub const GAMMA: [f64; 4] = [0.1, 0.2, 1.0, 0.3];
/// Variance of the random response mean.
pub const NU1_SQ: f64 = 0.1;
pub const NU2: f64 = 0.25;
/// Response standard deviation where it is fixed.
pub const FIXED_SD: f64 = 0.1;
pub const TGAMMA_RANGE: (f64, f64) = (0.2, 2.0);
pub const I8_EIGENVALUES: [f64; 2] = [1.0, 0.7];
pub const I8_NOISE_VAR: f64 = 0.1;
pub const I8_DENSE_POINTS: usize = 50;
/// Eigenvalue floor applied to `Σ(x)` before inversion in the SPD models.
pub const SPD_RIDGE: f64 = 1e-10;

/// One generated data set: predictors, observed responses, and the true
/// conditional Fréchet means the responses scatter around.
#[derive(Debug, Clone)]
pub struct Sample {
    pub predictors: Vec<MetricObject>,
    pub responses: Vec<MetricObject>,
    pub truths: Vec<MetricObject>,
    /// Directions shared by sliced predictors and used for sliced response
    /// errors.
    pub directions: Option<Arc<DirectionSet>>,
    /// Number of covariance estimates or `Σ(x)` that needed a ridge.
    pub ridged: usize,
}

impl Sample {
    fn with_capacity(n: usize) -> Self {
        Sample {
            predictors: Vec::with_capacity(n),
            responses: Vec::with_capacity(n),
            truths: Vec::with_capacity(n),
            directions: None,
            ridged: 0,
        }
    }

    fn push(&mut self, x: MetricObject, y: MetricObject, truth: MetricObject) {
        self.predictors.push(x);
        self.responses.push(y);
        self.truths.push(truth);
    }

    pub fn len(&self) -> usize {
        self.predictors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictors.is_empty()
    }
}

fn dot4(coef: &[f64; 4], row: &[f64]) -> f64 {
    coef.iter().zip(row).map(|(a, b)| a * b).sum()
}

/// `T_k(x) = x − sin(kx)/|k|`
pub fn transport_map(k: i32, x: f64) -> f64 {
    let kf = k as f64;
    x - (kf * x).sin() / kf.abs()
}

/// Mean and standard deviation of the response law in Models I.1–I.2:
/// `μ ~ N((βᵀx)², ν₁²)`, `σ ~ Gamma(shape (γᵀx)²/ν₂, scale ν₂/|γᵀx|)`.
pub fn draw_i1_parameters<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> Result<(f64, f64)> {
    let bx = dot4(&BETA, row);
    let gx = dot4(&GAMMA, row);
    let mu = normal(rng, bx * bx, NU1_SQ.sqrt())?;
    let sigma = gamma(rng, gx * gx / NU2, NU2 / gx.abs())?;
    Ok((mu, sigma))
}

/// Models I.1 and I.2: Euclidean predictors, Gaussian (I.1) or randomly
/// transported Gaussian (I.2) responses.
pub fn gen_model_i1<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Sample> {
    gen_euclidean_distributional(spec, rng, false)
}

pub fn gen_model_i2<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Sample> {
    gen_euclidean_distributional(spec, rng, true)
}

fn gen_euclidean_distributional<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R, transport: bool) -> Result<Sample> {
    let grid = ProbGrid::equispaced(spec.grid_size)?;
    let mut sample = Sample::with_capacity(spec.n);
    for _ in 0..spec.n {
        let row: Vec<f64> = loop {
            let x = gen_euclidean_x(1, spec.p, rng);
            let row: Vec<f64> = x.iter().copied().collect();
            if dot4(&GAMMA, &row) != 0.0 {
                break row;
            }
        };
        let (mu, sigma) = draw_i1_parameters(&row, rng)?;
        let mut draws = normal_draws(rng, mu, sigma, spec.m);
        if transport {
            let k = [-2, -1, 1, 2][rng.random_range(0..4)];
            for d in draws.iter_mut() {
                *d = transport_map(k, *d);
            }
        }
        let bx = dot4(&BETA, &row);
        let gx = dot4(&GAMMA, &row);
        let truth = QuantileObject::normal(&grid, bx * bx, gx.abs())?;
        sample.push(
            MetricObject::Euclidean(row),
            empirical_quantiles(&draws, &grid)?.into(),
            truth.into(),
        );
    }
    Ok(sample)
}

/// Models I.3–I.5: predictors are Beta(a, b) laws observed through `m` draws,
/// with `a ~ Gamma(2, rate 1)` and `b ~ Gamma(2, rate 3)`. Distances to the
/// reference laws use the latent Beta parameters.
pub fn gen_models_i3_to_i5<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Sample> {
    let grid = ProbGrid::equispaced(spec.grid_size)?;
    let mu1 = beta_quantile_object(&grid, 2.0, 1.0)?;
    let mu2 = beta_quantile_object(&grid, 2.0, 3.0)?;
    let mut sample = Sample::with_capacity(spec.n);
    for _ in 0..spec.n {
        let a = gamma(rng, 2.0, 1.0)?;
        let b = gamma(rng, 2.0, 1.0 / 3.0)?;
        let xs: Vec<f64> = (0..spec.m).map(|_| beta(rng, a, b)).collect::<Result<_>>()?;
        let predictor = empirical_quantiles(&xs, &grid)?;
        let (mean, sd, mu, sigma) = match spec.model_id {
            ModelId::I3 => {
                let latent = beta_quantile_object(&grid, a, b)?;
                let mean = wasserstein2_quantile_sq(&latent, &mu1)?.exp() + wasserstein2_quantile_sq(&latent, &mu2)?.exp();
                (mean, FIXED_SD, normal(rng, mean, NU1_SQ.sqrt())?, FIXED_SD)
            }
            ModelId::I4 => {
                let latent = beta_quantile_object(&grid, a, b)?;
                let mean = wasserstein2_quantile_sq(&latent, &mu1)?.exp();
                let w2 = wasserstein2_quantile_sq(&latent, &mu2)?.sqrt();
                let mu = normal(rng, mean, NU1_SQ.sqrt())?;
                // Gamma(shape W², rate W) has mean W
                (mean, w2, mu, gamma(rng, w2 * w2, 1.0 / w2)?)
            }
            ModelId::I5 => {
                let mean = hellinger_beta(a, b, 2.0, 1.0)?.exp();
                let sd = hellinger_beta(a, b, 2.0, 3.0)?.exp();
                (mean, sd, normal(rng, mean, 0.2)?, sd)
            }
            other => return Err(Error::InvalidArgument(format!("{other} is not a Beta-predictor model"))),
        };
        let draws = normal_draws(rng, mu, sigma, spec.m);
        sample.push(
            predictor.into(),
            empirical_quantiles(&draws, &grid)?.into(),
            QuantileObject::normal(&grid, mean, sd)?.into(),
        );
    }
    Ok(sample)
}

pub fn reference_gaussians() -> (GaussianMeasure, GaussianMeasure) {
    let mu1 = GaussianMeasure::new(
        DVector::from_column_slice(&[-1.0, 0.0]),
        DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 0.5])),
    )
    .expect("valid reference law");
    let mu2 = GaussianMeasure::new(
        DVector::from_column_slice(&[0.0, 1.0]),
        DMatrix::from_diagonal(&DVector::from_column_slice(&[0.5, 1.0])),
    )
    .expect("valid reference law");
    (mu1, mu2)
}

/// Eigenframe of the Model II.2 response covariance.
pub fn eigen_frame() -> DMatrix<f64> {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[s, s, -s, s])
}

/// `E|τ₁ᵀΛτ₂|` in Model I.7: `(λ₁ − λ₂)/2 ~ N(0, 1/8)`.
pub fn i7_mean_sd() -> f64 {
    (0.125_f64).sqrt() * (2.0 / core::f64::consts::PI).sqrt()
}

/// Models I.6, I.7, II.1, II.2: predictors are clouds of `m` points from
/// `N(a(1,1)ᵀ, b I₂)` with `a ~ N(0.5, 0.5²)`, `b ~ Beta(2, 3)`, embedded by
/// slicing on `spec.mc_directions` shared directions. Distances to the
/// reference laws use the Gaussian fitted to each cloud.
pub fn gen_models_i6_i7_ii<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Sample> {
    let grid = ProbGrid::equispaced(spec.grid_size)?;
    let (mu1, mu2) = reference_gaussians();
    let directions = Arc::new(DirectionSet::draw(2, spec.mc_directions, rng)?);
    let frame = eigen_frame();
    let mut sample = Sample::with_capacity(spec.n);
    for _ in 0..spec.n {
        let a = normal(rng, 0.5, 0.5)?;
        let b = beta(rng, 2.0, 3.0)?;
        let sb = b.sqrt();
        let cloud = DMatrix::from_fn(spec.m, 2, |_, _| {
            let z: f64 = rng.sample(StandardNormal);
            a + sb * z
        });
        let (fitted, ridged) = GaussianMeasure::fit(&cloud)?;
        sample.ridged += ridged as usize;
        let w1 = wasserstein2_gaussian(&fitted, &mu1)?;
        let w2 = wasserstein2_gaussian(&fitted, &mu2)?;
        let predictor: MetricObject = SlicedCloud::new(&cloud, directions.clone())?.into();
        let (response, truth): (MetricObject, MetricObject) = match spec.model_id {
            ModelId::I6 => {
                let mean = w1.exp();
                let mu = normal(rng, mean, NU1_SQ.sqrt())?;
                let draws = normal_draws(rng, mu, FIXED_SD, spec.m);
                (
                    empirical_quantiles(&draws, &grid)?.into(),
                    QuantileObject::normal(&grid, mean, FIXED_SD)?.into(),
                )
            }
            ModelId::I7 => {
                let mean = w1.exp();
                let mu = normal(rng, mean, NU1_SQ.sqrt())?;
                let l1 = normal(rng, w2, 0.5)?;
                let l2 = normal(rng, w2, 0.5)?;
                let sigma = (0.5 * (l1 - l2)).abs();
                let draws = normal_draws(rng, mu, sigma, spec.m);
                (
                    empirical_quantiles(&draws, &grid)?.into(),
                    QuantileObject::normal(&grid, mean, i7_mean_sd())?.into(),
                )
            }
            ModelId::II1 | ModelId::II2 => {
                let center = DVector::from_column_slice(&[w1, w1]);
                let mean = DVector::from_column_slice(&[normal(rng, w1, 1.0)?, normal(rng, w1, 1.0)?]);
                let (cov, truth_cov) = if spec.model_id == ModelId::II1 {
                    (DMatrix::identity(2, 2), DMatrix::identity(2, 2))
                } else {
                    let t = TruncatedGamma::new(w2 * w2, w2, TGAMMA_RANGE.0, TGAMMA_RANGE.1)?;
                    let lambda = DVector::from_column_slice(&[t.sample(rng), t.sample(rng)]);
                    let root = t.mean_sqrt();
                    let truth_lambda = DVector::from_element(2, root * root);
                    (
                        linalg::symmetrize(&(&frame * DMatrix::from_diagonal(&lambda) * frame.transpose())),
                        linalg::symmetrize(&(&frame * DMatrix::from_diagonal(&truth_lambda) * frame.transpose())),
                    )
                };
                (
                    GaussianMeasure::new(mean, cov)?.into(),
                    GaussianMeasure::new(center, truth_cov)?.into(),
                )
            }
            other => return Err(Error::InvalidArgument(format!("{other} is not a Gaussian-cloud model"))),
        };
        sample.push(predictor, response, truth);
    }
    sample.directions = Some(directions);
    Ok(sample)
}

/// `φ_k(s)`: `√2 sin(2πs)` for `k = 1`, `√2 cos(2πs)` for `k = 2`.
pub fn i8_eigenfunction(k: usize, s: f64) -> f64 {
    let arg = 2.0 * core::f64::consts::PI * s;
    let root2 = core::f64::consts::SQRT_2;
    match k {
        1 => root2 * arg.sin(),
        2 => root2 * arg.cos(),
        _ => 0.0,
    }
}

pub fn i8_mean_function(s: f64) -> f64 {
    s + s.sin()
}

/// Model I.8: noisy trajectories from a two-term Karhunen–Loève expansion,
/// observed at 50 (dense) or 3–5 (sparse) uniform times.
pub fn gen_model_i8<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Sample> {
    let grid = ProbGrid::equispaced(spec.grid_size)?;
    let noise = I8_NOISE_VAR.sqrt();
    let mut sample = Sample::with_capacity(spec.n);
    for _ in 0..spec.n {
        let xi1 = normal(rng, 0.0, I8_EIGENVALUES[0].sqrt())?;
        let xi2 = normal(rng, 0.0, I8_EIGENVALUES[1].sqrt())?;
        let count = match spec.model_id {
            ModelId::I8Dense => I8_DENSE_POINTS,
            _ => rng.random_range(3..=5),
        };
        let times = loop {
            let mut t: Vec<f64> = (0..count).map(|_| rng.random::<f64>()).collect();
            t.sort_by(f64::total_cmp);
            if t.windows(2).all(|w| w[1] > w[0]) {
                break t;
            }
        };
        let values: Vec<f64> = times
            .iter()
            .map(|&s| {
                let eps: f64 = rng.sample(StandardNormal);
                i8_mean_function(s) + xi1 * i8_eigenfunction(1, s) + xi2 * i8_eigenfunction(2, s) + noise * eps
            })
            .collect();
        let mean = I8_EIGENVALUES[0] * xi1 - I8_EIGENVALUES[1] * xi2;
        let mu = normal(rng, mean, NU1_SQ.sqrt())?;
        let draws = normal_draws(rng, mu, FIXED_SD, spec.m);
        sample.push(
            SampledFunction::new(times, values)?.into(),
            empirical_quantiles(&draws, &grid)?.into(),
            QuantileObject::normal(&grid, mean, FIXED_SD)?.into(),
        );
    }
    Ok(sample)
}

/// Replicate-level parameters of the SPD response law
/// `Ỹ | x = μ(x) + Σ(x)^{-1/2} Z`, `Y = ỸỸᵀ`.
#[derive(Debug, Clone)]
pub struct SpdLaw {
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub s: DMatrix<f64>,
    pub theta: DMatrix<f64>,
}

impl SpdLaw {
    /// `b_j ~ U(2,4)`, `c_j ~ U(0,1)`, `S = (A + Aᵀ)/2` with `A_ij ~ N(0, 0.5)`
    /// (variance), `θ = (V + Vᵀ)/2` with `V_ij ~ U(0, 0.5)`.
    pub fn draw<R: Rng + ?Sized>(r: usize, rng: &mut R) -> Self {
        let b = DVector::from_fn(r, |_, _| 2.0 + 2.0 * rng.random::<f64>());
        let c = DVector::from_fn(r, |_, _| rng.random::<f64>());
        let sd = 0.5_f64.sqrt();
        let a = DMatrix::from_fn(r, r, |_, _| sd * rng.sample::<f64, _>(StandardNormal));
        let v = DMatrix::from_fn(r, r, |_, _| 0.5 * rng.random::<f64>());
        SpdLaw {
            b,
            c,
            s: (&a + a.transpose()) * 0.5,
            theta: (&v + v.transpose()) * 0.5,
        }
    }

    /// `μ_j(x) = b_j − 2(x − c_j)²`
    pub fn mean(&self, x: f64) -> DVector<f64> {
        DVector::from_fn(self.b.len(), |j, _| self.b[j] - 2.0 * (x - self.c[j]) * (x - self.c[j]))
    }

    /// `Σ(x) = (x + 2x³) Exp[S ⊙ sin(2πθ(x + 0.1))]`
    pub fn sigma(&self, x: f64) -> DMatrix<f64> {
        let two_pi = 2.0 * core::f64::consts::PI;
        let inner = self.s.zip_map(&self.theta, |s, t| s * (two_pi * t * (x + 0.1)).sin());
        linalg::expm_sym(&inner) * (x + 2.0 * x * x * x)
    }

    /// One response draw and the conditional mean `μμᵀ + Σ⁻¹`; the flag
    /// reports that `Σ(x)` needed the eigenvalue floor.
    pub fn draw_response<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> (DMatrix<f64>, DMatrix<f64>, bool) {
        let r = self.b.len();
        let sigma = self.sigma(x);
        let ridged = linalg::min_eigenvalue(&sigma) < SPD_RIDGE;
        let inv_root = linalg::inv_sqrtm(&sigma, SPD_RIDGE);
        let inverse = linalg::sym_apply(&sigma, |l| 1.0 / l.max(SPD_RIDGE));
        let mu = self.mean(x);
        let z = DVector::from_fn(r, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = &mu + inv_root * z;
        let response = linalg::symmetrize(&(&y * y.transpose()));
        let truth = linalg::symmetrize(&(&mu * mu.transpose() + inverse));
        (response, truth, ridged)
    }
}

/// Models III.1 (scalar `X ~ Beta(1/2, 2)`) and III.2 (sample-covariance
/// predictors, conditioning on the rank-standardized `βᵀXβ`).
pub fn gen_model_iii<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Sample> {
    let law = SpdLaw::draw(spec.r, rng);
    let mut sample = Sample::with_capacity(spec.n);
    let (predictors, scalars): (Vec<MetricObject>, Vec<f64>) = match spec.model_id {
        ModelId::III1 => {
            let xs: Vec<f64> = (0..spec.n).map(|_| beta(rng, 0.5, 2.0)).collect::<Result<_>>()?;
            (xs.iter().map(|&x| MetricObject::scalar(x)).collect(), xs)
        }
        ModelId::III2 => {
            let p = spec.p;
            let dir = DVector::from_fn(p, |_, _| rng.random::<f64>());
            let mut mats = Vec::with_capacity(spec.n);
            let mut proj = Vec::with_capacity(spec.n);
            for _ in 0..spec.n {
                let draws = DMatrix::from_fn(spec.m, p, |_, _| rng.sample::<f64, _>(StandardNormal));
                let cov = sample_covariance(&draws);
                proj.push(dir.dot(&(&cov * &dir)));
                mats.push(MetricObject::Spd(SpdObject::new(cov)?));
            }
            (mats, rank_scores(&proj))
        }
        other => return Err(Error::InvalidArgument(format!("{other} is not an SPD model"))),
    };
    for (x, &s) in predictors.into_iter().zip(&scalars) {
        let (y, truth, ridged) = law.draw_response(s, rng);
        sample.ridged += ridged as usize;
        sample.push(x, SpdObject::new(y)?.into(), SpdObject::new(truth)?.into());
    }
    Ok(sample)
}

/// Unbiased sample covariance of the rows.
pub fn sample_covariance(points: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, d) = points.shape();
    let mean = points.row_mean();
    let centered = DMatrix::from_fn(m, d, |i, j| points[(i, j)] - mean[j]);
    linalg::symmetrize(&(centered.transpose() * &centered / (m.max(2) - 1) as f64))
}

/// Empirical-CDF standardization `rank/(n + 1)`, ranks from 1.
pub fn rank_scores(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = alloc::vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = (rank + 1) as f64 / (n + 1) as f64;
    }
    out
}

/// Model IV.1: `X ~ U(0,1)`, `L = vech⁻¹(−β)` with `β_j ~ Beta(X, 1 − X)`.
pub fn gen_model_iv1<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<Sample> {
    let d = spec.r * (spec.r - 1) / 2;
    let mut sample = Sample::with_capacity(spec.n);
    for _ in 0..spec.n {
        let x = uniform_open(rng, 0.0, 1.0);
        let edges: Vec<f64> = (0..d).map(|_| beta(rng, x, 1.0 - x).map(|b| -b)).collect::<Result<_>>()?;
        let l = LaplacianObject::new(vech_inverse(&edges)?, 1.0)?;
        let truth = LaplacianObject::new(vech_inverse(&alloc::vec![-x; d])?, 1.0)?;
        sample.push(MetricObject::scalar(x), l.into(), truth.into());
    }
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transport_maps_are_monotone() {
        for k in [-2, -1, 1, 2] {
            let mut prev = f64::NEG_INFINITY;
            for j in 0..2001 {
                let x = -10.0 + j as f64 * 0.01;
                let t = transport_map(k, x);
                assert!(t >= prev);
                prev = t;
            }
        }
        assert_eq!(transport_map(1, 0.0), 0.0);
    }

    #[test]
    fn eigen_frame_is_orthonormal() {
        let g = eigen_frame();
        assert!((&g * g.transpose() - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn eigenfunctions_are_orthonormal() {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut gram = [[0.0; 2]; 2];
        for j in 0..n {
            let s = (j as f64 + 0.5) * h;
            for a in 0..2 {
                for b in 0..2 {
                    gram[a][b] += h * i8_eigenfunction(a + 1, s) * i8_eigenfunction(b + 1, s);
                }
            }
        }
        assert!((gram[0][0] - 1.0).abs() < 1e-3 && (gram[1][1] - 1.0).abs() < 1e-3);
        assert!(gram[0][1].abs() < 1e-3);
    }

    #[test]
    fn spd_sigma_at_zero_exponent() {
        let law = SpdLaw {
            b: DVector::from_element(2, 3.0),
            c: DVector::from_element(2, 0.5),
            s: DMatrix::zeros(2, 2),
            theta: DMatrix::zeros(2, 2),
        };
        let x = 0.5;
        let expected = DMatrix::<f64>::identity(2, 2) * (x + 2.0 * x * x * x);
        assert!((law.sigma(x) - expected).amax() < 1e-14);
    }

    #[test]
    fn rank_scores_are_in_unit_interval() {
        let r = rank_scores(&[3.0, -1.0, 10.0]);
        assert_eq!(r, [0.5, 0.25, 0.75]);
    }
}
