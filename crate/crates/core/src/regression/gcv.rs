use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{kernel_matrix, GramSystem, KernelSpec};
use crate::linalg;
use crate::metric::MetricObject;
use crate::projections::ProjectionConfig;
use crate::regression::weighted_prediction;

/// One grid point of the generalized cross-validation criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcvRow {
    pub epsilon: f64,
    /// `(1/n) Σ d²(Y_i, Ŷ_i)`
    pub numerator: f64,
    /// `tr[Q G (G + εI)⁻¹ + 11ᵀ/n]`
    pub trace: f64,
    /// `(1 − trace/n)²`, or NaN when `trace ≥ n`.
    pub denominator: f64,
    /// `numerator / denominator`, `+∞` when the bracket is not positive.
    pub score: f64,
}

pub type GcvTable = Vec<GcvRow>;

/// Effective-degrees-of-freedom trace `Σ λ_k/(λ_k + ε) + 1` from the spectrum
/// of `G`.
pub(crate) fn gcv_trace(g_eigenvalues: &[f64], epsilon: f64) -> f64 {
    g_eigenvalues.iter().map(|&l| l / (l + epsilon)).sum::<f64>() + 1.0
}

/// Eigenvalues of `G = QKQ`. The constant vector is an exact null vector of
/// `G`, so its eigenvalue is set to zero and the rest come from `K` restricted
/// to the orthogonal complement of `1`, taken through a Householder basis.
/// Rounding would otherwise leave a spurious `O(1e-14)` eigenvalue that
/// shifts the trace by about `1e-14/ε`.
pub(crate) fn centered_spectrum(k: &DMatrix<f64>) -> Vec<f64> {
    let n = k.nrows();
    if n < 2 {
        return alloc::vec![0.0; n];
    }
    // H = I − 2vvᵀ/vᵀv maps 1/√n to −e₁; columns 2..n of H span 1⊥
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    v[0] += 1.0;
    let scale = 2.0 / v.norm_squared();
    let reflect = |a: &DMatrix<f64>| -> DMatrix<f64> {
        let vt_a = v.transpose() * a;
        a - &v * (vt_a * scale)
    };
    let hk = reflect(k);
    let hkh = reflect(&hk.transpose());
    let block = linalg::symmetrize(&hkh.view((1, 1), (n - 1, n - 1)).into_owned());
    let mut eig: Vec<f64> = linalg::sym_eigen(&block).eigenvalues.iter().copied().collect();
    eig.push(0.0);
    eig
}

/// Scores every `ε` in `grid` on the full sample and returns the minimizer
/// together with the table, in grid order. Ties go to the earlier grid point.
pub fn gcv_tune(
    predictors: &[MetricObject],
    responses: &[MetricObject],
    spec: KernelSpec,
    grid: &[f64],
) -> Result<(f64, GcvTable)> {
    let k = kernel_matrix(predictors, &spec)?;
    gcv_tune_with_kernel(predictors, responses, spec, k, grid)
}

/// As [`gcv_tune`] with a precomputed kernel matrix.
pub fn gcv_tune_with_kernel(
    predictors: &[MetricObject],
    responses: &[MetricObject],
    spec: KernelSpec,
    k: DMatrix<f64>,
    grid: &[f64],
) -> Result<(f64, GcvTable)> {
    let n = predictors.len();
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty epsilon grid".into()));
    }
    if let Some(bad) = grid.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {bad}")));
    }
    if responses.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{n} predictors but {} responses",
            responses.len()
        )));
    }
    let eigenvalues = centered_spectrum(&k);
    let base = GramSystem::from_kernel_matrix(predictors.to_vec(), spec, k, grid[0])?;
    let cfg = ProjectionConfig::default();
    let nf = n as f64;

    let mut table = Vec::with_capacity(grid.len());
    for &eps in grid {
        let gram = base.with_epsilon(eps)?;
        let trace = gcv_trace(&eigenvalues, eps);
        let bracket = 1.0 - trace / nf;
        if bracket <= 0.0 {
            table.push(GcvRow {
                epsilon: eps,
                numerator: f64::NAN,
                trace,
                denominator: f64::NAN,
                score: f64::INFINITY,
            });
            continue;
        }
        let weights = training_weights(&gram);
        let mut total = 0.0;
        for (i, yi) in responses.iter().enumerate() {
            let w: Vec<f64> = weights.column(i).iter().copied().collect();
            let fitted = weighted_prediction(responses, &w, &cfg).map_err(|e| e.in_subject(i))?;
            total += yi.distance_sq(&fitted.object)?;
        }
        let numerator = total / nf;
        let denominator = bracket * bracket;
        table.push(GcvRow {
            epsilon: eps,
            numerator,
            trace,
            denominator,
            score: numerator / denominator,
        });
    }

    let best = table
        .iter()
        .filter(|r| r.score.is_finite())
        .fold(None::<&GcvRow>, |acc, r| match acc {
            Some(a) if a.score <= r.score => Some(a),
            _ => Some(r),
        })
        .ok_or_else(|| Error::DegenerateSample("every GCV grid point has a nonpositive denominator".into()))?;
    Ok((best.epsilon, table))
}

/// Column `j` holds the weights at the training predictor `X_j`:
/// `11ᵀ + n G (G + εI)⁻¹ Q (K + εI)⁻¹ K Q`.
fn training_weights(gram: &GramSystem) -> DMatrix<f64> {
    let n = gram.len();
    let kq = center_columns_of_rows(gram.k());
    let mut c = gram.solve_k_matrix(&kq);
    center_columns(&mut c);
    let h = gram.g() * gram.solve_g_matrix(&c);
    h.map(|v| 1.0 + n as f64 * v)
}

/// `A Q`: subtracts each row's mean.
fn center_columns_of_rows(a: &DMatrix<f64>) -> DMatrix<f64> {
    let means = a.column_mean();
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - means[i])
}

/// `Q A` in place: subtracts each column's mean.
fn center_columns(a: &mut DMatrix<f64>) {
    for mut col in a.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
}
