//! Projections of weighted linear averages back onto the valid object sets:
//! the monotone cone (quantile functions), the PSD cone and correlation
//! matrices, graph Laplacians, and the Gaussian W2 barycenter.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg;
use crate::metric::{GaussianMeasure, LaplacianObject};

const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub psd_floor: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            max_iter: 1000,
            tol: 1e-9,
            psd_floor: 0.0,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.tol > 0.0) || !(self.psd_floor >= 0.0) {
            return Err(Error::InvalidArgument(format!("invalid projection config {self:?}")));
        }
        Ok(())
    }
}

/// L2 projection onto the nondecreasing cone (pool adjacent violators).
pub fn project_monotone(v: &[f64]) -> Vec<f64> {
    pava(v, None)
}

/// Weighted L2 projection onto the nondecreasing cone: minimizes
/// `Σ_j w_j (v_j − q_j)²` subject to `q_1 ≤ … ≤ q_M`. Weights must be positive.
pub fn project_monotone_weighted(v: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if v.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} values but {} weights",
            v.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidArgument("monotone projection weights must be positive".into()));
    }
    Ok(pava(v, Some(weights)))
}

fn pava(v: &[f64], weights: Option<&[f64]>) -> Vec<f64> {
    // Blocks as (weighted mean, total weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(v.len());
    for (j, &x) in v.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[j]);
        let mut cur = (x, w, 1usize);
        while let Some(&(m, wt, len)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            blocks.pop();
            let total = wt + cur.1;
            cur = ((m * wt + cur.0 * cur.1) / total, total, len + cur.2);
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(v.len());
    for (m, _, len) in blocks {
        out.extend(core::iter::repeat_n(m, len));
    }
    out
}

fn symmetric_input(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let asym = linalg::asymmetry(a);
    if asym > SYMMETRY_TOL * a.amax().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric (max asymmetry {asym:.3e})"
        )));
    }
    Ok(linalg::symmetrize(a))
}

/// Frobenius-nearest symmetric matrix with all eigenvalues `≥ floor`.
pub fn project_psd(a: &DMatrix<f64>, floor: f64) -> Result<DMatrix<f64>> {
    let a = symmetric_input(a)?;
    Ok(linalg::sym_apply(&a, |l| l.max(floor)))
}

/// Nearest correlation matrix by alternating projections between the PSD cone
/// and the unit-diagonal set, with Dykstra's correction on the PSD step.
pub fn project_correlation(a: &DMatrix<f64>, cfg: &ProjectionConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let a = symmetric_input(a)?;
    let n = a.nrows();
    let mut y = a.clone();
    let mut correction = DMatrix::<f64>::zeros(n, n);
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let r = &y - &correction;
        let x = linalg::sym_apply(&r, |l| l.max(0.0));
        correction = &x - &r;
        let mut next = x;
        for i in 0..n {
            next[(i, i)] = 1.0;
        }
        change = linalg::frobenius_norm(&(&next - &y)) / linalg::frobenius_norm(&y).max(1.0);
        y = next;
        if change < cfg.tol {
            break;
        }
    }
    if change >= cfg.tol {
        return Err(Error::NonConvergence {
            solver: "nearest correlation",
            iterations,
            residual: change,
        });
    }
    // Remove the O(tol) negative eigenvalues left by the unit-diagonal step
    // while keeping the diagonal exactly one.
    if linalg::min_eigenvalue(&y) < 0.0 {
        let x = linalg::sym_apply(&y, |l| l.max(0.0));
        let d: Vec<f64> = (0..n).map(|i| 1.0 / x[(i, i)].max(f64::MIN_POSITIVE).sqrt()).collect();
        y = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { x[(i, j)] * d[i] * d[j] });
    }
    Ok(y)
}

/// Projects a symmetric matrix onto graph Laplacians with edge weights in
/// `[0, bound]`: cyclic enforcement of symmetry and of the box/row-sum set
/// (off-diagonals clipped to `[−bound, 0]`, diagonal = −row sum of the
/// off-diagonals) until the Frobenius change drops below `cfg.tol`.
pub fn project_laplacian(a: &DMatrix<f64>, bound: f64, cfg: &ProjectionConfig) -> Result<LaplacianObject> {
    cfg.validate()?;
    if !(bound > 0.0) {
        return Err(Error::InvalidArgument(format!("edge-weight bound must be positive, got {bound}")));
    }
    let mut l = symmetric_input(a)?;
    let r = l.nrows();
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let sym = linalg::symmetrize(&l);
        let mut next = sym.clone();
        for i in 0..r {
            let mut off_sum = 0.0;
            for j in 0..r {
                if i != j {
                    let v = sym[(i, j)].clamp(-bound, 0.0);
                    next[(i, j)] = v;
                    off_sum += v;
                }
            }
            next[(i, i)] = -off_sum;
        }
        change = linalg::frobenius_norm(&(&next - &l));
        l = next;
        if change < cfg.tol {
            break;
        }
    }
    if change >= cfg.tol {
        return Err(Error::NonConvergence {
            solver: "Laplacian projection",
            iterations,
            residual: change,
        });
    }
    LaplacianObject::new(l, bound)
}

/// Strict upper triangle, row-major.
pub fn vech(l: &DMatrix<f64>) -> Vec<f64> {
    let r = l.nrows();
    let mut out = Vec::with_capacity(r * r.saturating_sub(1) / 2);
    for i in 0..r {
        for j in (i + 1)..r {
            out.push(l[(i, j)]);
        }
    }
    out
}

/// Inverse of [`vech`]: places `v` symmetrically off the diagonal and sets the
/// diagonal to minus the off-diagonal row sums, so rows sum to zero.
pub fn vech_inverse(v: &[f64]) -> Result<DMatrix<f64>> {
    let d = v.len();
    let mut r = 1usize;
    while r * (r - 1) / 2 < d {
        r += 1;
    }
    if r * (r - 1) / 2 != d || d == 0 {
        return Err(Error::InvalidArgument(format!("length {d} is not a positive triangular number")));
    }
    let mut l = DMatrix::zeros(r, r);
    let mut k = 0;
    for i in 0..r {
        for j in (i + 1)..r {
            l[(i, j)] = v[k];
            l[(j, i)] = v[k];
            k += 1;
        }
    }
    for i in 0..r {
        let s: f64 = (0..r).filter(|&j| j != i).map(|j| l[(i, j)]).sum();
        l[(i, i)] = -s;
    }
    Ok(l)
}

/// Result of [`gaussian_barycenter`].
#[derive(Debug, Clone)]
pub struct Barycenter {
    pub measure: GaussianMeasure,
    /// Negative weights were clipped to zero before the covariance iteration.
    pub clipped: bool,
    pub iterations: usize,
}

/// Weighted W2 barycenter of Gaussian laws.
///
/// The mean is the signed-weight average of the means. The covariance is the
/// fixed point of `Σ ← Σ^{-1/2} (Σ_i w̃_i (Σ^{1/2} Σ_i Σ^{1/2})^{1/2})² Σ^{-1/2}`
/// where `w̃` are the weights with negatives clipped to zero, normalized to sum
/// to one.
pub fn gaussian_barycenter(
    measures: &[GaussianMeasure],
    weights: &[f64],
    cfg: &ProjectionConfig,
) -> Result<Barycenter> {
    cfg.validate()?;
    let n = measures.len();
    if n == 0 || weights.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{n} measures but {} weights",
            weights.len()
        )));
    }
    let d = measures[0].dim();
    if measures.iter().any(|m| m.dim() != d) {
        return Err(Error::Incompatible("Gaussian measures of different dimensions".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total.abs() > 1e-12) {
        return Err(Error::DegenerateSample("weights sum to zero".into()));
    }
    let mut mean = DVector::<f64>::zeros(d);
    for (m, &w) in measures.iter().zip(weights) {
        mean += m.mean() * (w / total);
    }

    let clipped = weights.iter().any(|&w| w < 0.0);
    let positive_total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
    if !(positive_total > 0.0) {
        return Err(Error::DegenerateSample("all barycenter weights are nonpositive".into()));
    }
    let active: Vec<(f64, &GaussianMeasure)> = weights
        .iter()
        .zip(measures)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, m)| (w / positive_total, m))
        .collect();

    // Commuting-case closed form as starting point.
    let mut root_avg = DMatrix::<f64>::zeros(d, d);
    for (w, m) in &active {
        root_avg += linalg::sqrtm_psd(m.cov()) * *w;
    }
    let mut sigma = linalg::symmetrize(&(&root_avg * &root_avg));
    let scale = sigma.amax().max(1.0);
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    while iterations < cfg.max_iter {
        iterations += 1;
        let root = linalg::sqrtm_psd(&sigma);
        let inv_root = linalg::inv_sqrtm(&sigma, 1e-14 * scale);
        let mut t = DMatrix::<f64>::zeros(d, d);
        for (w, m) in &active {
            t += linalg::sqrtm_psd(&(&root * m.cov() * &root)) * *w;
        }
        let next = linalg::symmetrize(&(&inv_root * &t * &t * &inv_root));
        change = linalg::frobenius_norm(&(&next - &sigma)) / scale;
        sigma = next;
        if change < cfg.tol {
            break;
        }
    }
    if change >= cfg.tol {
        return Err(Error::NonConvergence {
            solver: "Gaussian barycenter",
            iterations,
            residual: change,
        });
    }
    let sigma = linalg::sym_apply(&sigma, |l| l.max(0.0));
    Ok(Barycenter {
        measure: GaussianMeasure::new(mean, sigma)?,
        clipped,
        iterations,
    })
}
