use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

pub const GAUSSIAN_SYMMETRY_TOL: f64 = 1e-10;
pub const GAUSSIAN_EIGEN_TOL: f64 = 1e-10;
pub const SPD_SYMMETRY_TOL: f64 = 1e-10;
pub const SPD_EIGEN_TOL: f64 = 1e-8;
pub const LAPLACIAN_ROW_SUM_TOL: f64 = 1e-8;

/// Tolerances on matrix invariants are absolute for unit-scale matrices and
/// relative to the largest entry otherwise.
fn scaled(tol: f64, m: &DMatrix<f64>) -> f64 {
    tol * m.amax().max(1.0)
}

fn check_square(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidObject(format!(
            "{what} must be a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidObject(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Multivariate normal law `N(mean, cov)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasure {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianMeasure {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        check_square(&cov, "covariance")?;
        if cov.nrows() != mean.len() {
            return Err(Error::InvalidObject(format!(
                "mean has dimension {} but covariance is {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidObject("mean has non-finite entries".into()));
        }
        let asym = linalg::asymmetry(&cov);
        if asym > scaled(GAUSSIAN_SYMMETRY_TOL, &cov) {
            return Err(Error::InvalidObject(format!(
                "covariance is not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        let cov = linalg::symmetrize(&cov);
        let min_eig = linalg::min_eigenvalue(&cov);
        if min_eig < -scaled(GAUSSIAN_EIGEN_TOL, &cov) {
            return Err(Error::InvalidObject(format!(
                "covariance is not PSD (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(GaussianMeasure { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Fits `N(sample mean, sample covariance)` (1/m normalization) to the
    /// rows of `points` (m × d). A ridge of `1e-8` is added when the sample
    /// covariance is numerically singular; the returned flag reports it.
    pub fn fit(points: &DMatrix<f64>) -> Result<(Self, bool)> {
        let m = points.nrows();
        if m == 0 {
            return Err(Error::InvalidArgument("empty point cloud".into()));
        }
        let mean: DVector<f64> = points.row_mean().transpose();
        let mut centered = points.clone();
        for mut row in centered.row_iter_mut() {
            row -= mean.transpose();
        }
        let mut cov = centered.transpose() * &centered / m as f64;
        let ridged = linalg::min_eigenvalue(&cov) <= 1e-12;
        if ridged {
            for i in 0..cov.nrows() {
                cov[(i, i)] += 1e-8;
            }
        }
        Ok((GaussianMeasure::new(mean, linalg::symmetrize(&cov))?, ridged))
    }
}

/// Symmetric positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdObject {
    mat: DMatrix<f64>,
}

impl SpdObject {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        check_square(&mat, "SPD matrix")?;
        let asym = linalg::asymmetry(&mat);
        if asym > scaled(SPD_SYMMETRY_TOL, &mat) {
            return Err(Error::InvalidObject(format!(
                "SPD matrix is not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        let mat = linalg::symmetrize(&mat);
        let min_eig = linalg::min_eigenvalue(&mat);
        if min_eig < -scaled(SPD_EIGEN_TOL, &mat) {
            return Err(Error::InvalidObject(format!(
                "SPD matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(SpdObject { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

/// Graph Laplacian: symmetric, zero row sums, off-diagonals in `[−bound, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianObject {
    mat: DMatrix<f64>,
    bound: f64,
}

impl LaplacianObject {
    pub fn new(mat: DMatrix<f64>, bound: f64) -> Result<Self> {
        check_square(&mat, "Laplacian")?;
        if !(bound > 0.0) {
            return Err(Error::InvalidArgument(format!("edge-weight bound must be positive, got {bound}")));
        }
        let r = mat.nrows();
        if linalg::asymmetry(&mat) > 1e-12 * bound.max(1.0) {
            return Err(Error::InvalidObject("Laplacian is not symmetric".into()));
        }
        for i in 0..r {
            let row_sum: f64 = mat.row(i).sum();
            if row_sum.abs() > LAPLACIAN_ROW_SUM_TOL {
                return Err(Error::InvalidObject(format!(
                    "Laplacian row {i} sums to {row_sum:.3e}"
                )));
            }
            for j in 0..r {
                if i != j {
                    let v = mat[(i, j)];
                    if v > 1e-12 || v < -bound - 1e-12 {
                        return Err(Error::InvalidObject(format!(
                            "Laplacian entry ({i},{j}) = {v} outside [-{bound}, 0]"
                        )));
                    }
                }
            }
        }
        Ok(LaplacianObject { mat, bound })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }
}

/// A trajectory observed at increasing times in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidObject(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidObject("a sampled function needs at least 2 points".into()));
        }
        if times.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidObject("times must lie in [0, 1]".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidObject("times must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidObject("values must be finite".into()));
        }
        Ok(SampledFunction { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        SampledFunction {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}
