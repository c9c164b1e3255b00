use alloc::format;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Largest accepted condition number of the empirical covariance.
pub const GLFR_CONDITION_LIMIT: f64 = 1e12;

/// Global linear Fréchet regression weights
/// `w_i = 1 + (x − x̄)ᵀ Σ̂⁻¹ (X_i − x̄)`, with `Σ̂` the `1/n` empirical covariance
/// of the rows of `x_mat`.
pub fn glfr_weights(x_mat: &DMatrix<f64>, x: &[f64]) -> Result<DVector<f64>> {
    let (n, p) = x_mat.shape();
    if n < 2 || p == 0 {
        return Err(Error::DegenerateSample(format!("GLFR needs n >= 2 and p >= 1, got {n}x{p}")));
    }
    if x.len() != p {
        return Err(Error::Incompatible(format!("query has length {} but predictors have {p}", x.len())));
    }
    let mean: DVector<f64> = x_mat.row_mean().transpose();
    let centered = DMatrix::from_fn(n, p, |i, j| x_mat[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / n as f64;
    let eig = linalg::sym_eigen(&cov);
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition < GLFR_CONDITION_LIMIT) {
        return Err(Error::SingularCovariance { condition });
    }
    let dx = DVector::from_iterator(p, x.iter().zip(mean.iter()).map(|(a, m)| a - m));
    let inv = linalg::sym_apply(&cov, |l| 1.0 / l);
    let s = &centered * (inv * dx);
    Ok(s.map(|v| 1.0 + v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_example() {
        let x = DMatrix::from_column_slice(3, 1, &[-1.0, 0.0, 1.0]);
        let w = glfr_weights(&x, &[1.0]).unwrap();
        let expected = [-0.5, 1.0, 2.5];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_query_gives_unit_weights() {
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 1.0, 2.0, 0.5, -1.0, 3.0, 1.0, -2.0]);
        let w = glfr_weights(&x, &[0.5, 0.625]).unwrap();
        assert!(w.add_scalar(-1.0).amax() < 1e-12);
        let w = glfr_weights(&x, &[3.0, -1.0]).unwrap();
        assert!((w.mean() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_design_is_singular() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(glfr_weights(&x, &[0.0, 0.0]), Err(Error::SingularCovariance { .. })));
    }
}
