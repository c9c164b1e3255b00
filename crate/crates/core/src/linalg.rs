//! Small dense linear-algebra helpers over `nalgebra` for symmetric matrices.

use nalgebra::{DMatrix, SymmetricEigen};
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

/// Largest absolute entry of `A − Aᵀ`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn sym_eigen(a: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    SymmetricEigen::new(symmetrize(a))
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    sym_eigen(a).eigenvalues.min()
}

/// Applies `f` to the spectrum of a symmetric matrix: `V f(Λ) Vᵀ`.
pub fn sym_apply<F: Fn(f64) -> f64>(a: &DMatrix<f64>, f: F) -> DMatrix<f64> {
    let eig = sym_eigen(a);
    reconstruct(&eig.eigenvectors, eig.eigenvalues.iter().map(|&l| f(l)))
}

pub(crate) fn reconstruct<I: Iterator<Item = f64>>(vectors: &DMatrix<f64>, values: I) -> DMatrix<f64> {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (j, v) in values.enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    let out = scaled * vectors.transpose();
    debug_assert_eq!(out.nrows(), n);
    symmetrize(&out)
}

/// Symmetric square root with eigenvalues clipped at zero.
pub fn sqrtm_psd(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(a, |l| l.max(0.0).sqrt())
}

/// Inverse symmetric square root; eigenvalues are floored at `ridge` first.
pub fn inv_sqrtm(a: &DMatrix<f64>, ridge: f64) -> DMatrix<f64> {
    sym_apply(a, |l| 1.0 / l.max(ridge).sqrt())
}

/// Matrix exponential of a symmetric matrix.
pub fn expm_sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(a, |l| l.exp())
}

pub fn frobenius_norm(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        let e = expm_sym(&z);
        assert!((e - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-14);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let s = sqrtm_psd(&a);
        assert!((&s * &s - &a).abs().max() < 1e-12);
        let is = inv_sqrtm(&a, 0.0);
        assert!((&is * &a * &is - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-12);
    }
}
