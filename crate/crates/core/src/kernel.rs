//! Reproducing kernels over metric objects and the regularized Gram system of a
//! training sample.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::metric::MetricObject;

/// Regularization grid searched by GCV: `10⁻⁶, …, 10⁻¹`.
pub const EPSILON_GRID: [f64; 6] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1];
/// Regularization used when tuning is skipped.
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `exp(−γ d²)`
    GaussianRbf,
    /// `exp(−γ d)`
    Laplacian,
    /// `c + x₁ᵀx₂`, Euclidean predictors only.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    gamma: f64,
    offset: f64,
}

impl KernelSpec {
    pub fn gaussian(gamma: f64) -> Result<Self> {
        Self::new(KernelKind::GaussianRbf, gamma, 0.0)
    }

    pub fn laplacian(gamma: f64) -> Result<Self> {
        Self::new(KernelKind::Laplacian, gamma, 0.0)
    }

    pub fn linear(offset: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
            gamma: 0.0,
            offset,
        }
    }

    pub fn new(kind: KernelKind, gamma: f64, offset: f64) -> Result<Self> {
        if kind != KernelKind::Linear && !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("kernel gamma must be positive, got {gamma}")));
        }
        Ok(KernelSpec { kind, gamma, offset })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn eval(&self, x1: &MetricObject, x2: &MetricObject) -> Result<f64> {
        match self.kind {
            KernelKind::GaussianRbf => Ok((-self.gamma * x1.distance_sq(x2)?).exp()),
            KernelKind::Laplacian => Ok((-self.gamma * x1.distance(x2)?).exp()),
            KernelKind::Linear => match (x1, x2) {
                (MetricObject::Euclidean(a), MetricObject::Euclidean(b)) if a.len() == b.len() => {
                    Ok(self.offset + a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
                }
                _ => Err(Error::Incompatible(
                    "the linear kernel needs Euclidean vectors of equal length".into(),
                )),
            },
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, x1: &MetricObject, x2: &MetricObject) -> Result<f64> {
    spec.eval(x1, x2)
}

/// `γ = 1 / (2 σ²)` with `σ²` the mean pairwise squared distance.
pub fn bandwidth_heuristic(objects: &[MetricObject]) -> Result<f64> {
    let n = objects.len();
    if n < 2 {
        return Err(Error::DegenerateSample(format!("bandwidth needs n >= 2, got {n}")));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += objects[i].distance_sq(&objects[j])?;
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let sigma2 = total / pairs;
    if !(sigma2 > 0.0) {
        return Err(Error::DegenerateSample("all pairwise distances are zero".into()));
    }
    Ok(1.0 / (2.0 * sigma2))
}

/// Kernel matrix `K_ij = κ(X_i, X_j)` over a sample.
pub fn kernel_matrix(objects: &[MetricObject], spec: &KernelSpec) -> Result<DMatrix<f64>> {
    let n = objects.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = spec.eval(&objects[i], &objects[j])?;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// `Q A Q` with `Q = I − 11ᵀ/n`, computed by double centering.
pub fn double_center(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let row_means: DVector<f64> = a.column_mean();
    let col_means: DVector<f64> = a.row_mean().transpose();
    let grand = a.mean();
    DMatrix::from_fn(n, n, |i, j| a[(i, j)] - row_means[i] - col_means[j] + grand)
}

/// Applies `Q = I − 11ᵀ/n` to a vector.
pub fn center(v: &DVector<f64>) -> DVector<f64> {
    let m = v.mean();
    v.map(|x| x - m)
}

/// Gram system of a training sample: `K`, `G = QKQ`, and Cholesky factors of
/// `K + εI` and `G + εI`.
#[derive(Debug, Clone)]
pub struct GramSystem {
    objects: Vec<MetricObject>,
    kernel: KernelSpec,
    k: DMatrix<f64>,
    g: DMatrix<f64>,
    k_row_means: DVector<f64>,
    epsilon: f64,
    chol_k: Cholesky<f64, Dyn>,
    chol_g: Cholesky<f64, Dyn>,
}

pub fn build_gram(objects: Vec<MetricObject>, spec: KernelSpec, epsilon: f64) -> Result<GramSystem> {
    GramSystem::build(objects, spec, epsilon)
}

impl GramSystem {
    pub fn build(objects: Vec<MetricObject>, spec: KernelSpec, epsilon: f64) -> Result<Self> {
        if objects.len() < 2 {
            return Err(Error::DegenerateSample(format!(
                "a Gram system needs n >= 2, got {}",
                objects.len()
            )));
        }
        let k = kernel_matrix(&objects, &spec)?;
        Self::from_kernel_matrix(objects, spec, k, epsilon)
    }

    /// Builds the system from a precomputed kernel matrix (e.g. a sub-block of
    /// a larger Gram matrix). `k` must equal `κ(X_i, X_j)` for `objects`.
    pub fn from_kernel_matrix(
        objects: Vec<MetricObject>,
        spec: KernelSpec,
        k: DMatrix<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        let n = objects.len();
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "kernel matrix is {}x{} for {n} objects",
                k.nrows(),
                k.ncols()
            )));
        }
        let g = double_center(&k);
        let k_row_means = k.column_mean();
        Self::assemble(objects, spec, k, g, k_row_means, epsilon)
    }

    fn assemble(
        objects: Vec<MetricObject>,
        kernel: KernelSpec,
        k: DMatrix<f64>,
        g: DMatrix<f64>,
        k_row_means: DVector<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        let n = k.nrows();
        let eye = DMatrix::<f64>::identity(n, n);
        let chol_k = Cholesky::new(&k + &eye * epsilon)
            .ok_or_else(|| Error::Factorization(format!("K + {epsilon:e} I is not positive definite")))?;
        let chol_g = Cholesky::new(&g + &eye * epsilon)
            .ok_or_else(|| Error::Factorization(format!("G + {epsilon:e} I is not positive definite")))?;
        Ok(GramSystem {
            objects,
            kernel,
            k,
            g,
            k_row_means,
            epsilon,
            chol_k,
            chol_g,
        })
    }

    /// Same sample and kernel, new regularization constant.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::assemble(
            self.objects.clone(),
            self.kernel,
            self.k.clone(),
            self.g.clone(),
            self.k_row_means.clone(),
            epsilon,
        )
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[MetricObject] {
        &self.objects
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Gram matrix `K`.
    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    /// Centered Gram matrix `G = QKQ`.
    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// `(K + εI)⁻¹ v`
    pub fn solve_k(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol_k.solve(v)
    }

    /// `(G + εI)⁻¹ v`
    pub fn solve_g(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol_g.solve(v)
    }

    /// `(K + εI)⁻¹ B`
    pub fn solve_k_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol_k.solve(b)
    }

    /// `(G + εI)⁻¹ B`
    pub fn solve_g_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol_g.solve(b)
    }

    /// Cross-kernel vector `k_x[i] = κ(X_i, x)` and its centered version
    /// `d_x[i] = κ(X_i, x) − (1/n) Σ_j κ(X_i, X_j)`, the evaluation of
    /// `κ(·, x) − μ̂` at `X_i`.
    pub fn cross_vector(&self, x: &MetricObject) -> Result<(DVector<f64>, DVector<f64>)> {
        let n = self.len();
        let mut kx = DVector::zeros(n);
        for (i, xi) in self.objects.iter().enumerate() {
            kx[i] = self.kernel.eval(xi, x)?;
        }
        let dx = &kx - &self.k_row_means;
        Ok((kx, dx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn points(xs: &[f64]) -> Vec<MetricObject> {
        xs.iter().map(|&x| MetricObject::scalar(x)).collect()
    }

    #[test]
    fn kernel_eval_examples() {
        let a = MetricObject::scalar(0.0);
        let b = MetricObject::scalar(1.0);
        let rbf = KernelSpec::gaussian(1.0).unwrap();
        assert_eq!(rbf.eval(&a, &a).unwrap(), 1.0);
        assert!((rbf.eval(&a, &b).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let lin = KernelSpec::linear(1.0);
        let x1 = MetricObject::Euclidean(alloc::vec![1.0, 2.0]);
        let x2 = MetricObject::Euclidean(alloc::vec![3.0, -1.0]);
        assert_eq!(lin.eval(&x1, &x2).unwrap(), 2.0);
        let lap = KernelSpec::laplacian(2.0).unwrap();
        let c = MetricObject::scalar(3.0);
        assert!((lap.eval(&b, &c).unwrap() - (-4.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn linear_kernel_needs_vectors() {
        let g = crate::metric::ProbGrid::equispaced(5).unwrap();
        let q = MetricObject::Quantile(crate::metric::QuantileObject::normal(&g, 0.0, 1.0).unwrap());
        assert!(KernelSpec::linear(1.0).eval(&q, &q).is_err());
        assert!(KernelSpec::gaussian(0.0).is_err());
    }

    #[test]
    fn bandwidth_examples() {
        assert_eq!(bandwidth_heuristic(&points(&[0.0, 1.0])).unwrap(), 0.5);
        assert!((bandwidth_heuristic(&points(&[0.0, 1.0, 2.0])).unwrap() - 0.25).abs() < 1e-15);
        let g1 = bandwidth_heuristic(&points(&[0.3, 1.1, -2.0, 4.0])).unwrap();
        let g3 = bandwidth_heuristic(&points(&[0.9, 3.3, -6.0, 12.0])).unwrap();
        assert!((g1 / g3 - 9.0).abs() < 1e-12);
        assert!(matches!(
            bandwidth_heuristic(&points(&[1.0, 1.0, 1.0])),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn two_point_centered_gram() {
        let a = 0.3;
        let k = DMatrix::from_row_slice(2, 2, &[1.0, a, a, 1.0]);
        let g = double_center(&k);
        let h = (1.0 - a) / 2.0;
        let expected = DMatrix::from_row_slice(2, 2, &[h, -h, -h, h]);
        assert!((g - expected).abs().max() < 1e-15);
    }

    #[test]
    fn gram_invariants() {
        let objs = points(&[0.1, 0.5, -0.7, 1.3, 2.0, -1.1]);
        let gamma = bandwidth_heuristic(&objs).unwrap();
        let sys = build_gram(objs.clone(), KernelSpec::gaussian(gamma).unwrap(), 1e-3).unwrap();
        for i in 0..sys.len() {
            assert_eq!(sys.k()[(i, i)], 1.0);
            assert!(sys.g().row(i).sum().abs() < 1e-12);
            assert!(sys.g().column(i).sum().abs() < 1e-12);
        }
        assert!(linalg::min_eigenvalue(sys.k()) > 0.0);
        assert!(linalg::min_eigenvalue(sys.g()) > -1e-8);
        // cross_vector at a training point reproduces columns of K and of KQ
        let kq = sys.k() * (DMatrix::identity(6, 6) - DMatrix::from_element(6, 6, 1.0 / 6.0));
        for (j, x) in objs.iter().enumerate() {
            let (kx, dx) = sys.cross_vector(x).unwrap();
            assert!((&kx - sys.k().column(j)).abs().max() < 1e-15);
            assert!((&dx - kq.column(j)).abs().max() < 1e-14);
        }
    }

    #[test]
    fn constant_kernel_gives_zero_centered_vector() {
        let objs = points(&[2.0, 2.0, 2.0]);
        let sys = build_gram(objs, KernelSpec::gaussian(1.0).unwrap(), 1e-3).unwrap();
        let (_, dx) = sys.cross_vector(&MetricObject::scalar(2.0)).unwrap();
        assert!(dx.amax() < 1e-15);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let objs = points(&[0.0, 1.0]);
        assert!(build_gram(objs, KernelSpec::gaussian(1.0).unwrap(), 0.0).is_err());
    }
}
