use gnlfr_core::kernel::{kernel_matrix, KernelSpec};
use gnlfr_core::linalg;
use gnlfr_core::metric::{
    empirical_quantiles, sliced_wasserstein2_mc, wasserstein2_quantile, GaussianMeasure, MetricObject, ProbGrid,
    QuantileObject,
};
use gnlfr_core::projections::{
    gaussian_barycenter, project_correlation, project_laplacian, project_monotone, project_psd, vech_inverse,
    ProjectionConfig,
};
use gnlfr_core::FittedModel;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exhaustive isotonic regression: the optimum is constant on contiguous
/// blocks at the block means, so try every split of `0..n`.
fn brute_force_isotonic(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << (n - 1)) {
        let mut fit = Vec::with_capacity(n);
        let mut start = 0;
        for j in 0..n {
            let cut = j == n - 1 || mask & (1 << j) != 0;
            if cut {
                let block = &v[start..=j];
                let mean = block.iter().sum::<f64>() / block.len() as f64;
                fit.extend(std::iter::repeat_n(mean, block.len()));
                start = j + 1;
            }
        }
        if fit.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            continue;
        }
        let sse: f64 = fit.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(s, _)| sse < *s) {
            best = Some((sse, fit));
        }
    }
    best.unwrap().1
}

fn random_symmetric(rng: &mut ChaCha8Rng, r: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(r, r, |_, _| scale * (2.0 * rng.random::<f64>() - 1.0));
    (&a + a.transpose()) * 0.5
}

fn random_quantile(rng: &mut ChaCha8Rng, grid: &ProbGrid) -> QuantileObject {
    let draws: Vec<f64> = (0..30).map(|_| 3.0 * rng.random::<f64>() - 1.0).collect();
    empirical_quantiles(&draws, grid).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn pava_matches_exhaustive_search(v in prop::collection::vec(-5.0f64..5.0, 1..=8)) {
        let fast = project_monotone(&v);
        let slow = brute_force_isotonic(&v);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() < 1e-8, "{fast:?} vs {slow:?}");
        }
    }

    #[test]
    fn monotone_projection_is_idempotent(v in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let once = project_monotone(&v);
        let twice = project_monotone(&once);
        prop_assert!(once.windows(2).all(|w| w[1] >= w[0]));
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn psd_projection_is_idempotent_and_optimal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_symmetric(&mut rng, 5, 2.0);
        let p = project_psd(&a, 0.0).unwrap();
        prop_assert!(linalg::min_eigenvalue(&p) >= -1e-10);
        let pp = project_psd(&p, 0.0).unwrap();
        prop_assert!(linalg::frobenius_norm(&(&pp - &p)) < 1e-10);
        let best = linalg::frobenius_norm(&(&a - &p));
        for _ in 0..100 {
            let f = DMatrix::from_fn(5, 5, |_, _| 2.0 * rng.random::<f64>() - 1.0);
            let candidate = &f * f.transpose();
            prop_assert!(best <= linalg::frobenius_norm(&(&a - candidate)) + 1e-9);
        }
    }

    #[test]
    fn correlation_projection_lands_in_set(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_symmetric(&mut rng, 4, 1.0);
        let cfg = ProjectionConfig::default();
        let c = project_correlation(&a, &cfg).unwrap();
        prop_assert!(linalg::min_eigenvalue(&c) >= -1e-8);
        for i in 0..4 {
            prop_assert!((c[(i, i)] - 1.0).abs() < 1e-8);
        }
        let again = project_correlation(&c, &cfg).unwrap();
        prop_assert!(linalg::frobenius_norm(&(&again - &c)) < 1e-7);
    }

    #[test]
    fn laplacian_projection_is_feasible_and_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_symmetric(&mut rng, 5, 1.5);
        let cfg = ProjectionConfig::default();
        let l = project_laplacian(&a, 1.0, &cfg).unwrap();
        let m = l.mat();
        for i in 0..5 {
            prop_assert!(m.row(i).sum().abs() < 1e-8);
            for j in 0..5 {
                if i != j {
                    prop_assert!(m[(i, j)] <= 1e-12 && m[(i, j)] >= -1.0 - 1e-12);
                }
            }
        }
        let again = project_laplacian(m, 1.0, &cfg).unwrap();
        prop_assert!(linalg::frobenius_norm(&(again.mat() - m)) < 1e-10);
    }

    #[test]
    fn quantile_distance_is_a_metric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = ProbGrid::equispaced(50).unwrap();
        let (a, b, c) = (random_quantile(&mut rng, &grid), random_quantile(&mut rng, &grid), random_quantile(&mut rng, &grid));
        let ab = wasserstein2_quantile(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, wasserstein2_quantile(&b, &a).unwrap());
        prop_assert_eq!(wasserstein2_quantile(&a, &a).unwrap(), 0.0);
        let ac = wasserstein2_quantile(&a, &c).unwrap();
        let cb = wasserstein2_quantile(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-8);
    }
}

#[test]
fn permuting_training_pairs_leaves_predictions_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = ProbGrid::equispaced(40).unwrap();
    let n = 30;
    let xs: Vec<MetricObject> = (0..n)
        .map(|_| MetricObject::Euclidean(vec![rng.random(), rng.random()]))
        .collect();
    let ys: Vec<MetricObject> = (0..n).map(|_| random_quantile(&mut rng, &grid).into()).collect();
    let spec = KernelSpec::gaussian(2.0).unwrap();
    let model = FittedModel::fit(xs.clone(), ys.clone(), spec, 1e-3).unwrap();

    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let px: Vec<MetricObject> = order.iter().map(|&i| xs[i].clone()).collect();
    let py: Vec<MetricObject> = order.iter().map(|&i| ys[i].clone()).collect();
    let permuted = FittedModel::fit(px, py, spec, 1e-3).unwrap();

    for _ in 0..10 {
        let x = MetricObject::Euclidean(vec![rng.random(), rng.random()]);
        let a = model.predict(&x).unwrap();
        let b = permuted.predict(&x).unwrap();
        assert!(a.distance(&b).unwrap() < 1e-10);
    }
}

#[test]
fn centered_gram_is_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let xs: Vec<MetricObject> = (0..20)
        .map(|_| MetricObject::Euclidean(vec![rng.random(), rng.random(), rng.random()]))
        .collect();
    for spec in [
        KernelSpec::gaussian(1.5).unwrap(),
        KernelSpec::laplacian(1.0).unwrap(),
        KernelSpec::linear(1.0),
    ] {
        let k = kernel_matrix(&xs, &spec).unwrap();
        let g = gnlfr_core::kernel::double_center(&k);
        assert!(linalg::min_eigenvalue(&g) > -1e-8);
    }
    let k = kernel_matrix(&xs, &KernelSpec::gaussian(1.5).unwrap()).unwrap();
    assert!(linalg::min_eigenvalue(&k) > 0.0);
}

#[test]
fn one_dimensional_barycenter_matches_quantile_average() {
    let grid = ProbGrid::equispaced(200).unwrap();
    let params = [(0.0, 1.0), (1.5, 0.5), (-0.7, 2.0), (0.3, 1.2)];
    let weights = [0.1, 0.4, 0.3, 0.2];
    let measures: Vec<GaussianMeasure> = params
        .iter()
        .map(|&(m, s)| GaussianMeasure::new(DVector::from_element(1, m), DMatrix::from_element(1, 1, s * s)).unwrap())
        .collect();
    let bary = gaussian_barycenter(&measures, &weights, &ProjectionConfig::default()).unwrap();

    let mut avg = vec![0.0; grid.len()];
    for (&(m, s), &w) in params.iter().zip(&weights) {
        let q = QuantileObject::normal(&grid, m, s).unwrap();
        for (a, v) in avg.iter_mut().zip(q.values()) {
            *a += w * v;
        }
    }
    let avg = QuantileObject::new(grid.clone(), project_monotone(&avg)).unwrap();
    let sd = bary.measure.cov()[(0, 0)].sqrt();
    let from_bary = QuantileObject::normal(&grid, bary.measure.mean()[0], sd).unwrap();
    assert!(wasserstein2_quantile(&avg, &from_bary).unwrap() < 1e-8);
    assert!(!bary.clipped);
}

#[test]
fn laplacian_round_trip_through_vech() {
    let l = vech_inverse(&[-0.2, -0.5, -0.1]).unwrap();
    assert_eq!(gnlfr_core::projections::vech(&l), vec![-0.2, -0.5, -0.1]);
}

#[test]
fn sliced_mc_is_reproducible_and_concentrates() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = DMatrix::from_fn(300, 2, |_, j| rng.random::<f64>() + j as f64);
    let b = DMatrix::from_fn(300, 2, |_, _| 2.0 * rng.random::<f64>());
    let run = |seed: u64, l: usize| sliced_wasserstein2_mc(&a, &b, l, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    assert_eq!(run(9, 50).to_bits(), run(9, 50).to_bits());

    let spread = |l: usize| {
        let vals: Vec<f64> = (0..20).map(|s| run(100 + s, l)).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (vals.len() - 1) as f64).sqrt()
    };
    let (s10, s100, s1000) = (spread(10), spread(100), spread(1000));
    assert!(s10 > s100 && s100 > s1000, "{s10} {s100} {s1000}");
}
