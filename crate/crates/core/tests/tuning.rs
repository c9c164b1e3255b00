use gnlfr_core::simgen::{generate, replicate_rng, ModelId, ScenarioSpec};
use gnlfr_core::{bandwidth_heuristic, gcv_tune, KernelSpec, EPSILON_GRID};

/// Scores fall then rise along the grid (ties allowed), or barely move.
fn unimodal_or_flat(scores: &[f64]) -> bool {
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi.is_finite() && hi <= lo * (1.0 + 1e-3) {
        return true;
    }
    let tol = 1e-9 * lo.abs().max(1e-300);
    let mut rising = false;
    for w in scores.windows(2) {
        if w[1] > w[0] + tol {
            rising = true;
        } else if rising && w[1] < w[0] - tol {
            return false;
        }
    }
    true
}

#[test]
fn gcv_curve_is_mostly_unimodal_on_model_i1() {
    let mut spec = ScenarioSpec::new(ModelId::I1);
    spec.n = 100;
    let mut good = 0;
    for b in 0..20 {
        let sample = generate(&spec, &mut replicate_rng(17, b)).unwrap();
        let kernel = KernelSpec::gaussian(bandwidth_heuristic(&sample.predictors).unwrap()).unwrap();
        let (best, table) = gcv_tune(&sample.predictors, &sample.responses, kernel, &EPSILON_GRID).unwrap();
        assert!(EPSILON_GRID.contains(&best));
        assert!(table.windows(2).all(|w| w[1].epsilon > w[0].epsilon));
        let scores: Vec<f64> = table.iter().map(|r| r.score).collect();
        good += unimodal_or_flat(&scores) as usize;
    }
    assert!(good >= 16, "only {good}/20 unimodal GCV curves");
}

#[test]
fn shape_check_rejects_two_dips() {
    assert!(unimodal_or_flat(&[3.0, 2.0, 1.0, 2.0, 5.0]));
    assert!(!unimodal_or_flat(&[3.0, 1.0, 2.0, 0.5, 5.0]));
    assert!(unimodal_or_flat(&[1.0, 1.0000001, 1.0]));
}
