//! Synthetic "mortality-like" data: age-at-death histograms in 5-year bins
//! drawn from a two-component Gaussian mixture whose weights and locations
//! depend on two subject covariates.

use gnlfr_core::simgen::replicate_rng;
use gnlfr_core::special::norm_cdf;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::binned::BinnedTable;

pub const AGE_MAX: f64 = 110.0;
pub const BIN_WIDTH: f64 = 5.0;
pub const COVARIATE_NAMES: [&str; 2] = ["development", "spending"];

/// Deaths per histogram.
const COHORT: f64 = 100_000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MortalityFixture {
    pub covariates: Vec<(String, Vec<f64>)>,
    pub histograms: Vec<BinnedTable>,
}

/// Mixture parameters at covariates `(x1, x2) ∈ [0,1]²`: early-life weight,
/// then mean and sd of the adult component.
pub fn mixture_parameters(x1: f64, x2: f64) -> (f64, f64, f64) {
    let early = 0.02 + 0.13 * (1.0 - x1);
    let mean = 58.0 + 20.0 * x1 + 6.0 * x2;
    let sd = 16.0 - 6.0 * x1;
    (early, mean, sd)
}

/// `n` subjects; each adult mean is shifted by subject-level noise of
/// standard deviation 2 years.
pub fn mortality_fixture(n: usize, seed: u64) -> MortalityFixture {
    let mut rng = replicate_rng(seed, 0);
    let shift = Normal::new(0.0, 2.0).expect("valid normal");
    let edges: Vec<f64> = (0..=(AGE_MAX / BIN_WIDTH) as usize).map(|k| k as f64 * BIN_WIDTH).collect();
    let mut covariates = Vec::with_capacity(n);
    let mut histograms = Vec::with_capacity(n);
    for i in 0..n {
        let id = format!("c{:03}", i + 1);
        let (x1, x2): (f64, f64) = (rng.random(), rng.random());
        let (early, mean, sd) = mixture_parameters(x1, x2);
        let mean = mean + shift.sample(&mut rng);
        let mass = |a: f64, b: f64| {
            let infant = norm_cdf(b / 4.0) - norm_cdf(a / 4.0);
            let adult = norm_cdf((b - mean) / sd) - norm_cdf((a - mean) / sd);
            early * infant + (1.0 - early) * adult
        };
        let counts = edges
            .windows(2)
            .map(|w| (COHORT * mass(w[0], w[1])).round())
            .collect();
        covariates.push((id.clone(), vec![x1, x2]));
        histograms.push(BinnedTable {
            id,
            edges: edges.clone(),
            counts,
        });
    }
    MortalityFixture { covariates, histograms }
}
