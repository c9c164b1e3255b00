//! Draw helpers shared by the generators.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::special;

fn param<T, E: core::fmt::Debug>(r: core::result::Result<T, E>, what: &str) -> Result<T> {
    r.map_err(|e| Error::InvalidArgument(format!("{what}: {e:?}")))
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> Result<f64> {
    Ok(param(Normal::new(mean, sd), "normal")?.sample(rng))
}

/// Gamma draw with the given shape and scale.
pub fn gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> Result<f64> {
    Ok(param(Gamma::new(shape, scale), "gamma")?.sample(rng))
}

pub fn beta<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> Result<f64> {
    Ok(param(Beta::new(a, b), "beta")?.sample(rng))
}

/// Uniform on the open interval `(lo, hi)`.
pub fn uniform_open<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return lo + (hi - lo) * u;
        }
    }
}

/// `m` i.i.d. draws from `N(mean, sd²)`; `sd = 0` gives a point mass.
pub fn normal_draws<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            mean + sd * z
        })
        .collect()
}

/// `n × p` matrix with rows `X_j = 2Φ(U_j) − 1`, `U` a stationary AR(1) with
/// coefficient 0.5 and unit marginal variance.
pub fn gen_euclidean_x<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> DMatrix<f64> {
    let innovation = (1.0_f64 - 0.25).sqrt();
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let mut u = 0.0;
        for j in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            u = if j == 0 { z } else { 0.5 * u + innovation * z };
            x[(i, j)] = 2.0 * special::norm_cdf(u) - 1.0;
        }
    }
    x
}

const TGAMMA_NODES: usize = 2001;

/// Density table of Gamma(shape, rate) restricted to `[lo, hi]`, normalized to
/// a CDF on equispaced nodes by the trapezoidal rule. The bounds must be
/// positive so the density is bounded on the interval.
#[derive(Debug, Clone)]
pub struct TruncatedGamma {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    mean_sqrt: f64,
}

impl TruncatedGamma {
    pub fn new(shape: f64, rate: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0 && lo > 0.0 && hi > lo) {
            return Err(Error::InvalidArgument(format!(
                "truncated gamma needs positive shape/rate and 0 < lo < hi, got ({shape}, {rate}, {lo}, {hi})"
            )));
        }
        let h = (hi - lo) / (TGAMMA_NODES - 1) as f64;
        let nodes: Vec<f64> = (0..TGAMMA_NODES).map(|k| lo + k as f64 * h).collect();
        // log density up to a constant, shifted for stability
        let log_f: Vec<f64> = nodes.iter().map(|&x| (shape - 1.0) * x.ln() - rate * x).collect();
        let top = log_f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let f: Vec<f64> = log_f.iter().map(|l| (l - top).exp()).collect();
        let mut cdf = Vec::with_capacity(TGAMMA_NODES);
        cdf.push(0.0);
        let mut root_moment = 0.0;
        for k in 1..TGAMMA_NODES {
            let area = 0.5 * h * (f[k - 1] + f[k]);
            cdf.push(cdf[k - 1] + area);
            root_moment += 0.5 * h * (f[k - 1] * nodes[k - 1].sqrt() + f[k] * nodes[k].sqrt());
        }
        let total = cdf[TGAMMA_NODES - 1];
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Ok(TruncatedGamma {
            nodes,
            cdf,
            mean_sqrt: root_moment / total,
        })
    }

    /// `E √λ` under the truncated law.
    pub fn mean_sqrt(&self) -> f64 {
        self.mean_sqrt
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let j = self.cdf.partition_point(|&c| c < p).clamp(1, TGAMMA_NODES - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let t = if c1 > c0 { ((p - c0) / (c1 - c0)).clamp(0.0, 1.0) } else { 0.0 };
        self.nodes[j - 1] + t * (self.nodes[j] - self.nodes[j - 1])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u)
    }
}

/// Closed form of `E √λ` for Gamma(shape α, rate β) truncated to `[r1, r2]`:
/// `Γ(α+½) / (Γ(α) √β) · [P(α+½, βr₂) − P(α+½, βr₁)] / [P(α, βr₂) − P(α, βr₁)]`.
pub fn truncated_gamma_mean_sqrt(shape: f64, rate: f64, r1: f64, r2: f64) -> f64 {
    let num = special::reg_lower_gamma(shape + 0.5, rate * r2) - special::reg_lower_gamma(shape + 0.5, rate * r1);
    let den = special::reg_lower_gamma(shape, rate * r2) - special::reg_lower_gamma(shape, rate * r1);
    (special::ln_gamma(shape + 0.5) - special::ln_gamma(shape) - 0.5 * rate.ln()).exp() * num / den
}
