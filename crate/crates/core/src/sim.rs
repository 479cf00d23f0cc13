//! Seeded generators for the simulation designs: a two-component normal
//! mixture (independent or correlated) and independent log-normal
//! coordinates.
//!
//! Draws come from ChaCha8 seeded with `seed_from_u64`; normal variates use
//! the ziggurat sampler of `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};

use crate::dataset::Point2;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub n: usize,
    pub contamination: f64,
    pub mu0: Point2,
    pub mu1: Point2,
    /// Correlation of both components (unit variances).
    pub rho: f64,
    pub seed: u64,
}

impl MixtureSpec {
    /// Independent coordinates, 5% shifted component.
    pub fn independent(n: usize, seed: u64) -> Self {
        MixtureSpec {
            n,
            contamination: 0.05,
            mu0: Point2::new(100.0, 300.0),
            mu1: Point2::new(103.0, 298.0),
            rho: 0.0,
            seed,
        }
    }

    pub fn correlated(n: usize, seed: u64) -> Self {
        MixtureSpec { rho: 0.3, ..Self::independent(n, seed) }
    }

    pub fn clean(n: usize, seed: u64) -> Self {
        MixtureSpec { contamination: 0.0, ..Self::independent(n, seed) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelledSample {
    pub points: Vec<Point2>,
    /// `true` for draws from the shifted component.
    pub labels: Vec<bool>,
}

/// Standard bivariate normal pair with correlation `rho`.
fn normal_pair(rng: &mut ChaCha8Rng, rho: f64) -> Point2 {
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    Point2::new(z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2)
}

pub fn gen_mixture(spec: &MixtureSpec) -> LabelledSample {
    assert!((0.0..=1.0).contains(&spec.contamination), "contamination must be a probability");
    assert!(spec.rho.abs() < 1.0, "correlation must lie in (-1, 1)");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let coin = Bernoulli::new(spec.contamination).expect("checked above");
    let mut points = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let shifted = coin.sample(&mut rng);
        let mu = if shifted { spec.mu1 } else { spec.mu0 };
        points.push(mu + normal_pair(&mut rng, spec.rho));
        labels.push(shifted);
    }
    LabelledSample { points, labels }
}

/// Standard bivariate normal sample.
pub fn gen_normal(n: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| normal_pair(&mut rng, 0.0)).collect()
}

/// Independent coordinates exp(N(0, σ²)).
pub fn gen_lognormal(n: usize, sigma: f64, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let p = normal_pair(&mut rng, 0.0);
            Point2::new((sigma * p.x).exp(), (sigma * p.y).exp())
        })
        .collect()
}
