//! Minimum Covariance Determinant scatter with consistency scaling and one
//! reweighting step.
//!
//! Small problems are solved by enumerating every h-subset; larger ones use
//! FAST-MCD (random 3-point starts refined by C-steps).

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Point2;
use crate::inference::Chi2;
use crate::matrix::{mean_cov, SymMat2};

pub const DEFAULT_SEED: u64 = 20240601;
/// χ²₂ quantile used as the reweighting cutoff.
pub const REWEIGHT_QUANTILE: f64 = 0.975;
const DIM: u32 = 2;

#[derive(Debug, Error, PartialEq)]
pub enum ScatterError {
    #[error("best {h}-subset has a singular covariance (data are collinear)")]
    SingularSubset { h: usize },
    #[error("subset size {h} invalid for n = {n} (need 3 <= h <= n)")]
    BadSubsetSize { h: usize, n: usize },
    #[error("covariance matrix is singular")]
    SingularCovariance,
    #[error("only {0} points survive reweighting, at least 3 required")]
    TooFewWeighted(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McdConfig {
    pub seed: u64,
    /// Enumerate all subsets when C(n, h) does not exceed this.
    pub exhaustive_limit: u64,
    pub starts: usize,
    pub initial_csteps: usize,
    pub keep_best: usize,
    /// Relative determinant change that ends C-step iteration.
    pub tolerance: f64,
    pub max_csteps: usize,
}

impl Default for McdConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            exhaustive_limit: 200_000,
            starts: 500,
            initial_csteps: 2,
            keep_best: 10,
            tolerance: 1e-12,
            max_csteps: 100,
        }
    }
}

/// floor((n + p + 1) / 2) with p = 2.
pub fn default_h(n: usize) -> usize {
    (n + DIM as usize + 1) / 2
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMcd {
    pub h: usize,
    /// Sorted indices of the minimum-determinant subset.
    pub subset: Vec<usize>,
    pub mean: Point2,
    /// Subset covariance, denominator h − 1, not consistency-scaled.
    pub cov: SymMat2,
    pub determinant: f64,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CStep {
    pub subset: Vec<usize>,
    pub mean: Point2,
    pub cov: SymMat2,
}

impl CStep {
    pub fn determinant(&self) -> f64 {
        self.cov.det()
    }
}

fn subset_moments(points: &[Point2], subset: &[usize]) -> (Point2, SymMat2) {
    mean_cov(subset.iter().map(|&i| points[i])).expect("subset has at least two points")
}

/// One concentration step: keep the `h` points closest to `(mean, cov)` in
/// Mahalanobis distance (ties broken by index) and refit.
pub fn c_step(points: &[Point2], mean: Point2, cov: &SymMat2, h: usize) -> Result<CStep, ScatterError> {
    let n = points.len();
    if h < 3 || h > n {
        return Err(ScatterError::BadSubsetSize { h, n });
    }
    let inv = cov.inverse().ok_or(ScatterError::SingularCovariance)?;
    let d2: Vec<f64> = points.iter().map(|&z| inv.quad_form(z - mean)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let by_distance = |a: &usize, b: &usize| d2[*a].total_cmp(&d2[*b]).then(a.cmp(b));
    if h < n {
        order.select_nth_unstable_by(h - 1, by_distance);
    }
    let mut subset = order[..h].to_vec();
    subset.sort_unstable();
    let (mean, cov) = subset_moments(points, &subset);
    Ok(CStep { subset, mean, cov })
}

fn better(det: f64, subset: &[usize], best_det: f64, best_subset: &[usize]) -> bool {
    let scale = det.abs().max(best_det.abs());
    if (det - best_det).abs() <= 1e-12 * scale {
        subset < best_subset
    } else {
        det < best_det
    }
}

fn exhaustive(points: &[Point2], h: usize) -> (Vec<usize>, Point2, SymMat2) {
    let n = points.len();
    let mut combo: Vec<usize> = (0..h).collect();
    let (mut best_subset, mut best_mean, mut best_cov) = (combo.clone(), Point2::default(), SymMat2::default());
    let mut best_det = f64::INFINITY;
    loop {
        let (mean, cov) = subset_moments(points, &combo);
        let det = cov.det();
        if best_det.is_infinite() || better(det, &combo, best_det, &best_subset) {
            best_det = det;
            best_subset.clone_from(&combo);
            best_mean = mean;
            best_cov = cov;
        }
        // next combination in lexicographic order
        let mut i = h;
        while i > 0 && combo[i - 1] == n - h + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        combo[i - 1] += 1;
        for j in i..h {
            combo[j] = combo[j - 1] + 1;
        }
    }
    (best_subset, best_mean, best_cov)
}

/// Random (p+1)-point start, grown until its covariance is nonsingular.
fn random_start(points: &[Point2], rng: &mut ChaCha8Rng) -> Option<(Point2, SymMat2)> {
    let n = points.len();
    let mut subset = index::sample(rng, n, DIM as usize + 1).into_vec();
    loop {
        let (mean, cov) = subset_moments(points, &subset);
        if !cov.is_singular() {
            return Some((mean, cov));
        }
        if subset.len() == n {
            return None;
        }
        loop {
            let extra = rng.random_range(0..n);
            if !subset.contains(&extra) {
                subset.push(extra);
                break;
            }
        }
    }
}

/// Iterates C-steps from `start` until the determinant stops decreasing.
fn concentrate(points: &[Point2], start: CStep, h: usize, config: &McdConfig) -> CStep {
    let mut current = start;
    for _ in 0..config.max_csteps {
        if current.cov.is_singular() {
            break;
        }
        let next = match c_step(points, current.mean, &current.cov, h) {
            Ok(s) => s,
            Err(_) => break,
        };
        let (old, new) = (current.determinant(), next.determinant());
        let done = next.subset == current.subset || (old - new).abs() <= config.tolerance * old.abs();
        current = next;
        if done {
            break;
        }
    }
    current
}

fn fast_mcd(points: &[Point2], h: usize, config: &McdConfig) -> Option<CStep> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut candidates: Vec<CStep> = Vec::with_capacity(config.starts);
    for _ in 0..config.starts {
        let Some((mean, cov)) = random_start(points, &mut rng) else {
            continue;
        };
        let Ok(mut step) = c_step(points, mean, &cov, h) else {
            continue;
        };
        for _ in 1..config.initial_csteps {
            if step.cov.is_singular() {
                break;
            }
            match c_step(points, step.mean, &step.cov, h) {
                Ok(s) => step = s,
                Err(_) => break,
            }
        }
        candidates.push(step);
    }
    candidates.sort_by(|a, b| a.determinant().total_cmp(&b.determinant()).then_with(|| a.subset.cmp(&b.subset)));
    candidates.dedup_by(|a, b| a.subset == b.subset);
    candidates.truncate(config.keep_best);

    candidates
        .into_iter()
        .map(|c| concentrate(points, c, h, config))
        .reduce(|best, c| {
            if better(c.determinant(), &c.subset, best.determinant(), &best.subset) {
                c
            } else {
                best
            }
        })
}

/// Raw MCD: the h-subset whose sample covariance has minimal determinant.
pub fn mcd_raw(points: &[Point2], h: usize, config: &McdConfig) -> Result<RawMcd, ScatterError> {
    let n = points.len();
    if h < DIM as usize + 1 || h > n {
        return Err(ScatterError::BadSubsetSize { h, n });
    }
    let use_exhaustive = binomial(n, h) <= u128::from(config.exhaustive_limit);
    let (subset, mean, cov) = if use_exhaustive {
        exhaustive(points, h)
    } else {
        let best = fast_mcd(points, h, config).ok_or(ScatterError::SingularSubset { h })?;
        (best.subset, best.mean, best.cov)
    };
    if cov.is_singular() {
        return Err(ScatterError::SingularSubset { h });
    }
    Ok(RawMcd { h, subset, mean, determinant: cov.det(), cov, exhaustive: use_exhaustive })
}

/// Factor making the trimmed covariance consistent at the normal model:
/// α / F_{χ²_{p+2}}(q_α), q_α the α-quantile of χ²_p.
pub fn consistency_factor(alpha: f64, p: u32) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let q = Chi2 { df: p }.quantile(alpha).expect("alpha in (0, 1)");
    alpha / Chi2 { df: p + 2 }.cdf(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustEstimate {
    /// The depth median, passed through unchanged.
    pub location: Point2,
    pub scatter: SymMat2,
    pub h: usize,
    pub raw_subset: Vec<usize>,
    pub raw_mean: Point2,
    pub raw_determinant: f64,
    pub consistency_factor: f64,
    pub reweighted_count: usize,
}

/// Empirical quantile with linear interpolation between order statistics.
fn sample_quantile(values: &[f64], prob: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = prob.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Reweighted MCD scatter.
///
/// The raw covariance is rescaled so that the (h/n)-quantile of the squared
/// raw distances matches the χ²₂ quantile at the same level. Points strictly
/// inside the χ²₂(0.975) cutoff of the rescaled fit are kept, and the final
/// scatter is their plain sample covariance.
pub fn mcd_reweighted(points: &[Point2], raw: &RawMcd, location: Point2) -> Result<RobustEstimate, ScatterError> {
    let n = points.len();
    let inv = raw.cov.inverse().ok_or(ScatterError::SingularCovariance)?;
    let d2: Vec<f64> = points.iter().map(|&z| inv.quad_form(z - raw.mean)).collect();
    let alpha = raw.h as f64 / n as f64;
    let chi2 = Chi2 { df: DIM };
    let (factor, kept): (f64, Vec<Point2>) = if raw.h >= n {
        (1.0, points.to_vec())
    } else {
        let factor = sample_quantile(&d2, alpha) / chi2.quantile(alpha).expect("alpha in (0, 1)");
        let cutoff = chi2.quantile(REWEIGHT_QUANTILE).expect("valid level") * factor;
        let kept = points.iter().zip(&d2).filter(|(_, &d)| d < cutoff).map(|(&z, _)| z).collect();
        (factor, kept)
    };
    if kept.len() < 3 {
        return Err(ScatterError::TooFewWeighted(kept.len()));
    }
    let (_, scatter) = mean_cov(kept.iter().copied()).expect("at least three points");
    if scatter.is_singular() {
        return Err(ScatterError::SingularCovariance);
    }
    Ok(RobustEstimate {
        location,
        scatter,
        h: raw.h,
        raw_subset: raw.subset.clone(),
        raw_mean: raw.mean,
        raw_determinant: raw.determinant,
        consistency_factor: factor,
        reweighted_count: kept.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::toy_dataset;
    use proptest::prelude::*;

    /// Oracle: bitmask enumeration with a two-pass covariance, independent
    /// of the lexicographic walker and `mean_cov`.
    fn brute_force_min_det(points: &[Point2], h: usize) -> (f64, Vec<usize>) {
        let n = points.len();
        let mut best = (f64::INFINITY, Vec::new());
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != h {
                continue;
            }
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let m = h as f64;
            let mx = idx.iter().map(|&i| points[i].x).sum::<f64>() / m;
            let my = idx.iter().map(|&i| points[i].y).sum::<f64>() / m;
            let sxx = idx.iter().map(|&i| (points[i].x - mx).powi(2)).sum::<f64>() / (m - 1.0);
            let syy = idx.iter().map(|&i| (points[i].y - my).powi(2)).sum::<f64>() / (m - 1.0);
            let sxy = idx.iter().map(|&i| (points[i].x - mx) * (points[i].y - my)).sum::<f64>() / (m - 1.0);
            let det = sxx * syy - sxy * sxy;
            if det < best.0 {
                best = (det, idx);
            }
        }
        best
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 5), 56);
        assert_eq!(binomial(5, 5), 1);
        assert_eq!(binomial(40, 20), 137_846_528_820);
        assert_eq!(binomial(5000, 2501), u128::MAX);
    }

    #[test]
    fn toy_exhaustive_matches_oracle() {
        let data = toy_dataset();
        let z = data.points();
        assert_eq!(default_h(8), 5);
        let raw = mcd_raw(z, 5, &McdConfig::default()).unwrap();
        assert!(raw.exhaustive);
        let (det, subset) = brute_force_min_det(z, 5);
        assert!((raw.determinant - det).abs() <= 1e-12 * det);
        assert_eq!(raw.subset, subset);
        // (0,1,2,3,4) and (0,1,2,3,5) tie at det 24.1
        assert_eq!(raw.subset, vec![0, 1, 2, 3, 4]);
        assert!((raw.determinant - 24.1).abs() < 1e-9);
    }

    #[test]
    fn full_sample_is_classical() {
        let data = toy_dataset();
        let z = data.points();
        let raw = mcd_raw(z, 8, &McdConfig::default()).unwrap();
        let (mean, cov) = mean_cov(z.iter().copied()).unwrap();
        assert_eq!(raw.mean, mean);
        assert_eq!(raw.cov, cov);
        assert_eq!(raw.subset, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn collinear_subset_is_singular() {
        let z: Vec<Point2> = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (5.0, 0.0), (0.0, 7.0)]
            .into_iter()
            .map(Point2::from)
            .collect();
        assert_eq!(mcd_raw(&z, 3, &McdConfig::default()), Err(ScatterError::SingularSubset { h: 3 }));
        assert_eq!(mcd_raw(&z, 2, &McdConfig::default()), Err(ScatterError::BadSubsetSize { h: 2, n: 5 }));
    }

    #[test]
    fn c_step_fixed_point_and_full() {
        let data = toy_dataset();
        let z = data.points();
        let raw = mcd_raw(z, 5, &McdConfig::default()).unwrap();
        let step = c_step(z, raw.mean, &raw.cov, 5).unwrap();
        assert_eq!(step.subset, raw.subset);
        let (mean, cov) = mean_cov(z.iter().copied()).unwrap();
        let all = c_step(z, mean, &cov, 8).unwrap();
        assert_eq!(all.subset, (0..8).collect::<Vec<_>>());
        assert_eq!(c_step(z, mean, &SymMat2::new(1.0, 1.0, 1.0), 5), Err(ScatterError::SingularCovariance));
    }

    #[test]
    fn c_steps_descend_on_toy_from_random_starts() {
        let data = toy_dataset();
        let z = data.points();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (mut mean, mut cov) = random_start(z, &mut rng).unwrap();
            let mut det = f64::INFINITY;
            for _ in 0..4 {
                let s = c_step(z, mean, &cov, 5).unwrap();
                assert!(s.determinant() <= det * (1.0 + 1e-12));
                det = s.determinant();
                mean = s.mean;
                cov = s.cov;
            }
        }
    }

    #[test]
    fn consistency_factors() {
        assert_eq!(consistency_factor(1.0, 2), 1.0);
        assert_eq!(consistency_factor(1.0, 5), 1.0);
        assert!((consistency_factor(0.5, 2) - 3.2588).abs() < 1e-4);
        assert!((consistency_factor(5.0 / 8.0, 2) - 2.4302).abs() < 1e-4);
        // closed form for p = 2: α / (1 − (1 − α)(1 − ln(1 − α)))
        for alpha in [0.3, 0.5, 0.75, 0.9] {
            let closed = alpha / (1.0 - (1.0 - alpha) * (1.0 - (1.0f64 - alpha).ln()));
            assert!((consistency_factor(alpha, 2) - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn toy_reweighted_scatter() {
        let data = toy_dataset();
        let z = data.points();
        let raw = mcd_raw(z, 5, &McdConfig::default()).unwrap();
        let est = mcd_reweighted(z, &raw, Point2::new(7.0, 5.0)).unwrap();
        assert_eq!(est.reweighted_count, 7);
        assert!((est.scatter.xx / (53.0 / 3.0) - 1.0).abs() < 1e-9);
        assert!((est.scatter.yy / 17.0 - 1.0).abs() < 1e-9);
        assert!(est.scatter.xy.abs() < 1e-9);
        assert_eq!(est.location, Point2::new(7.0, 5.0));
    }

    #[test]
    fn no_extremes_means_classical_covariance() {
        let z: Vec<Point2> = [(0.0, 0.0), (1.0, 0.2), (0.3, 1.0), (1.1, 1.2), (0.5, 0.4), (0.8, 0.7)]
            .into_iter()
            .map(Point2::from)
            .collect();
        let raw = mcd_raw(&z, 6, &McdConfig::default()).unwrap();
        let est = mcd_reweighted(&z, &raw, Point2::new(0.5, 0.5)).unwrap();
        assert_eq!(est.reweighted_count, 6);
        let (_, cov) = mean_cov(z.iter().copied()).unwrap();
        assert_eq!(est.scatter, cov);
    }

    #[test]
    fn fast_mcd_is_no_worse_than_a_single_start() {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let z: Vec<Point2> = (0..300)
            .map(|_| Point2::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let h = default_h(z.len());
        let full = McdConfig { exhaustive_limit: 0, ..McdConfig::default() };
        let best = mcd_raw(&z, h, &full).unwrap();
        assert!(!best.exhaustive);
        for seed in 0..10 {
            let one = McdConfig { exhaustive_limit: 0, starts: 1, seed, ..McdConfig::default() };
            let single = mcd_raw(&z, h, &one).unwrap();
            assert!(best.determinant <= single.determinant * (1.0 + 1e-12));
        }
        assert_eq!(mcd_raw(&z, h, &full).unwrap(), best);
    }

    #[test]
    fn clean_normal_scatter_near_identity() {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z: Vec<Point2> = (0..2000)
            .map(|_| Point2::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let raw = mcd_raw(&z, default_h(z.len()), &McdConfig::default()).unwrap();
        let est = mcd_reweighted(&z, &raw, Point2::default()).unwrap();
        let diff = (est.scatter - SymMat2::identity()).operator_norm();
        assert!(diff < 0.15, "{:?}", est.scatter);
    }

    fn small_cloud() -> impl Strategy<Value = Vec<Point2>> {
        prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0).prop_map(Point2::from), 5..11)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exhaustive_is_global_minimum(z in small_cloud()) {
            let h = default_h(z.len());
            let raw = mcd_raw(&z, h, &McdConfig::default()).unwrap();
            let (det, _) = brute_force_min_det(&z, h);
            prop_assert!((raw.determinant - det).abs() <= 1e-9 * det.abs().max(1e-12));
        }

        #[test]
        fn translation_leaves_scatter_unchanged(z in small_cloud(), dx in -1e3f64..1e3, dy in -1e3f64..1e3) {
            let h = default_h(z.len());
            let raw = mcd_raw(&z, h, &McdConfig::default()).unwrap();
            let shift = Point2::new(dx, dy);
            let moved: Vec<Point2> = z.iter().map(|&p| p + shift).collect();
            let raw2 = mcd_raw(&moved, h, &McdConfig::default()).unwrap();
            prop_assume!(raw.subset == raw2.subset);
            let a = mcd_reweighted(&z, &raw, Point2::default()).unwrap();
            let b = mcd_reweighted(&moved, &raw2, shift).unwrap();
            let scale = a.scatter.operator_norm();
            prop_assert!((a.scatter - b.scatter).operator_norm() <= 1e-9 * scale);
            let (lo, _) = a.scatter.eigenvalues();
            prop_assert!(lo > 0.0);
        }
    }
}
