//! End-to-end fitting: depth, bag and robust scatter are computed once and
//! shared by every error-control regime.

use crate::bag::{construct_bag, Bag};
use crate::dataset::Point2;
use crate::depth::{depth_profile, DepthMode, DepthProfile, MedianRule};
use crate::error::Error;
use crate::fence::{build_model, classic_model, BagplotModel, ClassicModel};
use crate::inference::{test_points, ErrorControl};
use crate::robust_scatter::{default_h, mcd_raw, mcd_reweighted, McdConfig, RobustEstimate};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// `None` picks exact depth up to the exact-depth limit.
    pub depth_mode: Option<DepthMode>,
    pub median_rule: MedianRule,
    pub mcd: McdConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { depth_mode: None, median_rule: MedianRule::default(), mcd: McdConfig::default() }
    }
}

/// Everything that does not depend on the error-control regime.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub points: Vec<Point2>,
    pub profile: DepthProfile,
    pub bag: Bag,
    pub estimate: RobustEstimate,
}

impl Prepared {
    pub fn new(points: &[Point2], config: &FitConfig) -> Result<Self, Error> {
        let mode = config.depth_mode.unwrap_or_else(|| DepthMode::auto(points.len()));
        let profile = depth_profile(points, mode, config.median_rule)?;
        log::info!("depth ({mode:?}): max depth {}, median {:?}", profile.max_depth, profile.median);
        let bag = construct_bag(points, &profile)?;
        log::info!("bag: {} vertices, {} points covered", bag.polygon.vertices.len(), bag.contained_count);
        let raw = mcd_raw(points, default_h(points.len()), &config.mcd)?;
        let estimate = mcd_reweighted(points, &raw, profile.median)?;
        log::info!("scatter: raw det {:.6e}, {} points kept after reweighting", estimate.raw_determinant, estimate.reweighted_count);
        Ok(Self { points: points.to_vec(), profile, bag, estimate })
    }

    pub fn model(&self, method: ErrorControl, q: f64) -> Result<BagplotModel, Error> {
        let outcome = test_points(&self.points, self.profile.median, &self.estimate.scatter, method, q)?;
        Ok(build_model(&self.points, &self.profile, &self.bag, &self.estimate, &outcome)?)
    }

    pub fn classic(&self) -> Result<ClassicModel, Error> {
        Ok(classic_model(&self.points, &self.profile, &self.bag)?)
    }
}

/// Fits the adaptive model with one regime.
pub fn fit(points: &[Point2], method: ErrorControl, q: f64, config: &FitConfig) -> Result<BagplotModel, Error> {
    Prepared::new(points, config)?.model(method, q)
}

/// Fits the classic factor-3 bagplot. The scatter estimate is not needed.
pub fn fit_classic(points: &[Point2], config: &FitConfig) -> Result<ClassicModel, Error> {
    let mode = config.depth_mode.unwrap_or_else(|| DepthMode::auto(points.len()));
    let profile = depth_profile(points, mode, config.median_rule)?;
    let bag = construct_bag(points, &profile)?;
    Ok(classic_model(points, &profile, &bag)?)
}
