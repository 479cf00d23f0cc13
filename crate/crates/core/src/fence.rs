//! Inflation factor, fence, per-point classification and the classic
//! fixed-factor comparison model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bag::Bag;
use crate::dataset::Point2;
use crate::depth::DepthProfile;
use crate::geometry::{
    containment_band, convex_hull, ray_boundary_intersection, ray_ratio, scale_polygon, Containment, ConvexPolygon,
    GeometryError, DEFAULT_TOLERANCE,
};
use crate::inference::TestOutcome;
use crate::robust_scatter::RobustEstimate;

/// Fixed inflation factor of the classic bagplot.
pub const CLASSIC_FACTOR: f64 = 3.0;

#[derive(Debug, Error, PartialEq)]
pub enum FenceError {
    #[error("median of squared distances is zero: more than half the points coincide with the center")]
    ZeroMedian,
    #[error("no distances given")]
    Empty,
    #[error("inputs disagree on the number of points ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    InBag,
    Outer,
    Outlier,
}

/// Segment from the bag boundary to an outer point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Whisker {
    pub index: usize,
    pub start: Point2,
    pub end: Point2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BagplotModel {
    pub points: Vec<Point2>,
    pub profile: DepthProfile,
    pub bag: Bag,
    pub estimate: RobustEstimate,
    pub outcome: TestOutcome,
    pub lambda_stat: f64,
    pub lambda_data: f64,
    pub lambda: f64,
    pub fence: ConvexPolygon,
    pub classification: Vec<Classification>,
    pub whiskers: Vec<Whisker>,
}

impl BagplotModel {
    pub fn median(&self) -> Point2 {
        self.profile.median
    }

    pub fn outliers(&self) -> Vec<usize> {
        indices_of(&self.classification, Classification::Outlier)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicModel {
    pub points: Vec<Point2>,
    pub profile: DepthProfile,
    pub bag: Bag,
    pub loop_hull: ConvexPolygon,
    pub fence3: ConvexPolygon,
    pub outliers: Vec<usize>,
}

impl ClassicModel {
    pub fn median(&self) -> Point2 {
        self.profile.median
    }
}

fn indices_of(classes: &[Classification], which: Classification) -> Vec<usize> {
    classes.iter().enumerate().filter(|(_, &c)| c == which).map(|(i, _)| i).collect()
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// sqrt(d²_adj / median(d²))
pub fn lambda_stat(d2_adj: f64, d2: &[f64]) -> Result<f64, FenceError> {
    let med = median(d2).ok_or(FenceError::Empty)?;
    if med <= 0.0 {
        return Err(FenceError::ZeroMedian);
    }
    Ok((d2_adj / med).sqrt())
}

/// Smallest magnification of `bag` about `center` that covers every point
/// in `keep`.
pub fn lambda_data(points: &[Point2], keep: &[usize], bag: &ConvexPolygon, center: Point2) -> Result<f64, FenceError> {
    keep.iter().try_fold(0.0f64, |acc, &i| Ok(acc.max(ray_ratio(center, points[i], bag)?)))
}

pub fn build_model(
    points: &[Point2],
    profile: &DepthProfile,
    bag: &Bag,
    estimate: &RobustEstimate,
    outcome: &TestOutcome,
) -> Result<BagplotModel, FenceError> {
    let n = points.len();
    for len in [profile.depths.len(), outcome.d2.len()] {
        if len != n {
            return Err(FenceError::LengthMismatch(n, len));
        }
    }
    let center = profile.median;
    let kept: Vec<usize> = (0..n).filter(|&i| !outcome.is_rejected(i)).collect();
    let l_stat = lambda_stat(outcome.d2_adj, &outcome.d2)?;
    let l_data = lambda_data(points, &kept, &bag.polygon, center)?;
    let lambda = l_stat.max(l_data).max(1.0);
    let fence = scale_polygon(&bag.polygon, center, lambda)?;

    let bag_band = DEFAULT_TOLERANCE * bag.polygon.diameter();
    let fence_band = DEFAULT_TOLERANCE * fence.diameter();
    let mut classification = Vec::with_capacity(n);
    let mut whiskers = Vec::new();
    for (i, &z) in points.iter().enumerate() {
        let class = if containment_band(z, &bag.polygon, bag_band)?.is_covered() {
            Classification::InBag
        } else if containment_band(z, &fence, fence_band)? == Containment::Outside {
            Classification::Outlier
        } else {
            Classification::Outer
        };
        if class == Classification::Outer {
            let start = ray_boundary_intersection(center, z, &bag.polygon)?;
            whiskers.push(Whisker { index: i, start, end: z });
        }
        classification.push(class);
    }
    Ok(BagplotModel {
        points: points.to_vec(),
        profile: profile.clone(),
        bag: bag.clone(),
        estimate: estimate.clone(),
        outcome: outcome.clone(),
        lambda_stat: l_stat,
        lambda_data: l_data,
        lambda,
        fence,
        classification,
        whiskers,
    })
}

/// Classic bagplot: bag inflated by 3, loop = hull of the points inside.
pub fn classic_model(points: &[Point2], profile: &DepthProfile, bag: &Bag) -> Result<ClassicModel, FenceError> {
    let fence3 = scale_polygon(&bag.polygon, profile.median, CLASSIC_FACTOR)?;
    let band = DEFAULT_TOLERANCE * fence3.diameter();
    let mut outliers = Vec::new();
    let mut inside = Vec::new();
    for (i, &z) in points.iter().enumerate() {
        if containment_band(z, &fence3, band)? == Containment::Outside {
            outliers.push(i);
        } else {
            inside.push(z);
        }
    }
    let loop_hull = convex_hull(&inside)?;
    Ok(ClassicModel {
        points: points.to_vec(),
        profile: profile.clone(),
        bag: bag.clone(),
        loop_hull,
        fence3,
        outliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bag::construct_bag;
    use crate::dataset::toy_dataset;
    use crate::geometry::containment;
    use crate::depth::{depth_profile, DepthMode, MedianRule};
    use crate::inference::{test_points, ErrorControl};
    use crate::robust_scatter::{default_h, mcd_raw, mcd_reweighted, McdConfig};

    fn toy_parts() -> (Vec<Point2>, DepthProfile, Bag, RobustEstimate) {
        let z = toy_dataset().into_points();
        let profile = depth_profile(&z, DepthMode::Exact, MedianRule::Centroid).unwrap();
        let bag = construct_bag(&z, &profile).unwrap();
        let raw = mcd_raw(&z, default_h(z.len()), &McdConfig::default()).unwrap();
        let est = mcd_reweighted(&z, &raw, profile.median).unwrap();
        (z, profile, bag, est)
    }

    #[test]
    fn lambda_stat_examples() {
        let d2 = [0.0, 1.0, 2.0, 2.0, 3.0, 9.0];
        assert!((lambda_stat(21.39, &d2).unwrap() - 3.27).abs() < 0.005);
        assert!((lambda_stat(5.55, &d2).unwrap() - 1.67).abs() < 0.005);
        assert_eq!(lambda_stat(2.0, &d2).unwrap(), 1.0);
        assert_eq!(lambda_stat(1.0, &[0.0, 0.0, 0.0, 5.0]), Err(FenceError::ZeroMedian));
    }

    #[test]
    fn toy_ray_ratios() {
        let (z, profile, bag, _) = toy_parts();
        let c = profile.median;
        let r = |i: usize| ray_ratio(c, z[i], &bag.polygon).unwrap();
        assert!((r(4) - 7.25).abs() < 1e-12);
        assert!((r(6) - 8.0).abs() < 1e-12);
        assert!((r(7) - 16.5).abs() < 1e-12);
        assert_eq!(lambda_data(&z, &[0, 1, 2, 3, 4, 5, 6], &bag.polygon, c).unwrap(), 8.0);
        assert!(lambda_data(&z, &[0, 1, 2, 3], &bag.polygon, c).unwrap() <= 1.0);
    }

    #[test]
    fn toy_models_flag_only_the_extreme_point() {
        let (z, profile, bag, est) = toy_parts();
        for (method, q, stat) in [(ErrorControl::Fwer, 0.1, 3.27), (ErrorControl::Fdr, 0.01, 3.27), (ErrorControl::Pfer, 0.5, 1.67)] {
            let outcome = test_points(&z, profile.median, &est.scatter, method, q).unwrap();
            let model = build_model(&z, &profile, &bag, &est, &outcome).unwrap();
            assert!((model.lambda_stat - stat).abs() < 0.005, "{method:?}");
            assert_eq!(model.lambda_data, 8.0);
            assert_eq!(model.lambda, 8.0);
            assert_eq!(model.outliers(), vec![7]);
            let idx: Vec<usize> = model.whiskers.iter().map(|w| w.index).collect();
            assert_eq!(idx, vec![4, 5, 6]);
            assert_eq!(model.whiskers[2].start, Point2::new(7.0, 4.0));
            // binding point sits on the fence
            assert_eq!(containment(z[6], &model.fence, DEFAULT_TOLERANCE).unwrap(), Containment::OnBoundary);
        }
    }

    #[test]
    fn toy_classic_loop_collapses_onto_bag() {
        let (z, profile, bag, _) = toy_parts();
        let classic = classic_model(&z, &profile, &bag).unwrap();
        assert_eq!(classic.outliers, vec![4, 5, 6, 7]);
        assert_eq!(classic.loop_hull, bag.polygon);
    }

    #[test]
    fn everything_inside_bag() {
        let z: Vec<Point2> = [(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)].map(Point2::from).to_vec();
        let profile = depth_profile(&z, DepthMode::Exact, MedianRule::Centroid).unwrap();
        let bag = construct_bag(&z, &profile).unwrap();
        let classic = classic_model(&z, &profile, &bag).unwrap();
        assert!(classic.outliers.is_empty());
        assert_eq!(classic.loop_hull, convex_hull(&z).unwrap());
        assert!(lambda_data(&z, &[0, 1, 2, 3], &bag.polygon, profile.median).unwrap() <= 1.0 + 1e-12);
    }
}
