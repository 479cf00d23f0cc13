//! The central bag: a convex region holding about half of the deepest
//! observations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Point2;
use crate::depth::{depth_region, DepthError, DepthProfile};
use crate::geometry::{containment, containment_band, Containment, convex_hull, radial_interpolate, ConvexPolygon, GeometryError, DEFAULT_TOLERANCE};

/// Relative thickness given to zero-area bags, in units of data diameter.
pub const DEGENERATE_THICKNESS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum BagError {
    #[error("need at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("depth profile has {profile} entries for {n} points")]
    ProfileMismatch { profile: usize, n: usize },
    #[error(transparent)]
    Depth(#[from] DepthError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bag {
    pub polygon: ConvexPolygon,
    /// Depth level k* whose region is the outer contour of the bag.
    pub inner_k: usize,
    /// Position between hull(D_{k*+1}) (0) and hull(D_{k*}) (1).
    pub interpolation_t: f64,
    pub contained_count: usize,
    /// The deepest region had no area and was thickened.
    pub degenerate: bool,
    /// Center of the radial interpolation when it differs from the median.
    pub interpolation_center: Option<Point2>,
}

fn data_diameter(points: &[Point2]) -> f64 {
    convex_hull(points).map(|h| h.diameter()).unwrap_or(0.0)
}

fn covered_count(points: &[Point2], poly: &ConvexPolygon) -> usize {
    let band = DEFAULT_TOLERANCE * poly.diameter();
    points
        .iter()
        .filter(|&&z| containment_band(z, poly, band).is_ok_and(|c| c.is_covered()))
        .count()
}

/// Gives a flat inner region some area without leaving `outer`: adds a small
/// copy of `outer` shrunk toward a point slightly inside both.
fn widen_inside(inner: &ConvexPolygon, outer: &ConvexPolygon) -> (ConvexPolygon, Point2) {
    const SHRINK: f64 = 1e-6;
    let mid = inner.vertices.iter().fold(Point2::new(0.0, 0.0), |acc, &v| acc + v) * (1.0 / inner.len() as f64);
    let center = mid + (outer.centroid() - mid) * SHRINK;
    let mut pts = inner.vertices.clone();
    pts.extend(outer.vertices.iter().map(|&v| center + (v - center) * SHRINK));
    let widened = convex_hull(&pts).expect("non-empty");
    (widened, center)
}

/// Builds the bag from the depth profile.
///
/// With target = ⌈n/2⌉ and k* the largest depth with |D_k*| ≥ target, the
/// bag is hull(D_k*) when that count is exact or no deeper region exists.
/// Otherwise it is interpolated between hull(D_{k*+1}) and hull(D_k*) with
/// t = (target − |D_{k*+1}|)/(|D_k*| − |D_{k*+1}|), raised if needed until
/// the polygon covers at least `target` points. If the depth median still
/// lies on the boundary, the bag is widened toward hull(D_{k*−1}) just
/// enough to hold it strictly inside.
pub fn construct_bag(points: &[Point2], profile: &DepthProfile) -> Result<Bag, BagError> {
    let bag = contour_bag(points, profile)?;
    if bag.inner_k <= 1 || containment(profile.median, &bag.polygon, DEFAULT_TOLERANCE)? == Containment::Inside {
        return Ok(bag);
    }
    // the median sits on the contour: grow toward the next outer contour
    let eps = DEGENERATE_THICKNESS * data_diameter(points);
    let wider = depth_region(points, profile, bag.inner_k - 1)?.thickened(eps);
    if containment(profile.median, &wider, DEFAULT_TOLERANCE)? != Containment::Inside {
        return Ok(bag);
    }
    let center = bag.polygon.centroid();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let candidate = radial_interpolate(&bag.polygon, &wider, mid, center)?;
        if containment(profile.median, &candidate, DEFAULT_TOLERANCE)? == Containment::Inside {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let polygon = radial_interpolate(&bag.polygon, &wider, hi, center)?;
    Ok(Bag {
        contained_count: covered_count(points, &polygon),
        polygon,
        interpolation_center: Some(center),
        ..bag
    })
}

fn contour_bag(points: &[Point2], profile: &DepthProfile) -> Result<Bag, BagError> {
    let n = points.len();
    if n < 4 {
        return Err(BagError::TooFewPoints(n));
    }
    if profile.depths.len() != n {
        return Err(BagError::ProfileMismatch { profile: profile.depths.len(), n });
    }
    let target = n.div_ceil(2);
    let k_star = (1..=profile.max_depth)
        .rev()
        .find(|&k| profile.region_size(k) >= target)
        .unwrap_or(1);
    let outer_count = profile.region_size(k_star);
    let inner_count = profile.region_size(k_star + 1);
    let eps = DEGENERATE_THICKNESS * data_diameter(points);

    let outer = depth_region(points, profile, k_star)?;
    if outer_count == target || inner_count == 0 {
        let degenerate = outer.is_degenerate();
        let polygon = outer.thickened(eps);
        let contained_count = covered_count(points, &polygon);
        return Ok(Bag {
            polygon,
            inner_k: k_star,
            interpolation_t: 1.0,
            contained_count,
            degenerate,
            interpolation_center: None,
        });
    }

    let degenerate = outer.is_degenerate();
    let outer = outer.thickened(eps);
    let inner = depth_region(points, profile, k_star + 1)?;
    let median = profile.median;
    let (inner, center) = if inner.is_degenerate() {
        widen_inside(&inner, &outer)
    } else if containment(median, &inner, DEFAULT_TOLERANCE)? == Containment::Inside {
        (inner, median)
    } else {
        let c = inner.centroid();
        (inner, c)
    };

    let t0 = (target - inner_count) as f64 / (outer_count - inner_count) as f64;
    let mut t = t0;
    let mut polygon = radial_interpolate(&inner, &outer, t, center)?;
    let mut contained_count = covered_count(points, &polygon);
    if contained_count < target {
        // coverage is monotone in t; bisect for the smallest sufficient t
        let (mut lo, mut hi) = (t0, 1.0);
        let mut best = (outer.clone(), covered_count(points, &outer), 1.0);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            let candidate = radial_interpolate(&inner, &outer, mid, center)?;
            let count = covered_count(points, &candidate);
            if count >= target {
                hi = mid;
                best = (candidate, count, mid);
            } else {
                lo = mid;
            }
        }
        (polygon, contained_count, t) = best;
    }
    Ok(Bag {
        polygon,
        inner_k: k_star,
        interpolation_t: t,
        contained_count,
        degenerate,
        interpolation_center: (center != median).then_some(center),
    })
}
