//! Halfspace (Tukey) depth.
//!
//! The exact routine sweeps the circle of halfplane normals around the
//! query point; the directional routine scans a fixed set of equispaced
//! directions and is an upper bound of the exact depth.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Point2;
use crate::geometry::{convex_hull, ConvexPolygon, GeometryError};

/// Above this sample size the directional approximation is the default.
pub const EXACT_DEPTH_LIMIT: usize = 5000;
pub const DEFAULT_DIRECTIONS: usize = 360;

#[derive(Debug, Error, PartialEq)]
pub enum DepthError {
    #[error("direction count must be at least 2, got {0}")]
    BadDirectionCount(usize),
    #[error("no data point has depth >= {0}")]
    EmptyRegion(usize),
    #[error("empty data")]
    EmptyData,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthMode {
    Exact,
    Approx { directions: usize },
}

impl DepthMode {
    pub fn auto(n: usize) -> Self {
        if n <= EXACT_DEPTH_LIMIT {
            DepthMode::Exact
        } else {
            DepthMode::Approx { directions: DEFAULT_DIRECTIONS }
        }
    }
}

/// How the depth median is formed when several points share the maximum
/// depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MedianRule {
    /// Arithmetic mean of the deepest points.
    #[default]
    Centroid,
    /// Coordinate-wise median of the deepest points.
    CoordinateMedian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthProfile {
    pub depths: Vec<usize>,
    pub max_depth: usize,
    pub deepest_set: Vec<usize>,
    pub median: Point2,
    pub mode: DepthMode,
    pub median_rule: MedianRule,
}

impl DepthProfile {
    /// Indices of points with depth at least `k`.
    pub fn region_indices(&self, k: usize) -> Vec<usize> {
        (0..self.depths.len()).filter(|&i| self.depths[i] >= k).collect()
    }

    pub fn region_size(&self, k: usize) -> usize {
        self.depths.iter().filter(|&&d| d >= k).count()
    }
}

/// Pseudo-angle of a direction: strictly increasing with the angle in
/// (-π, π], with −0.0 treated as +0.0 so that the negative x-axis maps to
/// the top of the range. Parallel vectors with exactly representable
/// coordinates get identical keys since the ratio is correctly rounded.
fn angle_key(v: Point2) -> f64 {
    let a = 1.0 - v.x / (v.x.abs() + v.y.abs());
    if v.y >= 0.0 {
        a
    } else {
        -a
    }
}

fn same_direction(a: Point2, b: Point2) -> bool {
    a.cross(b) == 0.0 && a.dot(b) > 0.0
}

/// Exact halfspace depth of `theta`: the minimum number of points of
/// `data` in a closed halfplane whose boundary passes through `theta`.
pub fn halfspace_depth_exact(theta: Point2, data: &[Point2]) -> usize {
    ExactDepth::default().depth(theta, data)
}

/// Reusable buffers for repeated exact depth queries.
#[derive(Default)]
struct ExactDepth {
    offsets: Vec<Point2>,
    /// (angle key, 2·arc + is_end)
    events: Vec<(f64, u32)>,
    group: Vec<u32>,
    start_group: Vec<u32>,
    end_group: Vec<u32>,
}

impl ExactDepth {
    fn event_dir(&self, code: u32) -> Point2 {
        let v = self.offsets[(code >> 1) as usize];
        if code & 1 == 0 {
            Point2::new(v.y, -v.x)
        } else {
            v.perp()
        }
    }

    fn depth(&mut self, theta: Point2, data: &[Point2]) -> usize {
        self.offsets.clear();
        let mut coincident = 0;
        for &z in data {
            let v = z - theta;
            if v.x == 0.0 && v.y == 0.0 {
                coincident += 1;
            } else {
                self.offsets.push(v);
            }
        }
        let m = self.offsets.len();
        if m == 0 {
            return coincident;
        }

        // Point i lies in the closed halfplane with inward normal u iff u is
        // on the closed half-circle arc from rot(v_i, -90°) to rot(v_i, +90°).
        // The minimum coverage is attained on an open gap between arc ends.
        self.events.clear();
        for (arc, &v) in self.offsets.iter().enumerate() {
            let code = 2 * arc as u32;
            self.events.push((angle_key(Point2::new(v.y, -v.x)), code));
            self.events.push((angle_key(v.perp()), code + 1));
        }
        self.events.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let len = self.events.len();
        self.group.clear();
        self.group.push(0);
        for e in 1..len {
            let (prev, cur) = (self.events[e - 1], self.events[e]);
            let tied = cur.0 == prev.0 || same_direction(self.event_dir(cur.1), self.event_dir(prev.1));
            let g = self.group[e - 1] + u32::from(!tied);
            self.group.push(g);
        }
        self.start_group.resize(m, 0);
        self.end_group.resize(m, 0);
        for (e, &(_, code)) in self.events.iter().enumerate() {
            let arc = (code >> 1) as usize;
            if code & 1 == 0 {
                self.start_group[arc] = self.group[e];
            } else {
                self.end_group[arc] = self.group[e];
            }
        }
        // Arcs that wrap past the last event cover the gap preceding the first.
        let mut coverage = (0..m).filter(|&a| self.start_group[a] > self.end_group[a]).count() as i64;
        let mut best = coverage;
        let mut e = 0;
        while e < len {
            let g = self.group[e];
            while e < len && self.group[e] == g {
                coverage += if self.events[e].1 & 1 == 0 { 1 } else { -1 };
                e += 1;
            }
            best = best.min(coverage);
        }
        coincident + best as usize
    }
}

fn direction(k: usize, directions: usize) -> Point2 {
    let a = PI * k as f64 / directions as f64;
    Point2::new(a.cos(), a.sin())
}

/// Projections closer than this are ties; rounding in the direction vector
/// would otherwise split points lying on a common line.
fn projection_tie<'a>(points: impl IntoIterator<Item = &'a Point2>) -> f64 {
    1e-12 * points.into_iter().map(|p| p.x.abs() + p.y.abs()).fold(0.0, f64::max)
}

/// Directional approximation over `directions` equispaced unit vectors on
/// the upper half circle, counting both closed sides of each line.
pub fn halfspace_depth_approx(theta: Point2, data: &[Point2], directions: usize) -> Result<usize, DepthError> {
    if directions < 2 {
        return Err(DepthError::BadDirectionCount(directions));
    }
    let tie = projection_tie(data.iter().chain([&theta]));
    let mut best = usize::MAX;
    for k in 0..directions {
        let u = direction(k, directions);
        let at = theta.dot(u);
        let (mut ge, mut le) = (0, 0);
        for &z in data {
            let s = z.dot(u);
            ge += usize::from(s >= at - tie);
            le += usize::from(s <= at + tie);
        }
        best = best.min(ge.min(le));
    }
    Ok(best)
}

/// Directional depth of every data point at once: one sort per direction.
fn approx_depths(data: &[Point2], directions: usize) -> Vec<usize> {
    let n = data.len();
    let mut depths = vec![usize::MAX; n];
    let mut proj = vec![0.0; n];
    let mut sorted = vec![0.0; n];
    let tie = projection_tie(data);
    for k in 0..directions {
        let u = direction(k, directions);
        for (p, &z) in proj.iter_mut().zip(data) {
            *p = z.dot(u);
        }
        sorted.copy_from_slice(&proj);
        sorted.sort_by(f64::total_cmp);
        for (d, &s) in depths.iter_mut().zip(&proj) {
            let below = sorted.partition_point(|&v| v < s - tie);
            let at_or_below = sorted.partition_point(|&v| v <= s + tie);
            *d = (*d).min((n - below).min(at_or_below));
        }
    }
    depths
}

fn coordinate_median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

/// Depth of every data point with respect to the whole sample, plus the
/// depth median.
pub fn depth_profile(data: &[Point2], mode: DepthMode, rule: MedianRule) -> Result<DepthProfile, DepthError> {
    if data.is_empty() {
        return Err(DepthError::EmptyData);
    }
    let depths = match mode {
        DepthMode::Exact => {
            let mut work = ExactDepth::default();
            data.iter().map(|&z| work.depth(z, data)).collect::<Vec<_>>()
        }
        DepthMode::Approx { directions } => {
            if directions < 2 {
                return Err(DepthError::BadDirectionCount(directions));
            }
            approx_depths(data, directions)
        }
    };
    let max_depth = *depths.iter().max().expect("non-empty");
    let deepest_set: Vec<usize> = (0..data.len()).filter(|&i| depths[i] == max_depth).collect();
    let median = match rule {
        MedianRule::Centroid => {
            let m = deepest_set.len() as f64;
            let (sx, sy) = deepest_set
                .iter()
                .fold((0.0, 0.0), |(sx, sy), &i| (sx + data[i].x, sy + data[i].y));
            Point2::new(sx / m, sy / m)
        }
        MedianRule::CoordinateMedian => {
            let mut xs: Vec<f64> = deepest_set.iter().map(|&i| data[i].x).collect();
            let mut ys: Vec<f64> = deepest_set.iter().map(|&i| data[i].y).collect();
            Point2::new(coordinate_median(&mut xs), coordinate_median(&mut ys))
        }
    };
    Ok(DepthProfile { depths, max_depth, deepest_set, median, mode, median_rule: rule })
}

/// Convex hull of the data points with depth at least `k`.
pub fn depth_region(data: &[Point2], profile: &DepthProfile, k: usize) -> Result<ConvexPolygon, DepthError> {
    let members: Vec<Point2> = profile.region_indices(k).into_iter().map(|i| data[i]).collect();
    if members.is_empty() {
        return Err(DepthError::EmptyRegion(k));
    }
    Ok(convex_hull(&members)?)
}
