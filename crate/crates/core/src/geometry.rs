//! Convex polygon primitives: hull, containment, ray casting, scaling and
//! radial interpolation between nested polygons.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Point2;

/// Boundary tolerance, relative to the polygon diameter.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("empty input")]
    EmptyInput,
    #[error("polygon has no area")]
    DegeneratePolygon,
    #[error("center is not strictly inside the polygon")]
    CenterNotInterior,
    #[error("ray direction is zero")]
    ZeroDirection,
    #[error("scale factor must be positive, got {0}")]
    NonPositiveFactor(f64),
    #[error("inner polygon is not contained in outer polygon")]
    NotNested,
    #[error("interpolation parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Area,
    Segment,
    Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    OnBoundary,
    Outside,
}

impl Containment {
    /// Closed-region membership.
    pub fn is_covered(self) -> bool {
        self != Containment::Outside
    }
}

/// Convex polygon with counterclockwise vertices and no three consecutive
/// collinear. Segments and single points keep their 2 or 1 vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    pub vertices: Vec<Point2>,
    pub shape: Shape,
}

fn lex(a: &Point2, b: &Point2) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

fn turn(o: Point2, a: Point2, b: Point2) -> f64 {
    (a - o).cross(b - o)
}

/// Andrew's monotone chain. Collinear boundary points are dropped.
pub fn convex_hull(points: &[Point2]) -> Result<ConvexPolygon, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    let mut pts = points.to_vec();
    pts.sort_by(lex);
    pts.dedup();
    if pts.len() == 1 {
        return Ok(ConvexPolygon { vertices: pts, shape: Shape::Point });
    }

    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    let shape = if hull.len() >= 3 { Shape::Area } else { Shape::Segment };
    if shape == Shape::Segment {
        hull.truncate(2);
    }
    Ok(ConvexPolygon { vertices: hull, shape })
}

impl ConvexPolygon {
    pub fn is_degenerate(&self) -> bool {
        self.shape != Shape::Area
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as `(start, end)` pairs in counterclockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut best = 0.0f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                best = best.max(v[i].distance(v[j]));
            }
        }
        best
    }

    pub fn area(&self) -> f64 {
        self.edges().map(|(a, b)| a.cross(b)).sum::<f64>() / 2.0
    }

    /// Area centroid; vertex mean for degenerate shapes.
    pub fn centroid(&self) -> Point2 {
        let a = self.area();
        if self.is_degenerate() || a == 0.0 {
            let n = self.vertices.len() as f64;
            let s = self.vertices.iter().fold(Point2::default(), |acc, &p| acc + p);
            return s * (1.0 / n);
        }
        let origin = self.vertices[0];
        let (mut cx, mut cy) = (0.0, 0.0);
        for (p, q) in self.edges() {
            let (p, q) = (p - origin, q - origin);
            let w = p.cross(q);
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        origin + Point2::new(cx, cy) * (1.0 / (6.0 * a))
    }

    /// Fattens a segment or point into a thin rectangle of half-width `eps`.
    pub fn thickened(&self, eps: f64) -> ConvexPolygon {
        match self.shape {
            Shape::Area => self.clone(),
            Shape::Point => {
                let c = self.vertices[0];
                let vertices = vec![
                    c + Point2::new(-eps, -eps),
                    c + Point2::new(eps, -eps),
                    c + Point2::new(eps, eps),
                    c + Point2::new(-eps, eps),
                ];
                ConvexPolygon { vertices, shape: Shape::Area }
            }
            Shape::Segment => {
                let (a, b) = (self.vertices[0], self.vertices[1]);
                let dir = b - a;
                let n = dir.perp() * (eps / dir.norm());
                let vertices = vec![a - n, b - n, b + n, a + n];
                ConvexPolygon { vertices, shape: Shape::Area }
            }
        }
    }
}

fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Classifies `p` against a non-degenerate polygon. Points within
/// `tol × diameter` of the boundary are `OnBoundary`.
pub fn containment(p: Point2, poly: &ConvexPolygon, tol: f64) -> Result<Containment, GeometryError> {
    containment_band(p, poly, tol * poly.diameter())
}

/// As [`containment`] with the boundary band given in data units, for
/// callers that test many points against one polygon.
pub fn containment_band(p: Point2, poly: &ConvexPolygon, band: f64) -> Result<Containment, GeometryError> {
    if poly.is_degenerate() {
        return Err(GeometryError::DegeneratePolygon);
    }
    let mut inside = true;
    let mut min_signed = f64::INFINITY;
    for (a, b) in poly.edges() {
        let e = b - a;
        let s = e.cross(p - a) / e.norm();
        if s < 0.0 {
            inside = false;
        }
        min_signed = min_signed.min(s);
    }
    let dist = if inside {
        min_signed
    } else {
        poly.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    };
    Ok(if dist <= band {
        Containment::OnBoundary
    } else if inside {
        Containment::Inside
    } else {
        Containment::Outside
    })
}

/// Ray parameter `t` such that `center + t·dir` is the exit point.
fn exit_parameter(center: Point2, dir: Point2, poly: &ConvexPolygon) -> f64 {
    let mut best = f64::INFINITY;
    for (a, b) in poly.edges() {
        let e = b - a;
        let rate = e.cross(dir);
        if rate < 0.0 {
            let t = e.cross(center - a) / -rate;
            best = best.min(t);
        }
    }
    best
}

fn check_interior(center: Point2, poly: &ConvexPolygon) -> Result<(), GeometryError> {
    match containment(center, poly, DEFAULT_TOLERANCE)? {
        Containment::Inside => Ok(()),
        _ => Err(GeometryError::CenterNotInterior),
    }
}

/// Point where the ray from `center` through `through` leaves `poly`.
pub fn ray_boundary_intersection(center: Point2, through: Point2, poly: &ConvexPolygon) -> Result<Point2, GeometryError> {
    check_interior(center, poly)?;
    let dir = through - center;
    if dir.x == 0.0 && dir.y == 0.0 {
        return Err(GeometryError::ZeroDirection);
    }
    Ok(center + dir * exit_parameter(center, dir, poly))
}

/// Ratio ‖through − center‖ / ‖b − center‖ where b is the boundary exit
/// point of the ray center→through. Equals the magnification about
/// `center` that places `through` on the boundary.
pub fn ray_ratio(center: Point2, through: Point2, poly: &ConvexPolygon) -> Result<f64, GeometryError> {
    check_interior(center, poly)?;
    let dir = through - center;
    if dir.x == 0.0 && dir.y == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / exit_parameter(center, dir, poly))
}

/// Maps every vertex v to `center + factor·(v − center)`.
pub fn scale_polygon(poly: &ConvexPolygon, center: Point2, factor: f64) -> Result<ConvexPolygon, GeometryError> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(GeometryError::NonPositiveFactor(factor));
    }
    if factor == 1.0 {
        return Ok(poly.clone());
    }
    let vertices = poly.vertices.iter().map(|&v| center + (v - center) * factor).collect();
    Ok(ConvexPolygon { vertices, shape: poly.shape })
}

/// Boundary between `inner` and `outer` along a shared fan of rays from
/// `center`: each radius is `r_inner + t·(r_outer − r_inner)`. The fan is
/// the union of both polygons' vertex directions; the result is re-hulled.
pub fn radial_interpolate(
    inner: &ConvexPolygon,
    outer: &ConvexPolygon,
    t: f64,
    center: Point2,
) -> Result<ConvexPolygon, GeometryError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(GeometryError::ParameterOutOfRange(t));
    }
    if outer.is_degenerate() {
        return Err(GeometryError::DegeneratePolygon);
    }
    check_interior(center, inner)?;
    for &v in &inner.vertices {
        if !containment(v, outer, DEFAULT_TOLERANCE)?.is_covered() {
            return Err(GeometryError::NotNested);
        }
    }
    if t == 0.0 {
        return Ok(inner.clone());
    }
    if t == 1.0 {
        return Ok(outer.clone());
    }

    let fan: Vec<Point2> = inner
        .vertices
        .iter()
        .chain(&outer.vertices)
        .map(|&v| v - center)
        .collect();
    let boundary: Vec<Point2> = fan
        .iter()
        .map(|&dir| {
            let r_in = exit_parameter(center, dir, inner);
            let r_out = exit_parameter(center, dir, outer).max(r_in);
            center + dir * (r_in + t * (r_out - r_in))
        })
        .collect();
    let hull = convex_hull(&boundary)?;
    // merge vertices that differ only by rounding, they would form edges
    // with meaningless orientation
    let eps = 1e-12 * outer.diameter();
    let mut vertices: Vec<Point2> = Vec::with_capacity(hull.len());
    for &v in &hull.vertices {
        if vertices.last().is_none_or(|&u: &Point2| u.distance(v) > eps) {
            vertices.push(v);
        }
    }
    while vertices.len() > 1 && vertices[0].distance(*vertices.last().unwrap()) <= eps {
        vertices.pop();
    }
    convex_hull(&vertices)
}
