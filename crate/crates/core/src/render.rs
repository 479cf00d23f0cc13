//! Deterministic SVG output.
//!
//! Layers, bottom to top: whiskers, bag, fence (or loop), points, outlier
//! markers, median star. All numbers are written with six decimals.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dataset::Point2;
use crate::fence::{BagplotModel, Classification, ClassicModel};
use crate::geometry::ConvexPolygon;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("model has no points")]
    EmptyModel,
    #[error("invalid style: {0}")]
    BadStyle(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    pub width: f64,
    pub height: f64,
    /// Fraction of each canvas side left empty.
    pub margin: f64,
    pub background: String,
    pub bag_fill: String,
    pub bag_opacity: f64,
    pub fence_stroke: String,
    pub fence_dash: String,
    pub loop_stroke: String,
    pub whisker_color: String,
    pub whisker_width: f64,
    /// Whisker opacity at the bag boundary.
    pub alpha_start: f64,
    /// Whisker opacity at the data point.
    pub alpha_end: f64,
    pub point_radius: f64,
    pub point_color: String,
    pub outlier_color: String,
    pub outlier_size: f64,
    pub median_color: String,
    pub median_radius: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            width: 800.0,
            height: 600.0,
            margin: 0.08,
            background: "#ffffff".into(),
            bag_fill: "#4c72b0".into(),
            bag_opacity: 0.55,
            fence_stroke: "#4c72b0".into(),
            fence_dash: "6 4".into(),
            loop_stroke: "#55a868".into(),
            whisker_color: "#4c72b0".into(),
            whisker_width: 1.5,
            alpha_start: 0.05,
            alpha_end: 0.9,
            point_radius: 3.0,
            point_color: "#222222".into(),
            outlier_color: "#c44e52".into(),
            outlier_size: 5.0,
            median_color: "#dd8452".into(),
            median_radius: 8.0,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<(), RenderError> {
        let unit = |a: f64| (0.0..=1.0).contains(&a);
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(RenderError::BadStyle("canvas must have positive size".into()));
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(RenderError::BadStyle("margin must be in [0, 0.5)".into()));
        }
        if !(unit(self.alpha_start) && unit(self.alpha_end) && unit(self.bag_opacity)) {
            return Err(RenderError::BadStyle("opacities must lie in [0, 1]".into()));
        }
        if self.alpha_start >= self.alpha_end {
            return Err(RenderError::BadStyle("whisker opacity must increase toward the point".into()));
        }
        Ok(())
    }
}

fn num(v: f64) -> String {
    // avoid "-0.000000"
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        s.trim_start_matches('-').to_owned()
    } else {
        s
    }
}

/// Data → pixel map for one panel: bounding box centered, aspect kept,
/// y pointing up.
#[derive(Debug, Clone, Copy)]
pub struct Viewport {
    scale: f64,
    data_center: Point2,
    pixel_center: Point2,
}

impl Viewport {
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a Point2>, style: &RenderStyle) -> Self {
        let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let avail_w = style.width * (1.0 - 2.0 * style.margin);
        let avail_h = style.height * (1.0 - 2.0 * style.margin);
        let (dx, dy) = (hi.x - lo.x, hi.y - lo.y);
        let scale = match (dx > 0.0, dy > 0.0) {
            (true, true) => (avail_w / dx).min(avail_h / dy),
            (true, false) => avail_w / dx,
            (false, true) => avail_h / dy,
            (false, false) => 1.0,
        };
        Viewport {
            scale,
            data_center: (lo + hi) * 0.5,
            pixel_center: Point2::new(style.width / 2.0, style.height / 2.0),
        }
    }

    pub fn to_pixel(&self, p: Point2) -> Point2 {
        let d = p - self.data_center;
        Point2::new(self.pixel_center.x + d.x * self.scale, self.pixel_center.y - d.y * self.scale)
    }

    pub fn to_data(&self, q: Point2) -> Point2 {
        Point2::new(
            self.data_center.x + (q.x - self.pixel_center.x) / self.scale,
            self.data_center.y - (q.y - self.pixel_center.y) / self.scale,
        )
    }
}

fn polygon_points(poly: &ConvexPolygon, vp: &Viewport) -> String {
    poly.vertices
        .iter()
        .map(|&v| {
            let q = vp.to_pixel(v);
            format!("{},{}", num(q.x), num(q.y))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn star_points(c: Point2, r: f64) -> String {
    (0..10)
        .map(|k| {
            let radius = if k % 2 == 0 { r } else { 0.4 * r };
            let a = std::f64::consts::PI * (k as f64 / 5.0 - 0.5);
            format!("{},{}", num(c.x + radius * a.cos()), num(c.y + radius * a.sin()))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Shared drawing state for one panel.
struct Panel<'a> {
    style: &'a RenderStyle,
    vp: Viewport,
    /// Prefix keeping gradient ids unique when panels share a document.
    id_prefix: &'a str,
    defs: String,
    body: String,
}

impl<'a> Panel<'a> {
    fn new(style: &'a RenderStyle, vp: Viewport, id_prefix: &'a str) -> Self {
        Panel { style, vp, id_prefix, defs: String::new(), body: String::new() }
    }

    fn whisker(&mut self, index: usize, start: Point2, end: Point2) {
        let (a, b) = (self.vp.to_pixel(start), self.vp.to_pixel(end));
        let s = self.style;
        let id = format!("{}whisker-{index}", self.id_prefix);
        let _ = writeln!(
            self.defs,
            r#"<linearGradient id="{id}" gradientUnits="userSpaceOnUse" x1="{}" y1="{}" x2="{}" y2="{}"><stop offset="0" stop-color="{c}" stop-opacity="{}"/><stop offset="1" stop-color="{c}" stop-opacity="{}"/></linearGradient>"#,
            num(a.x),
            num(a.y),
            num(b.x),
            num(b.y),
            num(s.alpha_start),
            num(s.alpha_end),
            c = s.whisker_color,
        );
        let _ = writeln!(
            self.body,
            r#"<line class="whisker" x1="{}" y1="{}" x2="{}" y2="{}" stroke="url(#{id})" stroke-width="{}"/>"#,
            num(a.x),
            num(a.y),
            num(b.x),
            num(b.y),
            num(s.whisker_width),
        );
    }

    fn bag(&mut self, poly: &ConvexPolygon) {
        let _ = writeln!(
            self.body,
            r#"<polygon class="bag" points="{}" fill="{}" fill-opacity="{}" stroke="{}" stroke-width="1"/>"#,
            polygon_points(poly, &self.vp),
            self.style.bag_fill,
            num(self.style.bag_opacity),
            self.style.bag_fill,
        );
    }

    fn fence(&mut self, poly: &ConvexPolygon) {
        let _ = writeln!(
            self.body,
            r#"<polygon class="fence" points="{}" fill="none" stroke="{}" stroke-width="1.5" stroke-dasharray="{}"/>"#,
            polygon_points(poly, &self.vp),
            self.style.fence_stroke,
            self.style.fence_dash,
        );
    }

    fn loop_hull(&mut self, poly: &ConvexPolygon) {
        let _ = writeln!(
            self.body,
            r#"<polygon class="loop" points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            polygon_points(poly, &self.vp),
            self.style.loop_stroke,
        );
    }

    fn points(&mut self, points: &[Point2]) {
        for &p in points {
            let q = self.vp.to_pixel(p);
            let _ = writeln!(
                self.body,
                r#"<circle class="point" cx="{}" cy="{}" r="{}" fill="{}"/>"#,
                num(q.x),
                num(q.y),
                num(self.style.point_radius),
                self.style.point_color,
            );
        }
    }

    fn outlier(&mut self, p: Point2) {
        let q = self.vp.to_pixel(p);
        let h = self.style.outlier_size;
        let _ = writeln!(
            self.body,
            r#"<path class="outlier" d="M{} {}L{} {}M{} {}L{} {}" stroke="{}" stroke-width="2" fill="none"/>"#,
            num(q.x - h),
            num(q.y - h),
            num(q.x + h),
            num(q.y + h),
            num(q.x - h),
            num(q.y + h),
            num(q.x + h),
            num(q.y - h),
            self.style.outlier_color,
        );
    }

    fn median(&mut self, p: Point2) {
        let q = self.vp.to_pixel(p);
        let _ = writeln!(
            self.body,
            r#"<polygon class="median" points="{}" fill="{}" stroke="black" stroke-width="0.5"/>"#,
            star_points(q, self.style.median_radius),
            self.style.median_color,
        );
    }

    fn title(&mut self, text: &str) {
        let _ = writeln!(
            self.body,
            r#"<text class="title" x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14">{text}</text>"#,
            num(self.style.width / 2.0),
            num(self.style.height * self.style.margin * 0.6),
        );
    }

    fn background(&mut self) {
        let _ = writeln!(
            self.body,
            r#"<rect width="{}" height="{}" fill="{}"/>"#,
            num(self.style.width),
            num(self.style.height),
            self.style.background,
        );
    }
}

fn adaptive_panel<'a>(model: &BagplotModel, style: &'a RenderStyle, prefix: &'a str, title: Option<&str>) -> Result<Panel<'a>, RenderError> {
    if model.points.is_empty() {
        return Err(RenderError::EmptyModel);
    }
    let vp = Viewport::fit(model.points.iter().chain(&model.fence.vertices), style);
    let mut panel = Panel::new(style, vp, prefix);
    panel.background();
    for w in &model.whiskers {
        panel.whisker(w.index, w.start, w.end);
    }
    panel.bag(&model.bag.polygon);
    panel.fence(&model.fence);
    panel.points(&model.points);
    for (i, &c) in model.classification.iter().enumerate() {
        if c == Classification::Outlier {
            panel.outlier(model.points[i]);
        }
    }
    panel.median(model.median());
    if let Some(t) = title {
        panel.title(t);
    }
    Ok(panel)
}

fn classic_panel<'a>(model: &ClassicModel, style: &'a RenderStyle, prefix: &'a str, title: Option<&str>) -> Result<Panel<'a>, RenderError> {
    if model.points.is_empty() {
        return Err(RenderError::EmptyModel);
    }
    let vp = Viewport::fit(model.points.iter(), style);
    let mut panel = Panel::new(style, vp, prefix);
    panel.background();
    panel.bag(&model.bag.polygon);
    panel.loop_hull(&model.loop_hull);
    panel.points(&model.points);
    for &i in &model.outliers {
        panel.outlier(model.points[i]);
    }
    panel.median(model.median());
    if let Some(t) = title {
        panel.title(t);
    }
    Ok(panel)
}

fn document(width: f64, height: f64, defs: &str, body: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(width),
        h = num(height),
    );
    if !defs.is_empty() {
        let _ = write!(out, "<defs>\n{defs}</defs>\n");
    }
    out.push_str(body);
    out.push_str("</svg>\n");
    out
}

pub fn render_svg(model: &BagplotModel, style: &RenderStyle) -> Result<String, RenderError> {
    style.validate()?;
    let panel = adaptive_panel(model, style, "", None)?;
    Ok(document(style.width, style.height, &panel.defs, &panel.body))
}

pub fn render_classic_svg(model: &ClassicModel, style: &RenderStyle) -> Result<String, RenderError> {
    style.validate()?;
    let panel = classic_panel(model, style, "", None)?;
    Ok(document(style.width, style.height, &panel.defs, &panel.body))
}

/// 2×2 figure: classic panel top left, then the adaptive models in the
/// order given (row-major). Each panel has the size of `style`.
pub fn render_compare_svg(classic: &ClassicModel, models: &[(&str, &BagplotModel)], style: &RenderStyle) -> Result<String, RenderError> {
    style.validate()?;
    if models.len() != 3 {
        return Err(RenderError::BadStyle(format!("compare layout needs 3 adaptive panels, got {}", models.len())));
    }
    let mut panels = vec![classic_panel(classic, style, "p0-", Some("classic"))?];
    const PREFIXES: [&str; 3] = ["p1-", "p2-", "p3-"];
    for (prefix, (title, model)) in PREFIXES.iter().zip(models) {
        panels.push(adaptive_panel(model, style, prefix, Some(title))?);
    }
    let mut defs = String::new();
    let mut body = String::new();
    for (k, panel) in panels.iter().enumerate() {
        defs.push_str(&panel.defs);
        let (dx, dy) = ((k % 2) as f64 * style.width, (k / 2) as f64 * style.height);
        let _ = writeln!(body, r#"<g class="panel" transform="translate({},{})">"#, num(dx), num(dy));
        body.push_str(&panel.body);
        body.push_str("</g>\n");
    }
    Ok(document(2.0 * style.width, 2.0 * style.height, &defs, &body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::toy_dataset;
    use crate::inference::ErrorControl;
    use crate::pipeline::{FitConfig, Prepared};

    fn count(svg: &str, class: &str) -> usize {
        svg.matches(&format!(r#"class="{class}""#)).count()
    }

    #[test]
    fn toy_svg_elements() {
        let prepared = Prepared::new(toy_dataset().points(), &FitConfig::default()).unwrap();
        let model = prepared.model(ErrorControl::Fwer, 0.1).unwrap();
        let svg = render_svg(&model, &RenderStyle::default()).unwrap();
        assert_eq!(count(&svg, "whisker"), 3);
        assert_eq!(count(&svg, "bag"), 1);
        assert_eq!(count(&svg, "fence"), 1);
        assert_eq!(count(&svg, "point"), 8);
        assert_eq!(count(&svg, "outlier"), 1);
        assert_eq!(count(&svg, "median"), 1);
        assert_eq!(svg.matches("<linearGradient").count(), 3);
        let last_whisker = svg.rfind(r#"class="whisker""#).unwrap();
        let first_point = svg.find(r#"class="point""#).unwrap();
        assert!(last_whisker < first_point);
        assert!(svg.find(r#"class="bag""#).unwrap() < svg.find(r#"class="fence""#).unwrap());
        assert_eq!(svg, render_svg(&model, &RenderStyle::default()).unwrap());
    }

    #[test]
    fn points_fit_in_canvas_and_fence_maps_back() {
        let prepared = Prepared::new(toy_dataset().points(), &FitConfig::default()).unwrap();
        let model = prepared.model(ErrorControl::Pfer, 0.5).unwrap();
        let style = RenderStyle::default();
        let vp = Viewport::fit(model.points.iter().chain(&model.fence.vertices), &style);
        for &p in &model.points {
            let q = vp.to_pixel(p);
            assert!(q.x >= 0.0 && q.x <= style.width && q.y >= 0.0 && q.y <= style.height);
        }
        let svg = render_svg(&model, &style).unwrap();
        let line = svg.lines().find(|l| l.contains(r#"class="fence""#)).unwrap();
        let pts = line.split(r#"points=""#).nth(1).unwrap().split('"').next().unwrap();
        for (pair, v) in pts.split(' ').zip(&model.fence.vertices) {
            let (x, y) = pair.split_once(',').unwrap();
            let back = vp.to_data(Point2::new(x.parse().unwrap(), y.parse().unwrap()));
            assert!(back.distance(*v) < 1e-4);
        }
    }

    #[test]
    fn classic_and_compare() {
        let prepared = Prepared::new(toy_dataset().points(), &FitConfig::default()).unwrap();
        let classic = prepared.classic().unwrap();
        let svg = render_classic_svg(&classic, &RenderStyle::default()).unwrap();
        assert_eq!(count(&svg, "outlier"), 4);
        assert_eq!(count(&svg, "whisker"), 0);
        assert_eq!(count(&svg, "loop"), 1);
        let models: Vec<_> = ErrorControl::ALL.iter().map(|&m| prepared.model(m, m.default_level()).unwrap()).collect();
        let labelled: Vec<(&str, &BagplotModel)> = ErrorControl::ALL.iter().map(|m| m.label()).zip(&models).collect();
        let svg = render_compare_svg(&classic, &labelled, &RenderStyle::default()).unwrap();
        assert_eq!(count(&svg, "panel"), 4);
        assert_eq!(count(&svg, "whisker"), 9);
        let ids: Vec<&str> = svg.match_indices(r#"id=""#).map(|(i, _)| &svg[i + 4..i + 20]).collect();
        let mut unique = ids.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(ids.len(), unique.len());
    }

    #[test]
    fn style_is_checked() {
        let style = RenderStyle { alpha_start: 0.9, alpha_end: 0.1, ..RenderStyle::default() };
        assert!(style.validate().is_err());
        assert_eq!(num(-0.0000001), "0.000000");
        assert_eq!(num(-1.5), "-1.500000");
    }
}
