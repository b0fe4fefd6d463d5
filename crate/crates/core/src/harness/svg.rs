//! Standalone SVG figures for the PCA plane.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::LexicalCategory;
use crate::error::{Error, Result};
use crate::geometry::{Point2, Region2};

const WIDTH: f64 = 520.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const STYLES: [(&str, &str); 2] = [("#1f77b4", "circle"), ("#d95f02", "square")];

struct Frame {
    min: Point2,
    max: Point2,
}

impl Frame {
    fn around<'a>(points: impl IntoIterator<Item = &'a Point2>) -> Self {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min = Point2::new(min.x.min(p.x), min.y.min(p.y));
            max = Point2::new(max.x.max(p.x), max.y.max(p.y));
        }
        if !min.x.is_finite() {
            return Frame { min: Point2::new(-1.0, -1.0), max: Point2::new(1.0, 1.0) };
        }
        let pad = |lo: f64, hi: f64| {
            let span = hi - lo;
            let p = if span > 0.0 { 0.06 * span } else { 0.5f64.max(lo.abs() * 0.1) };
            (lo - p, hi + p)
        };
        let (x0, x1) = pad(min.x, max.x);
        let (y0, y1) = pad(min.y, max.y);
        Frame { min: Point2::new(x0, y0), max: Point2::new(x1, y1) }
    }

    fn px(&self, p: Point2) -> (f64, f64) {
        let w = WIDTH - 2.0 * MARGIN;
        let h = HEIGHT - 2.0 * MARGIN;
        let x = MARGIN + (p.x - self.min.x) / (self.max.x - self.min.x) * w;
        let y = HEIGHT - MARGIN - (p.y - self.min.y) / (self.max.y - self.min.y) * h;
        (x, y)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r##"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<defs><marker id="arrowhead" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="8" markerHeight="8" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z" fill="#000"/></marker></defs>
<rect width="100%" height="100%" fill="#fff"/>
<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>
"##,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ =
        writeln!(out, r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#444"/>"##, r - l, b - t);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">PC1</text>"#, WIDTH / 2.0, HEIGHT - 18.0);
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">PC2</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
}

fn marker(out: &mut String, frame: &Frame, p: Point2, style: usize, class: &str) {
    let (x, y) = frame.px(p);
    let (color, shape) = STYLES[style % STYLES.len()];
    if shape == "circle" {
        let _ = writeln!(
            out,
            r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{color}" fill-opacity="0.75"/>"#
        );
    } else {
        let _ = writeln!(
            out,
            r#"<rect class="{class}" x="{:.2}" y="{:.2}" width="7" height="7" fill="{color}" fill-opacity="0.75"/>"#,
            x - 3.5,
            y - 3.5
        );
    }
}

fn legend(out: &mut String, categories: &[LexicalCategory]) {
    for (i, c) in categories.iter().enumerate() {
        let y = MARGIN + 14.0 + 16.0 * i as f64;
        let (color, shape) = STYLES[i % STYLES.len()];
        let x = WIDTH - MARGIN - 70.0;
        if shape == "circle" {
            let _ = writeln!(out, r#"<circle cx="{x}" cy="{}" r="4" fill="{color}"/>"#, y - 4.0);
        } else {
            let _ = writeln!(out, r#"<rect x="{}" y="{}" width="8" height="8" fill="{color}"/>"#, x - 4.0, y - 8.0);
        }
        let _ = writeln!(out, r#"<text x="{}" y="{y}">{}</text>"#, x + 10.0, c.as_str());
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Exemplar scatter with a novel token's path drawn as an arrow from its
/// first to its last point. A path that never moves is drawn as a single
/// ringed point.
pub fn movement_svg(title: &str, exemplars: &BTreeMap<LexicalCategory, Vec<Point2>>, trajectory: &[Point2]) -> String {
    assert!(!trajectory.is_empty(), "trajectory needs at least one point");
    let frame = Frame::around(exemplars.values().flatten().chain(trajectory));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out);
    let cats: Vec<LexicalCategory> = exemplars.keys().copied().collect();
    for (i, pts) in exemplars.values().enumerate() {
        for &p in pts {
            marker(&mut out, &frame, p, i, "exemplar");
        }
    }
    legend(&mut out, &cats);
    let first = trajectory[0];
    if trajectory.iter().all(|&p| p == first) {
        let (x, y) = frame.px(first);
        let _ = writeln!(
            out,
            r##"<circle class="stationary" cx="{x:.2}" cy="{y:.2}" r="5" fill="none" stroke="#000" stroke-width="2"/>"##
        );
    } else {
        let pts: Vec<String> = trajectory
            .iter()
            .map(|&p| {
                let (x, y) = frame.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let (x, y) = frame.px(first);
        let _ = writeln!(out, r##"<circle class="start" cx="{x:.2}" cy="{y:.2}" r="3" fill="#000"/>"##);
        let _ = writeln!(
            out,
            r##"<polyline class="trajectory" points="{}" fill="none" stroke="#000" stroke-width="1.5" marker-end="url(#arrowhead)"/>"##,
            pts.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Exemplar scatter with each fitted region's 2-sigma ellipse and the points
/// sampled from it.
pub fn region_svg(
    title: &str,
    exemplars: &BTreeMap<LexicalCategory, Vec<Point2>>,
    regions: &BTreeMap<LexicalCategory, Region2>,
    samples: &BTreeMap<LexicalCategory, Vec<Point2>>,
) -> String {
    let frame = Frame::around(exemplars.values().flatten().chain(samples.values().flatten()));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out);
    let cats: Vec<LexicalCategory> = exemplars.keys().copied().collect();
    for (i, c) in cats.iter().enumerate() {
        let (color, _) = STYLES[i % STYLES.len()];
        for &p in &exemplars[c] {
            marker(&mut out, &frame, p, i, "exemplar");
        }
        if let Some(region) = regions.get(c) {
            let ([l1, l2], v) = region.principal_axes();
            let (a, b) = (2.0 * l1.max(0.0).sqrt(), 2.0 * l2.max(0.0).sqrt());
            let pts: Vec<String> = (0..64)
                .map(|k| {
                    let t = k as f64 / 64.0 * std::f64::consts::TAU;
                    let (u, w) = (a * t.cos(), b * t.sin());
                    let p = Point2::new(region.mean.x + u * v[0] - w * v[1], region.mean.y + u * v[1] + w * v[0]);
                    let (x, y) = frame.px(p);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polygon class="region" points="{}" fill="none" stroke="{color}" stroke-dasharray="4 3"/>"#,
                pts.join(" ")
            );
        }
        for &p in samples.get(c).map(Vec::as_slice).unwrap_or_default() {
            let (x, y) = frame.px(p);
            let _ = writeln!(
                out,
                r#"<path class="sample" d="M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}" stroke="{color}" stroke-width="1.5"/>"#,
                x - 4.0,
                y - 4.0,
                x + 4.0,
                y + 4.0,
                x - 4.0,
                y + 4.0,
                x + 4.0,
                y - 4.0
            );
        }
    }
    legend(&mut out, &cats);
    out.push_str("</svg>\n");
    out
}

pub fn render_movement_svg(
    title: &str,
    exemplars: &BTreeMap<LexicalCategory, Vec<Point2>>,
    trajectory: &[Point2],
    path: &Path,
) -> Result<()> {
    std::fs::write(path, movement_svg(title, exemplars, trajectory)).map_err(|e| Error::io(path, e))
}

pub fn render_region_svg(
    title: &str,
    exemplars: &BTreeMap<LexicalCategory, Vec<Point2>>,
    regions: &BTreeMap<LexicalCategory, Region2>,
    samples: &BTreeMap<LexicalCategory, Vec<Point2>>,
    path: &Path,
) -> Result<()> {
    std::fs::write(path, region_svg(title, exemplars, regions, samples)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fit_region;
    use LexicalCategory::*;

    fn exemplars() -> BTreeMap<LexicalCategory, Vec<Point2>> {
        let mut m = BTreeMap::new();
        m.insert(Noun, vec![Point2::new(-1.0, 0.1), Point2::new(-1.2, -0.1), Point2::new(-0.9, 0.0)]);
        m.insert(Adj, vec![Point2::new(1.0, 0.2), Point2::new(1.1, -0.2), Point2::new(0.8, 0.1)]);
        m
    }

    fn count(doc: &roxmltree::Document, tag: &str, class: &str) -> usize {
        doc.descendants().filter(|n| n.has_tag_name(tag) && n.attribute("class") == Some(class)).count()
    }

    #[test]
    fn movement_figure_is_well_formed() {
        let svg = movement_svg(
            "wug <noun>",
            &exemplars(),
            &[Point2::new(0.0, 0.0), Point2::new(-0.5, 0.0), Point2::new(-0.9, 0.05)],
        );
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert!(doc.root_element().has_tag_name("svg"));
        assert_eq!(count(&doc, "circle", "exemplar"), 3);
        assert_eq!(count(&doc, "rect", "exemplar"), 3);
        assert_eq!(count(&doc, "polyline", "trajectory"), 1);
        assert_eq!(count(&doc, "circle", "stationary"), 0);
        let line = doc.descendants().find(|n| n.has_tag_name("polyline")).unwrap();
        assert_eq!(line.attribute("marker-end"), Some("url(#arrowhead)"));
        let texts: Vec<&str> = doc.descendants().filter_map(|n| n.text()).collect();
        assert!(texts.contains(&"PC1") && texts.contains(&"PC2"));
    }

    #[test]
    fn stationary_path_is_a_point() {
        let p = Point2::new(0.3, 0.0);
        for path in [vec![p], vec![p, p, p]] {
            let svg = movement_svg("still", &exemplars(), &path);
            let doc = roxmltree::Document::parse(&svg).unwrap();
            assert_eq!(count(&doc, "circle", "stationary"), 1);
            assert_eq!(count(&doc, "polyline", "trajectory"), 0);
        }
    }

    #[test]
    fn region_figure_is_well_formed() {
        let ex = exemplars();
        let regions: BTreeMap<_, _> = ex.iter().map(|(&c, p)| (c, fit_region(c, p).unwrap())).collect();
        let mut samples = BTreeMap::new();
        samples.insert(Noun, vec![Point2::new(-1.0, 0.0); 4]);
        samples.insert(Adj, vec![Point2::new(1.0, 0.0); 4]);
        let svg = region_svg("noun-adj", &ex, &regions, &samples);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert!(doc.root_element().has_tag_name("svg"));
        assert_eq!(count(&doc, "polygon", "region"), 2);
        assert_eq!(count(&doc, "path", "sample"), 8);
    }
}
