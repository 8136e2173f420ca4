//! Minimal SVG frames: polylines and point markers.

use std::fmt::Write;

use crate::geometry::Vec2;

/// One stroked path.
#[derive(Debug, Clone)]
pub struct Stroke {
    pub points: Vec<Vec2>,
    pub closed: bool,
    pub color: &'static str,
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub fn palette(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

/// Render strokes and markers into a standalone SVG document whose view box
/// fits all geometry. The y axis points up.
pub fn render(strokes: &[Stroke], markers: &[Vec2], title: &str) -> String {
    let all = strokes.iter().flat_map(|s| s.points.iter()).chain(markers.iter());
    let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in all {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if !lo.x.is_finite() {
        lo = Vec2::new(-1.0, -1.0);
        hi = Vec2::new(1.0, 1.0);
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
    let pad = 0.05 * span;
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let stroke_w = span / 400.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="600" height="{}">"#,
        lo.x - pad,
        -(hi.y + pad),
        w,
        h,
        (600.0 * h / w).round()
    );
    let _ = writeln!(s, "<title>{title}</title>");
    for st in strokes {
        let tag = if st.closed { "polygon" } else { "polyline" };
        let pts: Vec<String> = st.points.iter().map(|p| format!("{:.6},{:.6}", p.x, -p.y)).collect();
        let _ = writeln!(
            s,
            r#"<{tag} points="{}" fill="none" stroke="{}" stroke-width="{stroke_w}"/>"#,
            pts.join(" "),
            st.color
        );
    }
    for m in markers {
        let _ = writeln!(s, r#"<circle cx="{:.6}" cy="{:.6}" r="{}" fill="black"/>"#, m.x, -m.y, 3.0 * stroke_w);
    }
    s.push_str("</svg>\n");
    s
}
