use std::fmt::Write as _;
use std::path::Path;

use crate::control::NetworkSnapshot;
use crate::coverage::guaranteed_sensing_disk;
use crate::geometry::{Circle, Vec2};

/// Chord error of sampled curves relative to the region diameter.
const CHORD_FRACTION: f64 = 0.002;

const STYLE: &str = "\
.region{fill:none;stroke:#222;}\
.cell{fill:none;stroke:#1f4e9c;}\
.sensing{fill:none;stroke:#6a8caf;stroke-dasharray:2,1;}\
.sensed{fill:#9fc5e8;fill-opacity:0.6;stroke:none;}\
.center{fill:#1f4e9c;}\
.immobilized{stroke:#d62728;fill:#d62728;}\
.sensing.immobilized{fill:none;}";

struct Frame {
    /// Top edge in world y; used to flip the axis.
    top: f64,
}

impl Frame {
    fn xy(&self, p: Vec2) -> String {
        format!("{:.6},{:.6}", p.x, self.top - p.y)
    }

    fn polygon(&self, pts: &[Vec2]) -> String {
        let mut d = String::new();
        for (k, p) in pts.iter().enumerate() {
            let _ = write!(d, "{}{}", if k == 0 { "M" } else { " L" }, self.xy(*p));
        }
        d.push_str(" Z");
        d
    }

    fn circle(&self, c: &Circle) -> String {
        let (a, b) = (
            c.center + Vec2::new(c.radius, 0.0),
            c.center - Vec2::new(c.radius, 0.0),
        );
        let r = format!("{:.6}", c.radius);
        format!(
            "M{} A{r},{r} 0 1,0 {} A{r},{r} 0 1,0 {} Z",
            self.xy(a),
            self.xy(b),
            self.xy(a)
        )
    }
}

/// SVG drawing of one configuration. The `<path>` elements are the region
/// outline, one per non-empty cell and one per guaranteed sensing circle;
/// sensed regions are circle fills clipped to the cells.
pub fn render_svg(snapshot: &NetworkSnapshot) -> String {
    let region = &snapshot.region;
    let (mut lo, mut hi) = region.bounding_box();
    let disks: Vec<Option<Circle>> = snapshot
        .agents
        .iter()
        .map(|a| guaranteed_sensing_disk(a).ok())
        .collect();
    for c in disks.iter().flatten() {
        lo = Vec2::new(
            lo.x.min(c.center.x - c.radius),
            lo.y.min(c.center.y - c.radius),
        );
        hi = Vec2::new(
            hi.x.max(c.center.x + c.radius),
            hi.y.max(c.center.y + c.radius),
        );
    }
    let diameter = region.diameter();
    let margin = 0.03 * diameter;
    let frame = Frame { top: hi.y };
    let (w, h) = (hi.x - lo.x + 2.0 * margin, hi.y - lo.y + 2.0 * margin);
    let stroke = 0.003 * diameter;
    let tol = CHORD_FRACTION * diameter;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" width="{:.0}" height="{:.0}" viewBox="{:.6} {:.6} {:.6} {:.6}" stroke-width="{:.6}">"#,
        800.0 * w / w.max(h),
        800.0 * h / w.max(h),
        lo.x - margin,
        -margin,
        w,
        h,
        stroke
    );
    let _ = writeln!(out, "<style>{STYLE}</style>");

    let cells: Vec<(usize, String)> = snapshot
        .diagram
        .cells
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_empty())
        .map(|(i, c)| {
            let d: Vec<String> = c
                .polylines(tol)
                .iter()
                .map(|pts| frame.polygon(pts))
                .collect();
            (i, d.join(" "))
        })
        .collect();

    let _ = writeln!(out, "<defs>");
    for (i, _) in &cells {
        let _ = writeln!(
            out,
            r##"<clipPath id="clip-{i}"><use xlink:href="#cell-{i}"/></clipPath>"##
        );
    }
    let _ = writeln!(out, "</defs>");

    for (i, _) in &cells {
        if disks[*i].is_some() {
            let _ = writeln!(
                out,
                r##"<use class="sensed" xlink:href="#sensing-{i}" clip-path="url(#clip-{i})"/>"##
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<path class="region" d="{}"/>"#,
        frame.polygon(region.vertices())
    );
    for (i, d) in &cells {
        let _ = writeln!(out, r#"<path id="cell-{i}" class="cell" d="{d}"/>"#);
    }
    for (a, disk) in snapshot.agents.iter().zip(&disks) {
        let extra = if a.mobile { "" } else { " immobilized" };
        if let Some(c) = disk {
            let _ = writeln!(
                out,
                r#"<path id="sensing-{}" class="sensing{extra}" d="{}"/>"#,
                a.id,
                frame.circle(c)
            );
        }
        let p = frame.xy(a.center);
        let (cx, cy) = p.split_once(',').unwrap_or(("0", "0"));
        let _ = writeln!(
            out,
            r#"<circle class="center{extra}" cx="{cx}" cy="{cy}" r="{:.6}"/>"#,
            (2.0 * stroke).max(a.r_u)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg_frame(snapshot: &NetworkSnapshot, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render_svg(snapshot))
}
