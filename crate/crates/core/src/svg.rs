//! Top-down SVG maps of a division: region cells, camera hulls, boundary lines and cameras.

use std::fmt::Write;

use nalgebra::Vector2;

use crate::division::SceneDivision;

const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
    "#1f77b4", "#17becf",
];
const PANEL: f64 = 480.0;
const MARGIN: f64 = 20.0;

fn color(region: usize) -> &'static str {
    PALETTE[region % PALETTE.len()]
}

fn panel(out: &mut String, division: &SceneDivision, title: &str, x0: f64) {
    let [lo, hi] = division.domain;
    let span = (hi - lo).max().max(1e-9);
    let scale = (PANEL - 2.0 * MARGIN) / span;
    // SVG y grows downwards; flip so the map reads like a floor plan.
    let map = |p: &Vector2<f64>| (x0 + MARGIN + (p.x - lo.x) * scale, PANEL - MARGIN - (p.y - lo.y) * scale);
    let points = |poly: &[Vector2<f64>]| {
        poly.iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(out, r#"<g><text x="{:.2}" y="14" font-size="13" font-family="sans-serif">{title}</text>"#, x0 + MARGIN);
    for r in &division.regions {
        if let Ok(cell) = division.region_polygon(r.id) {
            if cell.len() >= 3 {
                let _ = writeln!(
                    out,
                    r##"<polygon points="{}" fill="{}" fill-opacity="0.12" stroke="#333" stroke-width="1"/>"##,
                    points(&cell),
                    color(r.id)
                );
                let slack = 1e-6 * division.scene_diameter.max(1.0);
                for (a, b) in crate::geometry::edges(&cell) {
                    let on_boundary = r
                        .boundary
                        .iter()
                        .any(|bd| bd.plane.signed_distance(&a).abs() <= slack && bd.plane.signed_distance(&b).abs() <= slack);
                    if on_boundary {
                        let ((x1, y1), (x2, y2)) = (map(&a), map(&b));
                        let _ = writeln!(
                            out,
                            r##"<line class="boundary" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#c00" stroke-width="2"/>"##
                        );
                    }
                }
            }
        }
        if r.hull.len() >= 2 {
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill="none" stroke="{}" stroke-width="1.5" stroke-dasharray="4 3"/>"#,
                points(&r.hull),
                color(r.id)
            );
        }
    }
    for c in &division.cameras {
        let region = division.assignment.get(&c.id).copied().unwrap_or(0);
        let (x, y) = map(&division.project(&c.position));
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{}"/>"#, color(region));
    }
    out.push_str("</g>\n");
}

pub fn division_svg(division: &SceneDivision, title: &str) -> String {
    panels_svg(&[(title.to_string(), division)])
}

/// Several divisions side by side.
pub fn panels_svg(items: &[(String, &SceneDivision)]) -> String {
    let width = PANEL * items.len().max(1) as f64;
    let mut out = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL:.0}" viewBox="0 0 {width:.0} {PANEL:.0}">"#
    );
    out.push('\n');
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (i, (title, d)) in items.iter().enumerate() {
        panel(&mut out, d, title, i as f64 * PANEL);
    }
    out.push_str("</svg>\n");
    out
}
