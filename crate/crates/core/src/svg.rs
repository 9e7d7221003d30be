//! SVG figures. Disks that may shrink are blue, those that may grow red,
//! fixed ones green and free ones gray. Stress values are written at the
//! tangency points of stressed edges.

use std::fmt::Write as _;

use crate::first_order::Stress;
use crate::graph::PlanarEmbeddedGraph;
use crate::packing::{ConstraintPartition, Packing, Tag};

pub fn fill(tag: Tag) -> &'static str {
    match tag {
        Tag::Decrease => "#3b6fd6",
        Tag::Increase => "#d64541",
        Tag::Fixed => "#3aa655",
        Tag::Free => "#9a9a9a",
    }
}

/// Stress entries smaller than this fraction of the largest are unlabeled.
const STRESS_CUTOFF: f64 = 1e-9;

/// Edges that get a label: nonzero entries of `stress`.
pub fn labeled_edges(stress: &Stress) -> Vec<usize> {
    let big = stress.max_abs();
    if big == 0.0 {
        return Vec::new();
    }
    (0..stress.values.len()).filter(|&k| stress.values[k].abs() > STRESS_CUTOFF * big).collect()
}

/// The figure as SVG 1.1 text. The y axis points up in the picture.
pub fn export_svg(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    stress: Option<&Stress>,
) -> String {
    let n = graph.vertex_count().min(packing.len());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for v in 1..=n {
        let (c, r) = (packing.center(v), packing.radius(v));
        x0 = x0.min(c[0] - r);
        x1 = x1.max(c[0] + r);
        y0 = y0.min(-c[1] - r);
        y1 = y1.max(-c[1] + r);
    }
    if n == 0 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (w, h) = (x1 - x0, y1 - y0);
    let (px, py) = (0.1 * w, 0.1 * h);
    let rbar = if n == 0 { 1.0 } else { packing.mean_radius() };

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}">"#,
        x0 - px,
        y0 - py,
        w + 2.0 * px,
        h + 2.0 * py
    );
    let _ = writeln!(out, r#"<g stroke="black" stroke-width="{}">"#, 0.02 * rbar);
    for v in 1..=n {
        let (c, r) = (packing.center(v), packing.radius(v));
        let tag = partition.tags().get(v - 1).copied().unwrap_or(Tag::Free);
        let _ = writeln!(
            out,
            r#"<circle id="disk-{v}" cx="{}" cy="{}" r="{r}" fill="{}" fill-opacity="0.6"/>"#,
            c[0],
            -c[1],
            fill(tag)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<g font-family="sans-serif" text-anchor="middle" dominant-baseline="central" font-size="{}">"#,
        0.5 * rbar
    );
    for v in 1..=n {
        let c = packing.center(v);
        let _ = writeln!(out, r#"<text class="disk" x="{}" y="{}">{v}</text>"#, c[0], -c[1]);
    }
    let _ = writeln!(out, "</g>");
    if let Some(s) = stress {
        let _ = writeln!(
            out,
            r#"<g font-family="sans-serif" text-anchor="middle" font-size="{}" fill="black">"#,
            0.3 * rbar
        );
        for k in labeled_edges(s) {
            let (i, j) = s.edges[k];
            if i > n || j > n {
                continue;
            }
            let (a, b, ri) = (packing.center(i), packing.center(j), packing.radius(i));
            let d = (b[0] - a[0]).hypot(b[1] - a[1]).max(f64::MIN_POSITIVE);
            let t = [a[0] + ri * (b[0] - a[0]) / d, a[1] + ri * (b[1] - a[1]) / d];
            let _ = writeln!(
                out,
                r#"<text class="stress" x="{}" y="{}">{:.3}</text>"#,
                t[0],
                -t[1],
                s.values[k]
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}
