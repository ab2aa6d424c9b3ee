use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph::{xml_escape, JournalId, WeightedDigraph};

use super::Layout;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapStyle {
    /// Canvas side in pixels.
    pub size: f64,
    pub margin: f64,
    /// Pixels per unit of `ln(degree)`.
    pub radius_scale: f64,
    /// Smallest drawn radius, so degree-1 nodes stay visible.
    pub min_radius: f64,
    /// Pixels per unit of `ln(weight)`.
    pub stroke_scale: f64,
    pub min_stroke: f64,
    /// Number of highest-degree nodes that get a text label.
    pub labels: usize,
}

impl Default for MapStyle {
    fn default() -> Self {
        MapStyle {
            size: 1000.0,
            margin: 40.0,
            radius_scale: 3.0,
            min_radius: 1.5,
            stroke_scale: 0.4,
            min_stroke: 0.2,
            labels: 30,
        }
    }
}

/// Renders the laid-out graph as SVG: a line per edge with width growing
/// with `ln(weight)`, a circle per node with radius `ln(degree)` (floored at
/// `min_radius`), and labels on the `labels` most connected nodes.
pub fn export_map(layout: &Layout, g: &WeightedDigraph, style: &MapStyle) -> String {
    let span = style.size - 2.0 * style.margin;
    let at = |id: &JournalId| {
        let (x, y) = layout.positions.get(id).copied().unwrap_or((0.5, 0.5));
        (style.margin + x * span, style.margin + (1.0 - y) * span)
    };
    let mut degree: Vec<(usize, &JournalId)> = Vec::new();
    let ig = g.indexed();
    let adj = ig.undirected_adjacency();
    for (i, id) in g.nodes().enumerate() {
        degree.push((adj[i].len(), id));
    }

    let mut s = String::new();
    let sz = style.size;
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{sz}" height="{sz}" viewBox="0 0 {sz} {sz}">"#);
    let _ = writeln!(s, r#"<rect width="{sz}" height="{sz}" fill="white"/>"#);
    s.push_str("<g stroke=\"#888\" stroke-opacity=\"0.6\">\n");
    for (a, b, w) in g.edges() {
        let ((x1, y1), (x2, y2)) = (at(a), at(b));
        let width = (style.stroke_scale * w.ln()).max(style.min_stroke);
        let _ = writeln!(s, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke-width="{width:.3}"/>"#);
    }
    s.push_str("</g>\n<g fill=\"#2166ac\" stroke=\"white\" stroke-width=\"0.5\">\n");
    for &(d, id) in &degree {
        let (cx, cy) = at(id);
        let r = (style.radius_scale * (d.max(1) as f64).ln()).max(style.min_radius);
        let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.3}"><title>{}</title></circle>"#, xml_escape(id.as_str()));
    }
    s.push_str("</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n");
    degree.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    for &(_, id) in degree.iter().take(style.labels) {
        let (x, y) = at(id);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 4.0, y - 4.0, xml_escape(id.as_str()));
    }
    s.push_str("</g>\n</svg>\n");
    s
}
