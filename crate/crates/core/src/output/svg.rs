use std::fmt::Write as _;

use crate::clustering::{ClusterAssignment, Dendrogram};
use crate::corpus::RegionCatalog;

fn hsl_hex(hue: f64, s: f64, l: f64) -> String {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let h = hue / 60.0;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

/// One colour per cluster label (index `label - 1`). Hues follow the order
/// in which clusters first appear along the dendrogram's leaves, so clusters
/// that sit next to each other in the tree get neighbouring hues.
pub fn cluster_colors(tree: &Dendrogram, assignment: &ClusterAssignment) -> Vec<String> {
    let mut rank = vec![usize::MAX; assignment.k];
    let mut next = 0;
    for leaf in tree.leaf_order() {
        let label = assignment.labels[leaf];
        if rank[label - 1] == usize::MAX {
            rank[label - 1] = next;
            next += 1;
        }
    }
    let k = assignment.k.max(1) as f64;
    rank.iter()
        .map(|&r| hsl_hex(300.0 * r as f64 / k, 0.75, 0.5))
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const PAD: f64 = 30.0;

/// Equirectangular scatter of region points coloured by cluster.
pub fn map_svg(assignment: &ClusterAssignment, catalog: &RegionCatalog, colors: &[String]) -> String {
    let points: Vec<(f64, f64, usize, &str)> = assignment
        .region_ids
        .iter()
        .zip(&assignment.labels)
        .filter_map(|(id, &l)| {
            let (lat, lon) = catalog.get(id)?.coordinates()?;
            Some((lon, lat, l, id.as_str()))
        })
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    if !points.is_empty() {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y, ..) in &points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-9);
        let scale = ((WIDTH - 2.0 * PAD) / span).min((HEIGHT - 2.0 * PAD) / span);
        for (x, y, label, id) in points {
            let px = PAD + (x - x0) * scale;
            let py = HEIGHT - PAD - (y - y0) * scale;
            let _ = writeln!(
                out,
                r#"<circle cx="{px:.2}" cy="{py:.2}" r="4" fill="{}"><title>{} (cluster {label})</title></circle>"#,
                colors[label - 1],
                escape(id)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Dendrogram with leaves along the bottom and merge height upwards.
pub fn dendrogram_svg(tree: &Dendrogram, assignment: &ClusterAssignment, colors: &[String]) -> String {
    let n = tree.n_leaves();
    let order = tree.leaf_order();
    let mut x = vec![0.0; 2 * n - 1];
    let step = (WIDTH - 2.0 * PAD) / n.max(2).saturating_sub(1) as f64;
    for (pos, &leaf) in order.iter().enumerate() {
        x[leaf] = PAD + pos as f64 * step;
    }
    let max_h = tree
        .merges()
        .last()
        .map(|m| m.height)
        .filter(|h| *h > 0.0)
        .unwrap_or(1.0);
    let y = |h: f64| HEIGHT - PAD - h / max_h * (HEIGHT - 2.0 * PAD);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(out, r##"<g stroke="#404040" stroke-width="1" fill="none">"##);
    for (t, m) in tree.merges().iter().enumerate() {
        let node = n + t;
        x[node] = (x[m.left] + x[m.right]) / 2.0;
        let top = y(m.height);
        let _ = writeln!(
            out,
            r#"<path d="M{:.2},{:.2}V{top:.2}H{:.2}V{:.2}"/>"#,
            x[m.left],
            y(tree.height(m.left)),
            x[m.right],
            y(tree.height(m.right))
        );
    }
    out.push_str("</g>\n");
    for &leaf in &order {
        let label = assignment.labels[leaf];
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"><title>{} (cluster {label})</title></circle>"#,
            x[leaf],
            y(0.0),
            colors[label - 1],
            escape(&tree.labels()[leaf])
        );
    }
    out.push_str("</svg>\n");
    out
}
