//! SVG tilings: every dimer becomes the union of the dual cells of its two
//! endpoints, so square-lattice dimers draw as dominoes and hexagonal ones
//! as lozenges.

use dimerflow::lattice::{EdgeKind, Slot, Window};
use dimerflow::{FiniteDomain, Matching};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Debug, Default)]
pub struct Style {
    /// Shade tiles by the mean height of the two faces they separate.
    pub heights: Option<Vec<i64>>,
    /// Pixels per region unit.
    pub scale: f64,
}

const PALETTE: [&str; 8] = [
    "#e4572e", "#29335c", "#f3a712", "#669bbc", "#a8c686", "#8e6c8a", "#c9cba3", "#4b3f72",
];

type Point = (f64, f64);

fn vertex_point(w: &Window, v: usize) -> Point {
    let (x, y) = w.vertex_position(v);
    let den = w.spec.denominator() as f64;
    (x as f64 / den, y as f64 / den)
}

fn face_point(w: &Window, f: usize) -> Point {
    let face = &w.faces[f];
    w.spec.face_centroid(face.thread, face.pos)
}

/// Faces around `v`, counterclockwise, when all of them lie in the window.
fn cell(w: &Window, v: usize) -> Option<Vec<usize>> {
    if !w.is_enclosed(v) {
        return None;
    }
    let mut faces: Vec<usize> = Vec::new();
    for &e in &w.vertices[v].edges {
        for f in [w.edges[e].from, w.edges[e].to].into_iter().flatten() {
            if !faces.contains(&f) {
                faces.push(f);
            }
        }
    }
    let c = vertex_point(w, v);
    let angle = |f: &usize| {
        let p = face_point(w, *f);
        (p.1 - c.1).atan2(p.0 - c.0)
    };
    faces.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    Some(faces)
}

/// Ring of `ring` starting at `start` and walking `ring.len()` steps.
fn rotated(ring: &[usize], start: usize) -> Vec<usize> {
    (0..ring.len()).map(|t| ring[(start + t) % ring.len()]).collect()
}

/// Index `i` with `ring[i] = x` and `ring[i + 1] = y`, cyclically.
fn step(ring: &[usize], x: usize, y: usize) -> Option<usize> {
    (0..ring.len()).find(|&i| ring[i] == x && ring[(i + 1) % ring.len()] == y)
}

fn tile(w: &Window, e: usize) -> Vec<Point> {
    let edge = &w.edges[e];
    let (a, b) = (edge.white, edge.black);
    if let (Some(s1), Some(s2), Some(ra), Some(rb)) = (edge.from, edge.to, cell(w, a), cell(w, b)) {
        let (x, y) = if step(&ra, s1, s2).is_some() { (s1, s2) } else { (s2, s1) };
        if let (Some(i), Some(j)) = (step(&ra, x, y), step(&rb, y, x)) {
            // around a from y back to x, then around b from x back to y
            let mut ring = rotated(&ra, i + 1);
            let rest = rotated(&rb, j + 1);
            ring.extend_from_slice(&rest[1..rest.len() - 1]);
            return ring.into_iter().map(|f| face_point(w, f)).collect();
        }
    }
    // on the window rim: the kite spanned by the edge and its faces
    let mut pts = vec![vertex_point(w, a)];
    pts.extend(edge.from.map(|f| face_point(w, f)));
    pts.push(vertex_point(w, b));
    pts.extend(edge.to.map(|f| face_point(w, f)));
    pts
}

fn edge_class(w: &Window, e: usize) -> usize {
    let slot = match w.edges[e].kind {
        EdgeKind::Transverse { thread, pos } => Slot::Transverse { thread, pos },
        EdgeKind::Seam { seam, k } => Slot::Seam { seam, k },
    };
    w.spec.edge_id(slot).idx
}

fn gray(h: f64, lo: f64, hi: f64) -> String {
    let t = if hi > lo { (h - lo) / (hi - lo) } else { 0.5 };
    let c = (40.0 + 200.0 * t).round() as u8;
    format!("#{c:02x}{c:02x}{c:02x}")
}

/// One `<polygon>` per occupied edge. Dimers of the boundary matching
/// (outside the domain interior) go in group `boundary`; the rest are
/// grouped by edge class, which separates the frozen regions of extremal
/// states.
pub fn render_tiling(m: &Matching, domain: Option<&FiniteDomain>, style: &Style) -> String {
    render(m, &|e| domain.is_none_or(|d| d.is_interior_edge(e)), style)
}

/// Every dimer in group `boundary`: the render of a region with no
/// interior.
pub fn render_boundary(m: &Matching, style: &Style) -> String {
    render(m, &|_| false, style)
}

fn render(m: &Matching, interior: &dyn Fn(usize) -> bool, style: &Style) -> String {
    let w = m.window();
    let scale = if style.scale > 0.0 { style.scale } else { 24.0 };
    let mut groups: BTreeMap<String, Vec<(usize, Vec<Point>)>> = BTreeMap::new();
    for e in m.occupied_edges() {
        let key = if interior(e) {
            format!("class-{}", edge_class(w, e))
        } else {
            "boundary".to_string()
        };
        groups.entry(key).or_default().push((e, tile(w, e)));
    }
    let all = groups.values().flatten().flat_map(|(_, p)| p.iter());
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(-y);
        y1 = y1.max(-y);
    }
    if x0 > x1 {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let pad = 0.5;
    let (vw, vh) = ((x1 - x0 + 2.0 * pad) * scale, (y1 - y0 + 2.0 * pad) * scale);
    let heights = style.heights.as_deref();
    let (hlo, hhi) = heights.map_or((0.0, 0.0), |h| {
        let lo = h.iter().copied().min().unwrap_or(0) as f64;
        let hi = h.iter().copied().max().unwrap_or(0) as f64;
        (lo, hi)
    });

    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{vw:.1}" height="{vh:.1}" viewBox="0 0 {vw:.1} {vh:.1}">"#
    )
    .unwrap();
    writeln!(out, r#"<title>{} tiling, {} dimers</title>"#, w.spec.kind, m.occupied_edges().count()).unwrap();
    for (g, (key, tiles)) in groups.iter().enumerate() {
        let colour = if key == "boundary" { "#bbbbbb" } else { PALETTE[g % PALETTE.len()] };
        writeln!(out, r##"<g id="{key}" class="dimers" stroke="#222222" stroke-width="1">"##).unwrap();
        for (e, pts) in tiles {
            let fill = match heights {
                Some(h) => {
                    let edge = &w.edges[*e];
                    let fs: Vec<usize> = [edge.from, edge.to].into_iter().flatten().collect();
                    let mean = fs.iter().map(|&f| h[f] as f64).sum::<f64>() / fs.len().max(1) as f64;
                    gray(mean, hlo, hhi)
                }
                None => colour.to_string(),
            };
            let coords: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{:.3},{:.3}", (x - x0 + pad) * scale, (-y - y0 + pad) * scale))
                .collect();
            writeln!(out, r#"<polygon points="{}" fill="{fill}"/>"#, coords.join(" ")).unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    out
}
