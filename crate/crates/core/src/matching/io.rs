//! Line-based text formats for matchings and height fields.

use super::{HeightField, Matching};
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, LatticeKind, Window};
use std::fmt::Write as _;
use std::sync::Arc;

/// Header lines, then one occupied edge per line as
/// `(bx,by,bi)-(wx,wy,wi)` with the black endpoint first.
pub fn write_matching(m: &Matching, f0: usize) -> String {
    let w = m.window();
    let spec = &w.spec;
    let mut out = String::new();
    let face = &w.faces[f0];
    let fid = spec.face_id(face.thread, face.pos);
    writeln!(out, "lattice {}", spec.kind).unwrap();
    writeln!(
        out,
        "window {} {} {} {}",
        w.threads.0, w.threads.1, w.positions.0, w.positions.1
    )
    .unwrap();
    writeln!(out, "f0 {},{},{}", fid.tx, fid.ty, fid.idx).unwrap();
    for e in m.occupied_edges() {
        let edge = &w.edges[e];
        let id = |v: usize| {
            let vx = &w.vertices[v];
            spec.vertex_id(vx.seam, vx.k)
        };
        let (b, wh) = (id(edge.black), id(edge.white));
        writeln!(
            out,
            "({},{},{})-({},{},{})",
            b.tx, b.ty, b.idx, wh.tx, wh.ty, wh.idx
        )
        .unwrap();
    }
    out
}

fn parse_triple(s: &str) -> Result<(i64, i64, usize)> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("bad vertex '{s}'")))?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("bad vertex '{s}'")));
    }
    let num = |p: &str| p.trim().parse::<i64>().map_err(|e| Error::Parse(e.to_string()));
    Ok((num(parts[0])?, num(parts[1])?, num(parts[2])? as usize))
}

/// Inverse of [`write_matching`]; returns the matching and the f0 index.
pub fn parse_matching(text: &str) -> Result<(Matching, usize)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut header = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| Error::Parse("truncated header".into()))?;
        line.strip_prefix(key)
            .map(|s| s.trim().to_string())
            .ok_or_else(|| Error::Parse(format!("expected '{key}'")))
    };
    let kind: LatticeKind = header("lattice")?.parse()?;
    let nums: Vec<i64> = header("window")?
        .split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|e| Error::Parse(e.to_string())))
        .collect::<Result<_>>()?;
    if nums.len() != 4 {
        return Err(Error::Parse("window needs four numbers".into()));
    }
    let f0 = header("f0")?;
    let spec = build_lattice(kind);
    let window = Arc::new(Window::new(&spec, (nums[0], nums[1]), (nums[2], nums[3])));
    let (ftx, fty, fidx) = parse_triple(&format!("({f0})"))?;
    let (fi, fj) = spec.face_coords(crate::lattice::FaceId {
        tx: ftx,
        ty: fty,
        idx: fidx,
    });
    let f0 = window
        .face_index(fi, fj)
        .ok_or_else(|| Error::Parse("f0 outside window".into()))?;
    let mut m = Matching::empty(window.clone());
    for line in lines {
        let (a, b) = line
            .split_once(")-(")
            .ok_or_else(|| Error::Parse(format!("bad edge '{line}'")))?;
        let va = parse_triple(&format!("{a})"))?;
        let vb = parse_triple(&format!("({b}"))?;
        let to_index = |(tx, ty, idx): (i64, i64, usize)| {
            let (s, k) = spec.vertex_coords(crate::lattice::VertexId { tx, ty, idx });
            window
                .vertex_index(s, k)
                .ok_or_else(|| Error::Parse(format!("vertex outside window in '{line}'")))
        };
        let (ia, ib) = (to_index(va)?, to_index(vb)?);
        let e = window.vertices[ia]
            .edges
            .iter()
            .copied()
            .find(|&e| {
                let edge = &window.edges[e];
                (edge.white == ia && edge.black == ib) || (edge.white == ib && edge.black == ia)
            })
            .ok_or_else(|| Error::Parse(format!("no edge for '{line}'")))?;
        m.set(e, true);
    }
    Ok((m, f0))
}

/// `face_x,face_y,face_i,h` rows, with faces as (translation, index) ids.
pub fn heights_csv(h: &HeightField) -> String {
    let w = h.reference.window();
    let mut out = String::from("face_x,face_y,face_i,h\n");
    for (f, face) in w.faces.iter().enumerate() {
        let id = w.spec.face_id(face.thread, face.pos);
        writeln!(out, "{},{},{},{}", id.tx, id.ty, id.idx, h.values[f]).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{carve_free, Region};

    #[test]
    fn text_round_trip() {
        for kind in LatticeKind::ALL {
            let p = crate::matching::pyramid(kind, 2);
            let text = write_matching(&p.matching, p.domain.reference_face());
            let (back, f0) = parse_matching(&text).unwrap();
            assert_eq!(back, p.matching);
            assert_eq!(f0, p.domain.reference_face());
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let d = carve_free(&build_lattice(LatticeKind::Square), &Region::Square, 2).unwrap();
        let h = crate::matching::heights(d.boundary(), &d).unwrap();
        let csv = heights_csv(&h);
        assert!(csv.starts_with("face_x,face_y,face_i,h\n"));
        assert_eq!(csv.lines().count(), d.n_faces() + 1);
    }
}
