//! Boundary conditions: periodic references, pyramids and almost-planar
//! matchings.

use super::{Capacities, Matching};
use crate::error::{Error, Result};
use crate::lattice::{
    build_lattice, carve_with, newton_polygon, periodic_matchings, EdgeKind, FiniteDomain,
    LatticeKind, LatticeSpec, Region, Window,
};
use std::sync::Arc;

/// Fundamental-domain index of every window edge.
fn orbit(spec: &LatticeSpec, kind: &EdgeKind) -> usize {
    let (q, p) = (spec.q() as i64, spec.p() as i64);
    match *kind {
        EdgeKind::Transverse { pos, .. } => pos.rem_euclid(q) as usize,
        EdgeKind::Seam { k, .. } => (q + k.rem_euclid(p)) as usize,
    }
}

/// Tiles a periodic matching over the window. Edges near the rim are
/// occupied too, so rim vertices may be covered twice or not at all.
pub fn periodic_occupancy(window: &Window, fd_edges: &[bool]) -> Vec<bool> {
    window
        .edges
        .iter()
        .map(|e| fd_edges[orbit(&window.spec, &e.kind)])
        .collect()
}

/// The periodic matching all slopes are measured against.
pub fn reference_occupancy(window: &Window) -> Vec<bool> {
    let fd = periodic_matchings(&window.spec)
        .into_iter()
        .next()
        .expect("every dynamic lattice has periodic matchings")
        .edges;
    periodic_occupancy(window, &fd)
}

/// Barycentre of the Newton polygon vertices, in reference slope coordinates.
pub fn newton_centre(spec: &LatticeSpec) -> (f64, f64) {
    let poly = newton_polygon(spec).expect("dynamic lattices have a Newton polygon");
    let n = poly.len() as f64;
    let (sx, sy) = poly.iter().fold((0.0, 0.0), |a, &(x, y)| (a.0 + x as f64, a.1 + y as f64));
    (sx / n, sy / n)
}

/// Matching whose height tracks the plane `s·i + t·j/q` over a window
/// covering the square region of size `L`, built as the largest valid
/// height below the plane. Slopes are measured from the centre of the
/// Newton polygon, so `(0, 0)` is the most symmetric liquid slope.
pub fn flatten_to_plane(kind: LatticeKind, slope: (f64, f64), l: u32) -> Result<Matching> {
    Ok(flat_boundary(kind, slope, l)?.0)
}

/// `flatten_to_plane` together with the height relative to the reference
/// matching and its sup-distance to the plane on faces away from the rim.
pub fn flat_boundary(kind: LatticeKind, slope: (f64, f64), l: u32) -> Result<(Matching, Vec<i64>, f64)> {
    let spec = build_lattice(kind);
    let poly = newton_polygon(&spec)?;
    let c = newton_centre(&spec);
    let abs = (slope.0 + c.0, slope.1 + c.1);
    if !crate::lattice::strictly_inside(&poly, abs) {
        return Err(Error::SlopeOutsidePolygon(slope.0, slope.1));
    }
    let (lo, hi) = Region::Square.bounding_box(&spec, l);
    let window = Arc::new(Window::covering(&spec, lo, hi, 3));
    let caps = Capacities::of_window(window.clone(), reference_occupancy(&window));
    let q = spec.q() as f64;
    let plane: Vec<f64> = window
        .faces
        .iter()
        .map(|f| abs.0 * f.thread as f64 + abs.1 * f.pos as f64 / q)
        .collect();
    let init: Vec<i64> = plane.iter().map(|v| v.floor() as i64).collect();
    let h = caps.closure_min(&init);
    let deviation = (0..window.faces.len())
        .filter(|&f| !window.on_rim(f))
        .map(|f| (h[f] as f64 - plane[f]).abs())
        .fold(0.0, f64::max);
    let occ = caps.occupancy_of(&h);
    Ok((Matching::from_occupancy(window, occ), h, deviation))
}

/// The pyramid boundary `p` and its domain `W_L`.
#[derive(Clone, Debug)]
pub struct Pyramid {
    pub matching: Matching,
    pub domain: FiniteDomain,
    /// The apex face, where `p` is highest.
    pub apex: usize,
    /// Height of `p` relative to the reference periodic matching.
    pub heights: Vec<i64>,
}

/// Threshold `K(L)` on `D(f, apex) + D(apex, f)` that cuts out `W_L`.
/// With `K = L` the domain meets `2L + 1` threads and thread `i` holds
/// `L + 1 - |i|` beads on all three lattices.
pub fn pyramid_threshold(_kind: LatticeKind, l: u32) -> i64 {
    l as i64
}

/// `p` has height `-D(f, apex)` against the reference periodic matching;
/// `W_L` is the set of faces with `D(f, apex) + D(apex, f) <= K(L)`.
pub fn pyramid(kind: LatticeKind, l: u32) -> Pyramid {
    let spec = build_lattice(kind);
    let (ux, uy) = spec.region_unit();
    let mut radius = (l as i64 + 3) * ux.max(uy);
    loop {
        if let Some(p) = try_pyramid(&spec, l, radius) {
            return p;
        }
        radius *= 2;
    }
}

fn try_pyramid(spec: &LatticeSpec, l: u32, radius: i64) -> Option<Pyramid> {
    let window = Arc::new(Window::covering(spec, (-radius, -radius), (radius, radius), 2));
    let caps = Capacities::of_window(window.clone(), reference_occupancy(&window));
    let apex = window.face_index(0, 0).expect("window contains the origin");
    let to_apex = caps.distances(apex, true);
    let from_apex = caps.distances(apex, false);
    let h: Vec<i64> = to_apex.iter().map(|d| -d).collect();
    let k = pyramid_threshold(spec.kind, l);
    let inside: Vec<bool> = (0..window.faces.len())
        .map(|f| to_apex[f] + from_apex[f] <= k)
        .collect();
    // the ball must stay clear of the rim, where window distances are off
    let clear = (0..window.faces.len()).all(|f| {
        !inside[f] || {
            let face = &window.faces[f];
            face.thread - window.threads.0 > 2
                && window.threads.1 - face.thread > 2
                && face.pos - window.positions.0 > 2 * spec.q() as i64
                && window.positions.1 - face.pos > 2 * spec.q() as i64
        }
    });
    if !clear {
        return None;
    }
    let occ = caps.occupancy_of(&h);
    let m = Matching::from_occupancy(window, occ);
    let domain = carve_with(m.clone(), Region::Custom(format!("pyramid-{l}")), l, &|f| inside[f])
        .expect("pyramid domain is carvable");
    Some(Pyramid {
        matching: m,
        domain,
        apex,
        heights: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::{extremal_heights, is_valid_height};

    #[test]
    fn flat_boundary_tracks_plane() {
        for kind in LatticeKind::ALL {
            let (_, _, dev) = flat_boundary(kind, (0.0, 0.0), 16).unwrap();
            assert!(dev <= 2.0, "{kind}: {dev}");
        }
    }

    #[test]
    fn slopes_outside_are_rejected() {
        let err = flatten_to_plane(LatticeKind::Square, (5.0, 0.0), 8).unwrap_err();
        assert!(matches!(err, Error::SlopeOutsidePolygon(..)));
    }

    #[test]
    fn pyramid_is_maximal() {
        for kind in LatticeKind::ALL {
            let p = pyramid(kind, 3);
            let (lo, hi) = extremal_heights(&p.domain).unwrap();
            assert!(hi.values.iter().all(|&v| v == 0), "{kind}");
            assert!(lo.values.iter().any(|&v| v < 0));
            assert!(is_valid_height(&p.domain, &lo.values));
        }
    }
}
