//! Periodic matchings of the fundamental domain and the Newton polygon.

use super::LatticeSpec;
use crate::error::{Error, Result};

/// A translation-invariant matching, given by the occupied fundamental-domain
/// edges. `slope` is its height change per thread shift and per vertical
/// period, relative to the first periodic matching in enumeration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicMatching {
    pub edges: Vec<bool>,
    pub slope: (i64, i64),
}

fn enumerate(spec: &LatticeSpec) -> Vec<Vec<bool>> {
    let fd = &spec.fundamental_domain;
    let ne = fd.edges.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << ne) {
        let mut cover = vec![0u8; fd.vertices.len()];
        for (e, edge) in fd.edges.iter().enumerate() {
            if mask >> e & 1 == 1 {
                cover[edge.white.idx] += 1;
                cover[edge.black.idx] += 1;
            }
        }
        if cover.iter().all(|&c| c == 1) {
            out.push((0..ne).map(|e| mask >> e & 1 == 1).collect());
        }
    }
    out
}

/// Height change of `m` relative to `reference` per thread shift and per
/// vertical period.
pub fn periodic_slope(spec: &LatticeSpec, m: &[bool], reference: &[bool]) -> (i64, i64) {
    let occ: Vec<f64> = m.iter().map(|&b| b as u8 as f64).collect();
    let (s, t) = occupation_slope(spec, &occ, reference);
    (s.round() as i64, t.round() as i64)
}

/// Mean height change per thread shift and per vertical period of a
/// translation-invariant measure with edge occupation probabilities `occ`
/// (one per fundamental-domain edge), relative to `reference`.
pub fn occupation_slope(spec: &LatticeSpec, occ: &[f64], reference: &[bool]) -> (f64, f64) {
    let q = spec.q() as i64;
    let p = spec.p() as i64;
    let delta = |e: usize| occ[e] - reference[e] as u8 as f64;
    let t = (0..q as usize).map(delta).sum();
    // a face of thread 0 with a nonempty right side
    let j0 = (0..q)
        .find(|&j| spec.right_index(j - 1) < spec.right_index(j))
        .expect("some face has a right seam edge");
    let k = spec.right_index(j0 - 1);
    let jr = spec.seam_right_face(k);
    let seam_edge = q as usize + k.rem_euclid(p) as usize;
    let mut s = if k % 2 == 0 {
        delta(seam_edge)
    } else {
        -delta(seam_edge)
    };
    if jr < j0 {
        s += (jr..j0).map(|j| delta(j.rem_euclid(q) as usize)).sum::<f64>();
    } else {
        s -= (j0..jr).map(|j| delta(j.rem_euclid(q) as usize)).sum::<f64>();
    }
    (s, t)
}

pub fn periodic_matchings(spec: &LatticeSpec) -> Vec<PeriodicMatching> {
    let all = enumerate(spec);
    let Some(reference) = all.first().cloned() else {
        return vec![];
    };
    all.into_iter()
        .map(|edges| {
            let slope = periodic_slope(spec, &edges, &reference);
            PeriodicMatching { edges, slope }
        })
        .collect()
}

/// Convex hull of the periodic slopes, counterclockwise from the lowest
/// (then leftmost) vertex, without collinear points.
pub fn newton_polygon(lattice: &LatticeSpec) -> Result<Vec<(i64, i64)>> {
    let pts: Vec<(i64, i64)> = periodic_matchings(lattice).iter().map(|m| m.slope).collect();
    if pts.is_empty() {
        return Err(Error::NoMatching);
    }
    Ok(convex_hull(pts))
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

pub(crate) fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for pass in 0..2 {
        let base = hull.len();
        let iter: Box<dyn Iterator<Item = &(i64, i64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= base + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let start = (0..hull.len())
        .min_by_key(|&i| (hull[i].1, hull[i].0))
        .unwrap();
    hull.rotate_left(start);
    hull
}

/// Whether `p` lies strictly inside a ccw convex polygon.
pub fn strictly_inside(poly: &[(i64, i64)], p: (f64, f64)) -> bool {
    poly.len() >= 3
        && (0..poly.len()).all(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let c = (b.0 - a.0) as f64 * (p.1 - a.1 as f64) - (b.1 - a.1) as f64 * (p.0 - a.0 as f64);
            c > 1e-12
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeKind};

    fn signed_area(poly: &[(i64, i64)]) -> i64 {
        (0..poly.len())
            .map(|i| {
                let a = poly[i];
                let b = poly[(i + 1) % poly.len()];
                a.0 * b.1 - a.1 * b.0
            })
            .sum()
    }

    #[test]
    fn polygon_vertex_counts() {
        let count = |k| newton_polygon(&build_lattice(k)).unwrap().len();
        assert_eq!(count(LatticeKind::Square), 4);
        assert_eq!(count(LatticeKind::Hexagon), 3);
        assert!(count(LatticeKind::SquareHexagon) >= 3);
    }

    #[test]
    fn polygons_are_ccw() {
        for kind in LatticeKind::ALL {
            let poly = newton_polygon(&build_lattice(kind)).unwrap();
            assert!(signed_area(&poly) > 0, "{kind}: {poly:?}");
        }
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let hull = convex_hull(vec![(0, 0), (2, 0), (1, 0), (2, 2), (0, 2), (1, 1)]);
        assert_eq!(hull, vec![(0, 0), (2, 0), (2, 2), (0, 2)]);
    }
}
