//! Matchings, height functions and capacities.
//!
//! Heights are fluxes of `M - M0` across dual paths from the reference face.
//! Crossing an edge from its `from` face to its `to` face is positive, and
//! `h(to) - h(from) = M(e) - M0(e)`.

mod boundary;
mod io;
mod paths;

pub use boundary::{
    flatten_to_plane, newton_centre, periodic_occupancy, pyramid, pyramid_threshold,
    reference_occupancy, Pyramid,
};
pub use io::{heights_csv, parse_matching, write_matching};
pub use paths::{apply_rotation, face_state, grow_free_path, rotatable, Direction, FaceState, FreePath};

use crate::error::{Error, Result};
use crate::lattice::{FiniteDomain, Window};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Occupied edges over the edges of a window.
#[derive(Clone)]
pub struct Matching {
    window: Arc<Window>,
    occ: Vec<bool>,
}

impl Matching {
    pub fn empty(window: Arc<Window>) -> Self {
        let occ = vec![false; window.edges.len()];
        Matching { window, occ }
    }

    pub fn from_occupancy(window: Arc<Window>, occ: Vec<bool>) -> Self {
        assert_eq!(occ.len(), window.edges.len());
        Matching { window, occ }
    }

    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    pub fn is_occupied(&self, e: usize) -> bool {
        self.occ[e]
    }

    pub fn set(&mut self, e: usize, on: bool) {
        self.occ[e] = on;
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occ
    }

    pub fn occupied_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.occ.iter().enumerate().filter(|(_, &b)| b).map(|(e, _)| e)
    }

    /// Occupied edges at vertex `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.window.vertices[v]
            .edges
            .iter()
            .filter(|&&e| self.occ[e])
            .count()
    }
}

impl PartialEq for Matching {
    fn eq(&self, other: &Self) -> bool {
        self.occ == other.occ && self.window.same_shape(&other.window)
    }
}

impl Eq for Matching {}

impl Hash for Matching {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.occ.hash(state);
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matching({} dimers)", self.occ.iter().filter(|&&b| b).count())
    }
}

/// Face heights relative to `reference`, pinned to 0 at `reference_face`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightField {
    pub values: Vec<i64>,
    pub reference: Matching,
    pub reference_face: usize,
}

impl HeightField {
    pub fn le(&self, other: &HeightField) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }
}

/// Oriented capacities `d(f, f')` for the crossings of one window.
#[derive(Clone, Debug)]
pub struct Capacities {
    window: Arc<Window>,
    reference: Vec<bool>,
    free: Vec<bool>,
}

const UNREACHED: i64 = i64::MAX / 4;

impl Capacities {
    /// Capacities of a domain: edges outside G′ cost nothing either way.
    pub fn of_domain(domain: &FiniteDomain) -> Self {
        let w = domain.window();
        Capacities {
            window: w.clone(),
            reference: domain.boundary().occupancy().to_vec(),
            free: (0..w.edges.len()).map(|e| domain.is_interior_edge(e)).collect(),
        }
    }

    /// Capacities of the whole window against a reference occupancy.
    pub fn of_window(window: Arc<Window>, reference: Vec<bool>) -> Self {
        let free = window
            .edges
            .iter()
            .map(|e| e.from.is_some() && e.to.is_some())
            .collect();
        Capacities {
            window,
            reference,
            free,
        }
    }

    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    /// `d(f, g)` for the crossing of edge `e` starting at face `f`.
    pub fn d(&self, e: usize, f: usize) -> i64 {
        if !self.free[e] {
            return 0;
        }
        let m = self.reference[e] as i64;
        if self.window.edges[e].from == Some(f) {
            1 - m
        } else {
            m
        }
    }

    /// `D(src, ·)`, or `D(·, src)` when `reverse`, by 0-1 breadth-first search.
    pub fn distances(&self, src: usize, reverse: bool) -> Vec<i64> {
        let n = self.window.faces.len();
        let mut dist = vec![UNREACHED; n];
        dist[src] = 0;
        let mut dq = VecDeque::from([src]);
        while let Some(f) = dq.pop_front() {
            for (e, g) in self.window.neighbours(f) {
                let w = if reverse { self.d(e, g) } else { self.d(e, f) };
                let nd = dist[f] + w;
                if nd < dist[g] {
                    dist[g] = nd;
                    if w == 0 {
                        dq.push_front(g);
                    } else {
                        dq.push_back(g);
                    }
                }
            }
        }
        dist
    }

    /// `x ↦ min_y init(y) + D(y, x)`: the largest valid height below `init`.
    pub fn closure_min(&self, init: &[i64]) -> Vec<i64> {
        self.closure(init, false)
    }

    /// `x ↦ max_y init(y) - D(x, y)`: the smallest valid height above `init`.
    pub fn closure_max(&self, init: &[i64]) -> Vec<i64> {
        let neg: Vec<i64> = init.iter().map(|v| -v).collect();
        self.closure(&neg, true).into_iter().map(|v| -v).collect()
    }

    fn closure(&self, init: &[i64], reverse: bool) -> Vec<i64> {
        let mut dist = init.to_vec();
        let mut heap: BinaryHeap<Reverse<(i64, usize)>> =
            (0..dist.len()).map(|f| Reverse((dist[f], f))).collect();
        while let Some(Reverse((d, f))) = heap.pop() {
            if d > dist[f] {
                continue;
            }
            for (e, g) in self.window.neighbours(f) {
                let w = if reverse { self.d(e, g) } else { self.d(e, f) };
                if d + w < dist[g] {
                    dist[g] = d + w;
                    heap.push(Reverse((dist[g], g)));
                }
            }
        }
        dist
    }

    /// Checks `h(g) - h(f) <= d(f, g)` on every crossing; by the triangle
    /// inequality this is the full `D` condition.
    pub fn check(&self, h: &[i64]) -> Result<()> {
        for (e, edge) in self.window.edges.iter().enumerate() {
            if let (Some(f), Some(g)) = (edge.from, edge.to) {
                if h[g] - h[f] > self.d(e, f) {
                    return Err(Error::InvalidHeight { from: f, to: g });
                }
                if h[f] - h[g] > self.d(e, g) {
                    return Err(Error::InvalidHeight { from: g, to: f });
                }
            }
        }
        Ok(())
    }

    /// Occupancy with heights `h`; edges with a face outside the window are
    /// left as in the reference.
    pub fn occupancy_of(&self, h: &[i64]) -> Vec<bool> {
        self.window
            .edges
            .iter()
            .enumerate()
            .map(|(e, edge)| match (edge.from, edge.to) {
                (Some(f), Some(g)) if self.free[e] => h[g] - h[f] + self.reference[e] as i64 == 1,
                _ => self.reference[e],
            })
            .collect()
    }
}

/// Heights of `occ` relative to `reference` by breadth-first flux
/// accumulation from `f0`, verified on every crossing.
pub fn raw_heights(window: &Window, occ: &[bool], reference: &[bool], f0: usize) -> Result<Vec<i64>> {
    let n = window.faces.len();
    let mut h = vec![i64::MIN; n];
    h[f0] = 0;
    let mut queue = VecDeque::from([f0]);
    while let Some(f) = queue.pop_front() {
        for (e, g) in window.neighbours(f) {
            if h[g] != i64::MIN {
                continue;
            }
            let delta = occ[e] as i64 - reference[e] as i64;
            h[g] = if window.edges[e].from == Some(f) {
                h[f] + delta
            } else {
                h[f] - delta
            };
            queue.push_back(g);
        }
    }
    for (e, edge) in window.edges.iter().enumerate() {
        if let (Some(f), Some(g)) = (edge.from, edge.to) {
            if h[g] - h[f] != occ[e] as i64 - reference[e] as i64 {
                let v = &window.vertices[edge.white];
                return Err(Error::NotAMatching {
                    seam: v.seam,
                    k: v.k,
                    count: occ_count(window, occ, edge.white),
                });
            }
        }
    }
    Ok(h)
}

fn occ_count(window: &Window, occ: &[bool], v: usize) -> usize {
    window.vertices[v].edges.iter().filter(|&&e| occ[e]).count()
}

/// Checks that `m` covers every G′ vertex once and agrees with the boundary
/// matching off G′.
pub fn validate(m: &Matching, domain: &FiniteDomain) -> Result<()> {
    let w = domain.window();
    if !m.window().same_shape(w) {
        return Err(Error::DomainMismatch);
    }
    for (v, vx) in w.vertices.iter().enumerate() {
        if domain.is_interior_vertex(v) {
            let count = m.degree(v);
            if count != 1 {
                return Err(Error::NotAMatching {
                    seam: vx.seam,
                    k: vx.k,
                    count,
                });
            }
        }
    }
    for e in 0..w.edges.len() {
        if !domain.is_interior_edge(e) && m.is_occupied(e) != domain.boundary().is_occupied(e) {
            let v = &w.vertices[w.edges[e].white];
            return Err(Error::NotAMatching {
                seam: v.seam,
                k: v.k,
                count: m.degree(w.edges[e].white),
            });
        }
    }
    Ok(())
}

pub fn height_of(m: &Matching, domain: &FiniteDomain, m0: &Matching) -> Result<HeightField> {
    validate(m, domain)?;
    if !m0.window().same_shape(domain.window()) {
        return Err(Error::DomainMismatch);
    }
    let values = raw_heights(
        domain.window(),
        m.occupancy(),
        m0.occupancy(),
        domain.reference_face(),
    )?;
    Ok(HeightField {
        values,
        reference: m0.clone(),
        reference_face: domain.reference_face(),
    })
}

/// Heights relative to the domain's boundary matching.
pub fn heights(m: &Matching, domain: &FiniteDomain) -> Result<HeightField> {
    height_of(m, domain, domain.boundary())
}

/// The unique state with height `h` (relative to the boundary matching).
pub fn matching_of(h: &HeightField, domain: &FiniteDomain) -> Result<Matching> {
    if h.reference != *domain.boundary() || h.values.len() != domain.n_faces() {
        return Err(Error::DomainMismatch);
    }
    let caps = Capacities::of_domain(domain);
    caps.check(&h.values)?;
    if h.values[domain.reference_face()] != 0 {
        return Err(Error::InvalidHeight {
            from: domain.reference_face(),
            to: domain.reference_face(),
        });
    }
    Ok(Matching::from_occupancy(
        domain.window().clone(),
        caps.occupancy_of(&h.values),
    ))
}

/// Heights of a state from a raw value vector relative to the boundary.
pub fn height_field(domain: &FiniteDomain, values: Vec<i64>) -> HeightField {
    HeightField {
        values,
        reference: domain.boundary().clone(),
        reference_face: domain.reference_face(),
    }
}

/// `(h_min, h_max)` with `h_max(f) = D(f0, f)` and `h_min(f) = -D(f, f0)`.
pub fn extremal_heights(domain: &FiniteDomain) -> Result<(HeightField, HeightField)> {
    let caps = Capacities::of_domain(domain);
    let f0 = domain.reference_face();
    let up = caps.distances(f0, false);
    let down = caps.distances(f0, true);
    if up.iter().chain(&down).any(|&d| d >= UNREACHED) {
        return Err(Error::NoMatching);
    }
    let hmax = height_field(domain, up);
    let hmin = height_field(domain, down.into_iter().map(|d| -d).collect());
    Ok((hmin, hmax))
}

/// Whether an integer face function is the height of some state.
pub fn is_valid_height(domain: &FiniteDomain, h: &[i64]) -> bool {
    h[domain.reference_face()] == 0 && Capacities::of_domain(domain).check(h).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, carve_free, LatticeKind, Region};

    fn domino(l: u32) -> FiniteDomain {
        carve_free(&build_lattice(LatticeKind::Square), &Region::Square, l).unwrap()
    }

    #[test]
    fn boundary_has_zero_height() {
        let d = domino(4);
        let h = heights(d.boundary(), &d).unwrap();
        assert!(h.values.iter().all(|&v| v == 0));
        assert_eq!(matching_of(&h, &d).unwrap(), *d.boundary());
    }

    #[test]
    fn extremes_are_valid_and_round_trip() {
        for l in [2, 4, 6] {
            let d = domino(l);
            let (lo, hi) = extremal_heights(&d).unwrap();
            assert!(lo.le(&hi));
            for h in [&lo, &hi] {
                let m = matching_of(h, &d).unwrap();
                assert_eq!(heights(&m, &d).unwrap().values, h.values);
                assert_eq!(h.values[d.reference_face()], 0);
            }
        }
    }

    #[test]
    fn two_by_two_extremes_differ_by_one() {
        let d = domino(2);
        let (lo, hi) = extremal_heights(&d).unwrap();
        let diff: Vec<i64> = hi.values.iter().zip(&lo.values).map(|(a, b)| a - b).collect();
        assert_eq!(diff.iter().filter(|&&x| x == 1).count(), 1);
        assert!(diff.iter().all(|&x| x == 0 || x == 1));
    }

    #[test]
    fn invalid_height_is_reported() {
        let d = domino(4);
        let mut v = vec![0; d.n_faces()];
        v[d.interior_faces()[0]] = 5;
        assert!(matches!(
            matching_of(&height_field(&d, v), &d),
            Err(Error::InvalidHeight { .. })
        ));
    }
}
