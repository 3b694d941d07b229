//! The bead encoding: dimers on transverse edges are beads, and a state is
//! fixed by the bead positions on every thread.
//!
//! A bead on `e^i_p` moves up to `e^i_{p+1}` by rotating `f^i_{p+1}` from
//! high to low, which lowers that face by one. Moving down rotates `f^i_p`
//! from low to high.

use crate::dynamics::Band;
use crate::error::{Error, Result};
use crate::lattice::{EdgeKind, FiniteDomain, Window};
use crate::matching::{face_state, heights, FaceState, Matching};
use std::fmt::Write as _;
use std::sync::Arc;

/// A bead by thread and rank among the window beads of that thread. Beads
/// never cross, so ranks are stable under every move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeadId {
    pub thread: i64,
    pub rank: usize,
}

/// Sorted bead positions per window thread.
#[derive(Clone)]
pub struct BeadConfig {
    window: Arc<Window>,
    beads: Vec<Vec<i64>>,
}

impl PartialEq for BeadConfig {
    fn eq(&self, other: &Self) -> bool {
        self.beads == other.beads
    }
}

impl Eq for BeadConfig {}

impl std::hash::Hash for BeadConfig {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.beads.hash(state);
    }
}

impl std::fmt::Debug for BeadConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map()
            .entries(
                self.beads
                    .iter()
                    .enumerate()
                    .map(|(t, b)| (self.window.threads.0 + t as i64, b)),
            )
            .finish()
    }
}

impl BeadConfig {
    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    pub fn threads(&self) -> impl Iterator<Item = (i64, &[i64])> + '_ {
        let t0 = self.window.threads.0;
        self.beads
            .iter()
            .enumerate()
            .map(move |(t, b)| (t0 + t as i64, b.as_slice()))
    }

    pub fn thread(&self, i: i64) -> &[i64] {
        &self.beads[(i - self.window.threads.0) as usize]
    }

    pub fn position(&self, b: BeadId) -> i64 {
        self.thread(b.thread)[b.rank]
    }

    pub fn is_mobile(&self, domain: &FiniteDomain, b: BeadId) -> bool {
        let e = self
            .window
            .transverse_index(b.thread, self.position(b))
            .expect("beads lie in the window");
        domain.is_interior_edge(e)
    }

    /// Mobile beads, thread by thread in rank order.
    pub fn mobile(&self, domain: &FiniteDomain) -> Vec<BeadId> {
        self.threads()
            .flat_map(|(i, b)| (0..b.len()).map(move |rank| BeadId { thread: i, rank }))
            .filter(|&b| self.is_mobile(domain, b))
            .collect()
    }

    /// Number of mobile beads per thread.
    pub fn mobile_counts(&self, domain: &FiniteDomain) -> Vec<(i64, usize)> {
        let mut out: Vec<(i64, usize)> = Vec::new();
        for b in self.mobile(domain) {
            match out.last_mut() {
                Some((t, c)) if *t == b.thread => *c += 1,
                _ => out.push((b.thread, 1)),
            }
        }
        out
    }

    fn set_position(&mut self, b: BeadId, pos: i64) {
        let t = (b.thread - self.window.threads.0) as usize;
        self.beads[t][b.rank] = pos;
    }

    /// `thread,position_index` rows for every bead.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("thread,position_index\n");
        for (i, beads) in self.threads() {
            for p in beads {
                writeln!(out, "{i},{p}").unwrap();
            }
        }
        out
    }
}

pub fn beads_of(m: &Matching, domain: &FiniteDomain) -> BeadConfig {
    let w = domain.window().clone();
    let mut beads = vec![Vec::new(); (w.threads.1 - w.threads.0 + 1) as usize];
    for e in 0..w.n_transverse() {
        if m.is_occupied(e) {
            if let EdgeKind::Transverse { thread, pos } = w.edges[e].kind {
                beads[(thread - w.threads.0) as usize].push(pos);
            }
        }
    }
    // edge indices run by thread then position, so each list is sorted
    BeadConfig { window: w, beads }
}

/// Checks interlacing: between two consecutive beads of a thread (one of
/// them mobile) each neighbouring thread holds exactly one bead, whenever
/// every seam vertex between them is matched.
pub fn check_interlacing(b: &BeadConfig, domain: &FiniteDomain) -> Result<()> {
    let w = &b.window;
    let spec = &w.spec;
    let (lo, hi) = w.bead_range();
    let bracketed = |xs: &[i64]| xs.first().is_some_and(|&x| x > lo) && xs.last().is_some_and(|&x| x < hi);
    // stretches reaching the window rim, or vertices outside the domain
    // that the boundary matching leaves bare, are not constrained
    let m0 = domain.boundary();
    let matched = |v: usize| domain.is_interior_vertex(v) || w.vertices[v].edges.iter().any(|&e| m0.is_occupied(e));
    let enclosed = |seam: i64, a: i64, z: i64| {
        (a..=z).all(|k| w.vertex_index(seam, k).is_some_and(|v| w.is_enclosed(v) && matched(v)))
    };
    for (i, beads) in b.threads() {
        for r in 0..beads.len().saturating_sub(1) {
            let (p, p2) = (beads[r], beads[r + 1]);
            let mobile = [r, r + 1]
                .iter()
                .any(|&rank| b.is_mobile(domain, BeadId { thread: i, rank }));
            if !mobile {
                continue;
            }
            // right neighbour: e^i_p ≺ e^{i+1}_x ≺ e^i_{p2}
            if i < w.threads.1 {
                let (a, z) = (spec.right_index(p), spec.right_index(p2));
                let xs: Vec<i64> = (lo..=hi)
                    .filter(|&x| spec.left_index(x) > a && spec.left_index(x) < z)
                    .collect();
                if enclosed(i, a, z) && bracketed(&xs) {
                    let n = b.thread(i + 1).iter().filter(|x| xs.contains(x)).count();
                    if n != 1 {
                        return Err(Error::InterlacingViolation { thread: i, index: r });
                    }
                }
            }
            // left neighbour: e^i_p ≺ e^{i-1}_x ≺ e^i_{p2} along seam i-1
            if i > w.threads.0 {
                let (a, z) = (spec.left_index(p), spec.left_index(p2));
                let xs: Vec<i64> = (lo..=hi)
                    .filter(|&x| spec.right_index(x) > a && spec.right_index(x) < z)
                    .collect();
                if enclosed(i - 1, a, z) && bracketed(&xs) {
                    let n = b.thread(i - 1).iter().filter(|x| xs.contains(x)).count();
                    if n != 1 {
                        return Err(Error::InterlacingViolation { thread: i, index: r });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Rebuilds the matching: beads fix the transverse dimers, and the seam
/// vertices they leave uncovered are paired along the seam.
pub fn matching_of_beads(b: &BeadConfig, domain: &FiniteDomain) -> Result<Matching> {
    let w = domain.window();
    if !b.window.same_shape(w) {
        return Err(Error::DomainMismatch);
    }
    check_interlacing(b, domain)?;
    let m0 = domain.boundary();
    let mut occ = m0.occupancy().to_vec();
    for (e, o) in occ.iter_mut().enumerate() {
        if domain.is_interior_edge(e) {
            *o = false;
        }
    }
    for (i, beads) in b.threads() {
        for (rank, &p) in beads.iter().enumerate() {
            let e = w.transverse_index(i, p).expect("beads lie in the window");
            if !domain.is_interior_edge(e) && !m0.is_occupied(e) {
                return Err(Error::InterlacingViolation { thread: i, index: rank });
            }
            occ[e] = true;
        }
    }
    for e in 0..w.n_transverse() {
        if !domain.is_interior_edge(e) && m0.is_occupied(e) {
            let EdgeKind::Transverse { thread, pos } = w.edges[e].kind else {
                unreachable!()
            };
            if !b.thread(thread).contains(&pos) {
                return Err(Error::InterlacingViolation { thread, index: 0 });
            }
        }
    }
    let covered = |occ: &[bool], v: usize| w.vertices[v].edges.iter().any(|&e| occ[e]);
    let fail = |v: usize| {
        let vx = &w.vertices[v];
        let thread = vx.seam;
        let rank = b
            .thread(thread.clamp(w.threads.0, w.threads.1))
            .partition_point(|&p| w.spec.right_index(p) < vx.k);
        Error::InterlacingViolation {
            thread,
            index: rank,
        }
    };
    let (k0, k1) = (
        w.vertices.first().unwrap().k,
        w.vertices.last().unwrap().k,
    );
    for s in w.threads.0 - 1..=w.threads.1 {
        let mut k = k0;
        while k <= k1 {
            let v = w.vertex_index(s, k).unwrap();
            if domain.is_interior_vertex(v) && !covered(&occ, v) {
                let e = w.seam_edge_index(s, k).filter(|&e| domain.is_interior_edge(e));
                let u = w.vertex_index(s, k + 1);
                match (e, u) {
                    (Some(e), Some(u)) if !covered(&occ, u) => {
                        occ[e] = true;
                        k += 2;
                        continue;
                    }
                    _ => return Err(fail(v)),
                }
            }
            k += 1;
        }
    }
    for v in 0..w.vertices.len() {
        if domain.is_interior_vertex(v) && w.vertices[v].edges.iter().filter(|&&e| occ[e]).count() != 1 {
            return Err(fail(v));
        }
    }
    Ok(Matching::from_occupancy(w.clone(), occ))
}

/// A state kept in three synchronized encodings: matching, heights relative
/// to the boundary matching, and beads.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surface {
    pub matching: Matching,
    pub heights: Vec<i64>,
    pub beads: BeadConfig,
}

impl Surface {
    pub fn new(m: Matching, domain: &FiniteDomain) -> Result<Self> {
        let h = heights(&m, domain)?.values;
        let beads = beads_of(&m, domain);
        Ok(Surface {
            matching: m,
            heights: h,
            beads,
        })
    }

    fn face(&self, i: i64, j: i64) -> Option<usize> {
        self.beads.window.face_index(i, j)
    }

    /// Whether face `f` can be rotated from `from` to the other state with
    /// the result inside the band.
    fn can_rotate(&self, domain: &FiniteDomain, f: usize, from: FaceState, band: Option<&Band>) -> bool {
        if !domain.is_interior_face(f) || face_state(domain.window(), self.matching.occupancy(), f) != from {
            return false;
        }
        match (from, band) {
            (FaceState::High, Some(b)) => self.heights[f] > b.floor[f],
            (FaceState::Low, Some(b)) => self.heights[f] < b.ceiling[f],
            _ => true,
        }
    }

    /// Positions the bead can reach by single rotations of its own thread,
    /// all other beads fixed, within G′ and the band.
    pub fn interval(&self, domain: &FiniteDomain, b: BeadId, band: Option<&Band>) -> (i64, i64) {
        let p = self.beads.position(b);
        if !self.beads.is_mobile(domain, b) {
            return (p, p);
        }
        let w = domain.window();
        let occ = self.matching.occupancy();
        let (mut lo, mut hi) = (p, p);
        // up: f_{x+1} must be high apart from its bottom edge
        while let Some(f) = self.face(b.thread, hi + 1) {
            let bd = &w.faces[f].boundary;
            let others = bd.iter().skip(2).step_by(2).all(|&e| occ[e]);
            let ok = domain.is_interior_face(f)
                && others
                && band.is_none_or(|bd| self.heights[f] > bd.floor[f]);
            if !ok {
                break;
            }
            hi += 1;
        }
        // down: f_x must be low apart from its top edge
        while let Some(f) = self.face(b.thread, lo) {
            let top = w.transverse_index(b.thread, lo);
            let others = w.faces[f]
                .boundary
                .iter()
                .skip(1)
                .step_by(2)
                .all(|&e| Some(e) == top || occ[e]);
            let ok = domain.is_interior_face(f)
                && others
                && band.is_none_or(|bd| self.heights[f] < bd.ceiling[f]);
            if !ok {
                break;
            }
            lo -= 1;
        }
        (lo, hi)
    }

    /// Moves a bead along its thread by successive rotations.
    pub fn move_bead(&mut self, domain: &FiniteDomain, b: BeadId, target: i64) {
        let w = domain.window().clone();
        let mut p = self.beads.position(b);
        while p < target {
            let f = self.face(b.thread, p + 1).unwrap();
            debug_assert!(self.can_rotate(domain, f, FaceState::High, None));
            self.flip(&w, f);
            self.heights[f] -= 1;
            p += 1;
        }
        while p > target {
            let f = self.face(b.thread, p).unwrap();
            debug_assert!(self.can_rotate(domain, f, FaceState::Low, None));
            self.flip(&w, f);
            self.heights[f] += 1;
            p -= 1;
        }
        self.beads.set_position(b, target);
    }

    fn flip(&mut self, w: &Window, f: usize) {
        for &e in &w.faces[f].boundary {
            let on = self.matching.is_occupied(e);
            self.matching.set(e, !on);
        }
    }

    /// Rotates face `f` if allowed; returns whether it moved. `up` raises
    /// the face height.
    pub fn rotate(&mut self, domain: &FiniteDomain, f: usize, up: bool, band: Option<&Band>) -> bool {
        let from = if up { FaceState::Low } else { FaceState::High };
        if !self.can_rotate(domain, f, from, band) {
            return false;
        }
        let (i, j) = {
            let face = &domain.window().faces[f];
            (face.thread, face.pos)
        };
        let beads = self.beads.thread(i);
        let (old, new) = if up { (j, j - 1) } else { (j - 1, j) };
        let rank = beads.binary_search(&old).expect("rotatable face carries a bead");
        let w = domain.window().clone();
        self.flip(&w, f);
        self.heights[f] += if up { 1 } else { -1 };
        self.beads.set_position(BeadId { thread: i, rank }, new);
        true
    }
}

/// `accessible_interval` on a bare bead configuration.
pub fn accessible_interval(
    b: &BeadConfig,
    bead: BeadId,
    domain: &FiniteDomain,
    band: Option<&Band>,
) -> Result<(i64, i64)> {
    let m = matching_of_beads(b, domain)?;
    let s = Surface::new(m, domain)?;
    Ok(s.interval(domain, bead, band))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, carve_free, LatticeKind, Region};
    use crate::matching::{extremal_heights, matching_of, pyramid};

    #[test]
    fn pyramid_round_trip() {
        for kind in LatticeKind::ALL {
            let p = pyramid(kind, 3);
            let b = beads_of(&p.matching, &p.domain);
            let back = matching_of_beads(&b, &p.domain).unwrap_or_else(|e| panic!("{kind}: {e:?}"));
            assert_eq!(back, p.matching, "{kind}");
        }
    }

    #[test]
    fn disk_boundaries_round_trip() {
        // square disks leave window vertices bare next to the boundary
        for kind in LatticeKind::ALL {
            for l in 4..=8 {
                let d = carve_free(&build_lattice(kind), &Region::Disk, l).unwrap();
                let b = beads_of(d.boundary(), &d);
                let back = matching_of_beads(&b, &d).unwrap_or_else(|e| panic!("{kind} {l}: {e:?}"));
                assert_eq!(&back, d.boundary(), "{kind} {l}");
            }
        }
    }

    #[test]
    fn pyramid_threads_hold_a_triangle_of_beads() {
        for kind in LatticeKind::ALL {
            let p = pyramid(kind, 3);
            let counts = beads_of(&p.matching, &p.domain).mobile_counts(&p.domain);
            assert_eq!(
                counts,
                vec![(-3, 1), (-2, 2), (-1, 3), (0, 4), (1, 3), (2, 2), (3, 1)],
                "{kind}"
            );
        }
    }

    #[test]
    fn pyramid_beads_cannot_move_down() {
        for kind in LatticeKind::ALL {
            let p = pyramid(kind, 4);
            let s = Surface::new(p.matching.clone(), &p.domain).unwrap();
            for b in s.beads.mobile(&p.domain) {
                assert_eq!(s.interval(&p.domain, b, None).0, s.beads.position(b), "{kind}");
            }
        }
    }

    #[test]
    fn shifted_bead_is_rejected() {
        let spec = build_lattice(LatticeKind::Hexagon);
        let m = crate::matching::flatten_to_plane(LatticeKind::Hexagon, (0.0, 0.0), 12).unwrap();
        let d = crate::lattice::carve_domain(&spec, &Region::Square, 12, &m).unwrap();
        let s = Surface::new(d.boundary().clone(), &d).unwrap();
        let w = d.window();
        let id = s
            .beads
            .mobile(&d)
            .into_iter()
            .find(|&b| {
                let (_, hi) = s.interval(&d, b, None);
                let f = w.face_index(b.thread, hi + 1).unwrap();
                d.is_interior_face(f) && w.faces[f].boundary.iter().all(|&e| d.is_interior_edge(e))
            })
            .unwrap();
        let (_, hi) = s.interval(&d, id, None);
        let mut b = s.beads.clone();
        b.set_position(id, hi + 1);
        assert!(matches!(
            matching_of_beads(&b, &d),
            Err(Error::InterlacingViolation { .. })
        ));
    }

    #[test]
    fn extremes_move_only_one_way() {
        let d = carve_free(&build_lattice(LatticeKind::Square), &Region::Square, 6).unwrap();
        let (lo, hi) = extremal_heights(&d).unwrap();
        let top = Surface::new(matching_of(&hi, &d).unwrap(), &d).unwrap();
        let bottom = Surface::new(matching_of(&lo, &d).unwrap(), &d).unwrap();
        for b in top.beads.mobile(&d) {
            // raising heights means beads move down
            assert_eq!(top.interval(&d, b, None).0, top.beads.position(b));
        }
        for b in bottom.beads.mobile(&d) {
            assert_eq!(bottom.interval(&d, b, None).1, bottom.beads.position(b));
        }
    }
}
