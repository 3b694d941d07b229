//! Exact expected volume change under one unit of time.
//!
//! Every dynamics is a sum of rate-1 clocks, so the drift of `V = Σ (h2 - h1)`
//! is a sum over clocks of the expected change when that clock rings. For
//! the fast dynamics a clock resamples a bead uniformly on its interval
//! `[lo, hi]`, and since a bead moving up by one lowers one face by one,
//! its contribution to `Σ h` is `p - (lo + hi)/2`. Synchronous clocks move
//! a whole parity class at once, but the intervals inside a class do not
//! interact, so the drift is the same as for the asynchronous clocks.

use crate::beads::{BeadId, Surface};
use crate::dynamics::{Band, DynamicsKind};
use crate::error::{Error, Result};
use crate::lattice::FiniteDomain;
use crate::matching::{face_state, FaceState};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::fmt::Write as _;

fn half(n: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(2))
}

/// Expected change of `Σ_f h(f)` per unit time for one chain, restricted to
/// the clocks accepted by `keep` (bead or face thread).
fn sum_drift(s: &Surface, domain: &FiniteDomain, kind: DynamicsKind, band: Option<&Band>, keep: &dyn Fn(i64) -> bool) -> BigRational {
    match kind {
        DynamicsKind::GlauberLocal => {
            let w = domain.window();
            let mut twice = 0i64;
            for &f in domain.interior_faces() {
                if !keep(w.faces[f].thread) {
                    continue;
                }
                for up in [true, false] {
                    if can_rotate(s, domain, f, up, band) {
                        twice += if up { 1 } else { -1 };
                    }
                }
            }
            half(twice)
        }
        DynamicsKind::SyncFast | DynamicsKind::AsyncFast => {
            let mut twice = 0i64;
            for b in s.beads.mobile(domain) {
                if !keep(b.thread) {
                    continue;
                }
                twice += bead_term(s, domain, b, band);
            }
            half(twice)
        }
    }
}

/// Twice the expected change of `Σ h` when bead `b` is resampled.
fn bead_term(s: &Surface, domain: &FiniteDomain, b: BeadId, band: Option<&Band>) -> i64 {
    let (lo, hi) = s.interval(domain, b, band);
    2 * s.beads.position(b) - lo - hi
}

fn can_rotate(s: &Surface, domain: &FiniteDomain, f: usize, up: bool, band: Option<&Band>) -> bool {
    let from = if up { FaceState::Low } else { FaceState::High };
    if face_state(domain.window(), s.matching.occupancy(), f) != from {
        return false;
    }
    match band {
        Some(b) if up => s.heights[f] < b.ceiling[f],
        Some(b) => s.heights[f] > b.floor[f],
        None => true,
    }
}

fn check_pair(s1: &Surface, s2: &Surface) -> Result<()> {
    if !s1.matching.window().same_shape(s2.matching.window()) || s1.heights.len() != s2.heights.len() {
        return Err(Error::DomainMismatch);
    }
    Ok(())
}

/// Expected change of `Σ_f h(f)` per unit time for a single chain.
pub fn surface_drift(s: &Surface, domain: &FiniteDomain, kind: DynamicsKind, band: Option<&Band>) -> BigRational {
    sum_drift(s, domain, kind, band, &|_| true)
}

/// Drift of `V` computed in one pass over every clock.
pub fn direct_drift(
    s1: &Surface,
    s2: &Surface,
    domain: &FiniteDomain,
    kind: DynamicsKind,
    band: Option<&Band>,
) -> Result<BigRational> {
    check_pair(s1, s2)?;
    Ok(surface_drift(s2, domain, kind, band) - surface_drift(s1, domain, kind, band))
}

/// Drift of `V` between `s` and `s` with face `f` rotated up. Only clocks
/// on threads `i - 2 ..= i + 2` of the face can see the difference.
pub fn rotation_drift(
    s: &Surface,
    f: usize,
    domain: &FiniteDomain,
    kind: DynamicsKind,
    band: Option<&Band>,
) -> Result<BigRational> {
    let mut t = s.clone();
    if !t.rotate(domain, f, true, band) {
        return Err(Error::NotRotatable(f));
    }
    let i = domain.window().faces[f].thread;
    let near = move |j: i64| (j - i).abs() <= 2;
    Ok(sum_drift(&t, domain, kind, band, &near) - sum_drift(s, domain, kind, band, &near))
}

/// Faces to rotate up, in order, to walk from `s1` to `s2` through states
/// that stay between the two.
pub fn rotation_chain(s1: &Surface, s2: &Surface, domain: &FiniteDomain) -> Result<Vec<usize>> {
    check_pair(s1, s2)?;
    if s1.heights.iter().zip(&s2.heights).any(|(a, b)| a > b) {
        return Err(Error::InvalidConstraint(
            (0..s1.heights.len()).find(|&f| s1.heights[f] > s2.heights[f]).unwrap(),
        ));
    }
    let mut cur = s1.clone();
    let mut chain = Vec::new();
    let mut pending: Vec<usize> = domain
        .interior_faces()
        .iter()
        .copied()
        .filter(|&f| cur.heights[f] < s2.heights[f])
        .collect();
    while !pending.is_empty() {
        // some face below s2 is always a minimal element that can go up
        let k = pending
            .iter()
            .position(|&f| cur.rotate(domain, f, true, None))
            .ok_or(Error::NoMatching)?;
        let f = pending[k];
        chain.push(f);
        if cur.heights[f] == s2.heights[f] {
            pending.swap_remove(k);
        }
    }
    Ok(chain)
}

/// Expected change of `V = Σ (h2 - h1)` per unit time of the given
/// dynamics, exactly. Requires `s1 ≤ s2`; the value is the sum of the
/// single-rotation drifts along a monotone rotation chain from `s1` to `s2`.
pub fn exact_update_drift(
    s1: &Surface,
    s2: &Surface,
    domain: &FiniteDomain,
    kind: DynamicsKind,
    band: Option<&Band>,
) -> Result<BigRational> {
    let chain = rotation_chain(s1, s2, domain)?;
    let mut cur = s1.clone();
    let mut total = BigRational::zero();
    for f in chain {
        total += rotation_drift(&cur, f, domain, kind, band)?;
        cur.rotate(domain, f, true, None);
    }
    Ok(total)
}

/// One single-rotation discrepancy and its drift.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftCase {
    pub face: usize,
    pub thread: i64,
    pub pos: i64,
    pub sides: usize,
    /// Face-graph distance to the nearest face outside G′.
    pub depth: usize,
    pub drift: BigRational,
}

impl DriftCase {
    /// Touches a face outside G′.
    pub fn is_boundary(&self) -> bool {
        self.depth <= 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub kind: DynamicsKind,
    pub cases: Vec<DriftCase>,
}

impl DriftReport {
    pub fn all_nonpositive(&self) -> bool {
        self.cases.iter().all(|c| c.drift <= BigRational::zero())
    }

    /// Smallest `r` such that every case deeper than `r` has zero drift.
    pub fn zero_radius(&self) -> usize {
        self.cases
            .iter()
            .filter(|c| !c.drift.is_zero())
            .map(|c| c.depth)
            .max()
            .unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("face,thread,pos,sides,depth,case,drift\n");
        for c in &self.cases {
            let tag = if c.is_boundary() { "boundary" } else { "interior" };
            writeln!(out, "{},{},{},{},{},{},{}", c.face, c.thread, c.pos, c.sides, c.depth, tag, c.drift).unwrap();
        }
        out
    }
}

/// Graph distance from each face to the nearest face outside G′.
pub fn face_depths(domain: &FiniteDomain) -> Vec<usize> {
    let w = domain.window();
    let mut depth = vec![usize::MAX; w.faces.len()];
    let mut queue = std::collections::VecDeque::new();
    for f in 0..w.faces.len() {
        if !domain.is_interior_face(f) {
            depth[f] = 0;
            queue.push_back(f);
        }
    }
    while let Some(f) = queue.pop_front() {
        for (_, g) in w.neighbours(f) {
            if depth[g] == usize::MAX {
                depth[g] = depth[f] + 1;
                queue.push_back(g);
            }
        }
    }
    depth
}

/// Drift of every single-rotation discrepancy `(s with f lowered, s)` over
/// the faces of G′ that `s` can rotate down.
pub fn discrepancy_report(s: &Surface, domain: &FiniteDomain, kind: DynamicsKind, band: Option<&Band>) -> Result<DriftReport> {
    let depth = face_depths(domain);
    let w = domain.window();
    let mut cases = Vec::new();
    for &f in domain.interior_faces() {
        let mut low = s.clone();
        if !low.rotate(domain, f, false, band) {
            continue;
        }
        let face = &w.faces[f];
        cases.push(DriftCase {
            face: f,
            thread: face.thread,
            pos: face.pos,
            sides: face.boundary.len(),
            depth: depth[f],
            drift: rotation_drift(&low, f, domain, kind, band)?,
        });
    }
    Ok(DriftReport { kind, cases })
}

/// Single-rotation discrepancies over `samples` exact uniform states of the
/// pyramid domain `W_L` (plus `p` itself), for the given dynamics.
pub fn pyramid_drift_report(
    lattice: crate::lattice::LatticeKind,
    l: u32,
    kind: DynamicsKind,
    samples: usize,
    seed: u64,
) -> Result<DriftReport> {
    use rand::SeedableRng;
    let p = crate::matching::pyramid(lattice, l);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![Surface::new(p.matching.clone(), &p.domain)?];
    for _ in 0..samples {
        let m = crate::exact::exact_sample(&p.domain, &mut rng)?;
        states.push(Surface::new(m, &p.domain)?);
    }
    let mut cases = Vec::new();
    for s in &states {
        cases.extend(discrepancy_report(s, &p.domain, kind, None)?.cases);
    }
    Ok(DriftReport { kind, cases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_sample;
    use crate::lattice::{build_lattice, carve_domain, carve_free, LatticeKind, Region};
    use crate::matching::{flatten_to_plane, Capacities, Matching};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flat_hexagon(l: u32) -> FiniteDomain {
        let m = flatten_to_plane(LatticeKind::Hexagon, (0.0, 0.0), l).unwrap();
        carve_domain(&build_lattice(LatticeKind::Hexagon), &Region::Square, l, &m).unwrap()
    }

    fn surface(d: &FiniteDomain, h: &[i64]) -> Surface {
        let caps = Capacities::of_domain(d);
        Surface::new(Matching::from_occupancy(d.window().clone(), caps.occupancy_of(h)), d).unwrap()
    }

    /// An ordered pair from the pointwise min and max of two samples.
    fn ordered_pair(d: &FiniteDomain, rng: &mut ChaCha8Rng) -> (Surface, Surface) {
        let a = Surface::new(exact_sample(d, rng).unwrap(), d).unwrap();
        let b = Surface::new(exact_sample(d, rng).unwrap(), d).unwrap();
        let lo: Vec<i64> = a.heights.iter().zip(&b.heights).map(|(x, y)| *x.min(y)).collect();
        let hi: Vec<i64> = a.heights.iter().zip(&b.heights).map(|(x, y)| *x.max(y)).collect();
        (surface(d, &lo), surface(d, &hi))
    }

    #[test]
    fn bulk_hexagon_discrepancy_has_zero_drift() {
        let d = flat_hexagon(14);
        let s = Surface::new(d.boundary().clone(), &d).unwrap();
        let depth = face_depths(&d);
        let mut seen = 0;
        for &f in d.interior_faces() {
            if depth[f] < 4 || !s.clone().rotate(&d, f, true, None) {
                continue;
            }
            seen += 1;
            for kind in [DynamicsKind::SyncFast, DynamicsKind::AsyncFast] {
                assert!(rotation_drift(&s, f, &d, kind, None).unwrap().is_zero(), "face {f}");
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn telescoped_drift_equals_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in LatticeKind::ALL {
            let d = carve_free(&build_lattice(kind), &Region::Disk, 7).unwrap();
            for _ in 0..4 {
                let (s1, s2) = ordered_pair(&d, &mut rng);
                for dk in DynamicsKind::ALL {
                    assert_eq!(
                        exact_update_drift(&s1, &s2, &d, dk, None).unwrap(),
                        direct_drift(&s1, &s2, &d, dk, None).unwrap(),
                        "{kind} {dk}"
                    );
                }
            }
        }
    }

    #[test]
    fn single_rotation_drift_ignores_remote_threads() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = carve_free(&build_lattice(LatticeKind::SquareHexagon), &Region::Square, 10).unwrap();
        let w = d.window();
        let s = Surface::new(exact_sample(&d, &mut rng).unwrap(), &d).unwrap();
        let f = *d
            .interior_faces()
            .iter()
            .find(|&&f| w.faces[f].thread <= w.threads.0 + 4 && s.clone().rotate(&d, f, true, None))
            .unwrap();
        let i = w.faces[f].thread;
        // rotate faces far from thread i only
        let mut t = s.clone();
        let mut moved = 0;
        for &g in d.interior_faces() {
            if (w.faces[g].thread - i).abs() > 3 && t.rotate(&d, g, moved % 2 == 0, None) {
                moved += 1;
            }
        }
        assert!(moved > 0);
        for dk in DynamicsKind::ALL {
            let a = rotation_drift(&s, f, &d, dk, None).unwrap();
            let b = rotation_drift(&t, f, &d, dk, None).unwrap();
            assert_eq!(a, b, "{dk}");
            // the local sum agrees with the full one
            let mut up = s.clone();
            up.rotate(&d, f, true, None);
            assert_eq!(a, direct_drift(&s, &up, &d, dk, None).unwrap(), "{dk}");
        }
    }

    #[test]
    fn boundary_discrepancies_lie_in_minus_one_to_zero() {
        let r = pyramid_drift_report(LatticeKind::Square, 6, DynamicsKind::AsyncFast, 6, 2).unwrap();
        let neg: Vec<_> = r.cases.iter().filter(|c| !c.drift.is_zero()).collect();
        assert!(!neg.is_empty());
        let minus_one = BigRational::from_integer((-1).into());
        for c in neg {
            assert!(c.is_boundary(), "{c:?}");
            assert!(c.drift >= minus_one && c.drift < BigRational::zero(), "{c:?}");
        }
    }

    #[test]
    fn pyramid_interior_drift_vanishes() {
        for kind in LatticeKind::ALL {
            for dk in [DynamicsKind::SyncFast, DynamicsKind::AsyncFast] {
                let r = pyramid_drift_report(kind, 6, dk, 4, 9).unwrap();
                assert!(r.all_nonpositive(), "{kind} {dk}");
                assert!(r.zero_radius() <= 1, "{kind} {dk}: {}", r.zero_radius());
            }
        }
    }

    #[test]
    fn unordered_pairs_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = carve_free(&build_lattice(LatticeKind::Square), &Region::Disk, 7).unwrap();
        let (s1, s2) = ordered_pair(&d, &mut rng);
        if s1 != s2 {
            assert!(rotation_chain(&s2, &s1, &d).is_err());
        }
    }
}
