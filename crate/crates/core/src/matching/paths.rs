//! Face rotations and free paths.

use super::Matching;
use crate::error::{Error, Result};
use crate::lattice::{FiniteDomain, Window};

/// `Up` raises the height of the rotated face by one, `Down` lowers it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }
}

/// `High`: the even boundary positions (bottom edge included) are occupied.
/// `Low`: the odd ones are. Rotating `High -> Low` lowers the face height.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceState {
    High,
    Low,
    Neither,
}

pub fn face_state(window: &Window, occ: &[bool], f: usize) -> FaceState {
    let b = &window.faces[f].boundary;
    let even = b.iter().step_by(2).all(|&e| occ[e]);
    if even {
        return FaceState::High;
    }
    let odd = b.iter().skip(1).step_by(2).all(|&e| occ[e]);
    if odd {
        FaceState::Low
    } else {
        FaceState::Neither
    }
}

pub fn rotatable(domain: &FiniteDomain, m: &Matching, f: usize, dir: Direction) -> bool {
    domain.is_interior_face(f)
        && face_state(domain.window(), m.occupancy(), f)
            == match dir {
                Direction::Up => FaceState::Low,
                Direction::Down => FaceState::High,
            }
}

pub fn apply_rotation(m: &Matching, f: usize, dir: Direction, domain: &FiniteDomain) -> Result<Matching> {
    if !domain.is_interior_face(f) {
        return Err(Error::OutsideDomain(f));
    }
    if !rotatable(domain, m, f, dir) {
        return Err(Error::NotRotatable(f));
    }
    let mut out = m.clone();
    for &e in &domain.window().faces[f].boundary {
        out.set(e, !m.is_occupied(e));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreePath {
    pub faces: Vec<usize>,
    /// `Up` paths cross free edges positively and end at an up-rotatable
    /// face; `Down` paths cross negatively and end at a down-rotatable face.
    pub sign: Direction,
    pub terminal_rotatable: bool,
}

/// Follows free edges from `f` until a face rotatable in direction `sign`.
/// Among several exits the neighbour with the smallest (thread, position)
/// is taken. The path stops early, non-rotatable, if every exit leaves G′.
pub fn grow_free_path(m: &Matching, f: usize, sign: Direction, domain: &FiniteDomain) -> FreePath {
    let w = domain.window();
    // positive outward crossings use odd boundary positions
    let parity = match sign {
        Direction::Up => 1,
        Direction::Down => 0,
    };
    let mut faces = vec![f];
    let mut visited = std::collections::HashSet::from([f]);
    let mut cur = f;
    loop {
        if rotatable(domain, m, cur, sign) {
            return FreePath {
                faces,
                sign,
                terminal_rotatable: true,
            };
        }
        let face = &w.faces[cur];
        let next = face
            .boundary
            .iter()
            .enumerate()
            .filter(|&(t, &e)| t % 2 == parity && !m.is_occupied(e) && domain.is_interior_edge(e))
            .filter_map(|(_, &e)| {
                let edge = &w.edges[e];
                let g = if edge.from == Some(cur) { edge.to } else { edge.from }?;
                domain.is_interior_face(g).then_some(g)
            })
            .min_by_key(|&g| (w.faces[g].thread, w.faces[g].pos));
        match next {
            Some(g) => {
                assert!(visited.insert(g), "free path revisits face {g}");
                faces.push(g);
                cur = g;
            }
            None => {
                return FreePath {
                    faces,
                    sign,
                    terminal_rotatable: false,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, carve_free, LatticeKind, Region};
    use crate::matching::{extremal_heights, heights, matching_of};

    #[test]
    fn two_horizontal_dominoes_become_vertical() {
        let d = carve_free(&build_lattice(LatticeKind::Square), &Region::Square, 2).unwrap();
        let f = d.interior_faces()[0];
        let m = d.boundary().clone();
        let dir = if rotatable(&d, &m, f, Direction::Up) {
            Direction::Up
        } else {
            Direction::Down
        };
        let r = apply_rotation(&m, f, dir, &d).unwrap();
        let before: Vec<usize> = m.occupied_edges().collect();
        let after: Vec<usize> = r.occupied_edges().collect();
        assert_eq!(before.len(), 2);
        assert_eq!(after.len(), 2);
        assert!(before.iter().all(|e| !after.contains(e)));
        let back = apply_rotation(&r, f, dir.opposite(), &d).unwrap();
        assert_eq!(back, m);
        let h = heights(&r, &d).unwrap();
        let expect = if dir == Direction::Up { 1 } else { -1 };
        for (g, &v) in h.values.iter().enumerate() {
            assert_eq!(v, if g == f { expect } else { 0 });
        }
    }

    #[test]
    fn rotation_outside_domain_is_rejected() {
        let d = carve_free(&build_lattice(LatticeKind::Square), &Region::Square, 2).unwrap();
        let err = apply_rotation(d.boundary(), d.reference_face(), Direction::Up, &d).unwrap_err();
        assert_eq!(err, Error::OutsideDomain(d.reference_face()));
    }

    #[test]
    fn free_paths_end_at_rotatable_faces() {
        let d = carve_free(&build_lattice(LatticeKind::Square), &Region::Square, 8).unwrap();
        let (_, hi) = extremal_heights(&d).unwrap();
        let top = matching_of(&hi, &d).unwrap();
        for &f in d.interior_faces() {
            let p = grow_free_path(&top, f, Direction::Down, &d);
            assert!(p.terminal_rotatable);
            let h = heights(&top, &d).unwrap();
            let last = *p.faces.last().unwrap();
            assert!(h.values[last] >= h.values[f]);
        }
    }
}
