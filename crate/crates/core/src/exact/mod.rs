//! Exact oracles: enumeration, Kasteleyn counting and sampling on finite
//! domains, and the torus Kasteleyn matrix with its inverse on the plane.

mod enumerate;
mod integral;
mod kasteleyn;
pub mod laurent;
mod torus;

pub use enumerate::{count_matchings, enumerate_matchings, Enumeration, DEFAULT_CAP};
pub use integral::{
    asymptotic_kinv, edge_kernel, edge_probabilities, edge_probability, kinv_integral, slope_of_weights,
    weights_for_slope, KinvValue, TorusEdge,
};
pub use kasteleyn::{
    conditional_probability, exact_sample, kasteleyn_count, kasteleyn_matrix, bareiss_determinant,
};
pub use torus::{build_torus_kasteleyn, characteristic_zeros, SpectralData, TorusKasteleyn};

use crate::error::{Error, Result};
use crate::lattice::{Color, EdgeKind, FiniteDomain, LatticeSpec, Slot};
use crate::matching::Matching;

/// Sign of every fundamental-domain edge orbit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KasteleynSigns {
    pub signs: Vec<i8>,
}

impl KasteleynSigns {
    /// The first sign pattern, in binary order, whose product around each
    /// face is `-1` for faces with `0 mod 4` sides and `+1` otherwise.
    pub fn of(spec: &LatticeSpec) -> Result<Self> {
        let n = spec.fundamental_domain.edges.len();
        (0u32..1 << n)
            .map(|mask| KasteleynSigns {
                signs: (0..n).map(|e| if mask >> e & 1 == 1 { -1 } else { 1 }).collect(),
            })
            .find(|s| s.is_valid(spec))
            .ok_or_else(|| Error::UnsupportedLattice(spec.kind.to_string()))
    }

    pub fn is_valid(&self, spec: &LatticeSpec) -> bool {
        spec.face_table.iter().all(|face| {
            let prod: i8 = face.boundary.iter().map(|e| self.signs[e.idx]).product();
            prod == if face.sides % 4 == 0 { -1 } else { 1 }
        })
    }

    pub fn of_slot(&self, spec: &LatticeSpec, slot: Slot) -> i8 {
        self.signs[spec.edge_id(slot).idx]
    }
}

pub(crate) fn slot_of(kind: EdgeKind) -> Slot {
    match kind {
        EdgeKind::Transverse { thread, pos } => Slot::Transverse { thread, pos },
        EdgeKind::Seam { seam, k } => Slot::Seam { seam, k },
    }
}

/// The part of a domain left free by the boundary matching: interior
/// vertices not covered by a fixed dimer, and interior edges between them.
#[derive(Clone, Debug)]
pub(crate) struct FreeGraph {
    /// Window vertex indices.
    pub whites: Vec<usize>,
    pub blacks: Vec<usize>,
    /// (white index, black index, window edge).
    pub edges: Vec<(usize, usize, usize)>,
    /// Over combined indices (whites first, then blacks): (neighbour, edge).
    pub adj: Vec<Vec<(usize, usize)>>,
    /// Boundary occupancy with every interior edge cleared.
    pub base: Vec<bool>,
}

impl FreeGraph {
    pub fn of(domain: &FiniteDomain) -> Self {
        let w = domain.window();
        let m0 = domain.boundary();
        let base: Vec<bool> = (0..w.edges.len())
            .map(|e| m0.is_occupied(e) && !domain.is_interior_edge(e))
            .collect();
        let free: Vec<bool> = (0..w.vertices.len())
            .map(|v| domain.is_interior_vertex(v) && !w.vertices[v].edges.iter().any(|&e| base[e]))
            .collect();
        let mut local = vec![usize::MAX; w.vertices.len()];
        let (mut whites, mut blacks) = (Vec::new(), Vec::new());
        for v in (0..w.vertices.len()).filter(|&v| free[v]) {
            match w.vertices[v].color {
                Color::White => {
                    local[v] = whites.len();
                    whites.push(v);
                }
                Color::Black => {
                    local[v] = blacks.len();
                    blacks.push(v);
                }
            }
        }
        let edges: Vec<(usize, usize, usize)> = (0..w.edges.len())
            .filter(|&e| domain.is_interior_edge(e))
            .filter(|&e| free[w.edges[e].white] && free[w.edges[e].black])
            .map(|e| (local[w.edges[e].white], local[w.edges[e].black], e))
            .collect();
        let nw = whites.len();
        let mut adj = vec![Vec::new(); nw + blacks.len()];
        for (i, &(a, b, _)) in edges.iter().enumerate() {
            adj[a].push((nw + b, i));
            adj[nw + b].push((a, i));
        }
        FreeGraph {
            whites,
            blacks,
            edges,
            adj,
            base,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.whites.len() + self.blacks.len()
    }

    /// The matching made of the fixed dimers plus the given window edges.
    pub fn matching(&self, domain: &FiniteDomain, edges: impl Iterator<Item = usize>) -> Matching {
        let mut occ = self.base.clone();
        for e in edges {
            occ[e] = true;
        }
        Matching::from_occupancy(domain.window().clone(), occ)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeKind};

    #[test]
    fn every_lattice_has_a_sign_gauge() {
        for kind in LatticeKind::ALL {
            let spec = build_lattice(kind);
            let s = KasteleynSigns::of(&spec).unwrap();
            assert!(s.is_valid(&spec), "{kind}");
        }
    }
}
