//! Periodic bipartite lattices described through their thread structure.
//!
//! Every supported lattice is a row of vertical threads (columns of faces)
//! glued along seams. Seam `s` separates thread `s` (left) from thread
//! `s + 1` (right). Seam vertices are indexed `(s, k)` and are white for even
//! `k`. Thread `i` carries the transverse edges `e^i_j`, joining the black
//! vertex `(i - 1, left_index(j))` to the white vertex `(i, right_index(j))`,
//! and face `f^i_j` sits between `e^i_{j-1}` and `e^i_j`. All threads are
//! translates of thread 0, so the whole structure is fixed by a short
//! periodic pattern of seam-edge counts per face.

mod domain;
mod newton;
mod window;

pub use domain::{carve_domain, carve_free, carve_with, FiniteDomain, Region};
pub use newton::{
    newton_polygon, occupation_slope, periodic_matchings, periodic_slope, strictly_inside,
    PeriodicMatching,
};
pub use window::{EdgeKind, Window, WindowEdge, WindowFace, WindowVertex};

use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LatticeKind {
    Square,
    Hexagon,
    SquareHexagon,
}

impl LatticeKind {
    pub const ALL: [LatticeKind; 3] = [
        LatticeKind::Square,
        LatticeKind::Hexagon,
        LatticeKind::SquareHexagon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Square => "square",
            LatticeKind::Hexagon => "hexagon",
            LatticeKind::SquareHexagon => "squarehexagon",
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(LatticeKind::Square),
            "hexagon" => Ok(LatticeKind::Hexagon),
            "squarehexagon" | "square-hexagon" => Ok(LatticeKind::SquareHexagon),
            "squareoctagon" | "square-octagon" => {
                Err(Error::UnsupportedLattice(s.to_string()))
            }
            _ => Err(Error::Parse(format!("unknown lattice '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    White,
    Black,
}

/// A vertex as (translation, index in the fundamental domain).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub tx: i64,
    pub ty: i64,
    pub idx: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceId {
    pub tx: i64,
    pub ty: i64,
    pub idx: usize,
}

/// Edge ids: `idx < q` are transverse edges, `q + r` the seam edge above
/// seam vertex `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId {
    pub tx: i64,
    pub ty: i64,
    pub idx: usize,
}

/// A slot on a face boundary in thread/seam coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Transverse { thread: i64, pos: i64 },
    /// The seam edge joining `(seam, k)` and `(seam, k + 1)`.
    Seam { seam: i64, k: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdVertex {
    pub color: Color,
    /// Embedding coordinates divided by the common denominator.
    pub position: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdEdge {
    pub white: VertexId,
    pub black: VertexId,
    pub transverse: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalDomain {
    pub vertices: Vec<FdVertex>,
    pub edges: Vec<FdEdge>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceShape {
    pub sides: usize,
    /// Counterclockwise, starting with the transverse edge below the face.
    pub boundary: Vec<EdgeId>,
}

#[derive(Clone, Debug, PartialEq)]
struct Embedding {
    den: i64,
    thread: (i64, i64),
    period: (i64, i64),
    offsets: Vec<(i64, i64)>,
    /// Size of one region unit, in embedding numerators per denominator.
    unit: (i64, i64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub fundamental_domain: FundamentalDomain,
    /// Embedding numerators of the thread shift and the vertical period.
    pub translations: [(i64, i64); 2],
    pub face_table: Vec<FaceShape>,
    /// (left, right) seam-edge counts of the faces of one thread period.
    pattern: Vec<(i64, i64)>,
    rho: i64,
    lambda: i64,
    cum_left: Vec<i64>,
    cum_right: Vec<i64>,
    embedding: Embedding,
}

pub fn build_lattice(kind: LatticeKind) -> LatticeSpec {
    let (pattern, rho, lambda, embedding) = match kind {
        LatticeKind::Square => (
            vec![(0, 2), (2, 0)],
            -2,
            -1,
            Embedding {
                den: 2,
                thread: (2, -2),
                period: (2, 2),
                offsets: vec![(1, 1), (3, 1)],
                unit: (1, 1),
            },
        ),
        LatticeKind::Hexagon => (
            vec![(2, 2)],
            -2,
            -1,
            Embedding {
                den: 1,
                thread: (3, 1),
                period: (0, 2),
                offsets: vec![(1, 1), (2, 2)],
                unit: (3, 2),
            },
        ),
        LatticeKind::SquareHexagon => (
            // hexagon, square touching hexagons on its left, hexagon, square
            // touching hexagons on its right
            vec![(2, 2), (2, 0), (2, 2), (0, 2)],
            -2,
            -3,
            Embedding {
                den: 1,
                thread: (6, 0),
                period: (0, 12),
                offsets: (0..6)
                    .map(|r| (if r % 2 == 0 { 2 } else { 4 }, 2 * r + 3))
                    .collect(),
                unit: (6, 6),
            },
        ),
    };
    LatticeSpec::from_pattern(kind, pattern, rho, lambda, embedding)
}

impl LatticeSpec {
    fn from_pattern(
        kind: LatticeKind,
        pattern: Vec<(i64, i64)>,
        rho: i64,
        lambda: i64,
        embedding: Embedding,
    ) -> Self {
        let mut cum_left = vec![0];
        let mut cum_right = vec![0];
        for &(a, c) in &pattern {
            cum_left.push(cum_left.last().unwrap() + a);
            cum_right.push(cum_right.last().unwrap() + c);
        }
        assert_eq!(cum_left.last(), cum_right.last());
        let mut spec = LatticeSpec {
            kind,
            fundamental_domain: FundamentalDomain {
                vertices: vec![],
                edges: vec![],
            },
            translations: [embedding.thread, embedding.period],
            face_table: vec![],
            pattern,
            rho,
            lambda,
            cum_left,
            cum_right,
            embedding,
        };
        spec.fundamental_domain = spec.build_fundamental_domain();
        spec.face_table = (0..spec.q() as i64)
            .map(|j| {
                let boundary: Vec<EdgeId> = spec
                    .face_boundary(0, j)
                    .into_iter()
                    .map(|s| spec.edge_id(s))
                    .collect();
                FaceShape {
                    sides: boundary.len(),
                    boundary,
                }
            })
            .collect();
        spec
    }

    fn build_fundamental_domain(&self) -> FundamentalDomain {
        let p = self.p() as i64;
        let vertices = (0..p)
            .map(|k| {
                let (x, y) = self.vertex_position(0, k);
                let d = self.embedding.den as f64;
                FdVertex {
                    color: vertex_color(k),
                    position: (x as f64 / d, y as f64 / d),
                }
            })
            .collect();
        let mut edges = Vec::new();
        for j in 0..self.q() as i64 {
            let (w, b) = self.transverse_endpoints(0, j);
            edges.push(FdEdge {
                white: self.vertex_id(w.0, w.1),
                black: self.vertex_id(b.0, b.1),
                transverse: true,
            });
        }
        for k in 0..p {
            let (w, b) = seam_endpoints(0, k);
            edges.push(FdEdge {
                white: self.vertex_id(w.0, w.1),
                black: self.vertex_id(b.0, b.1),
                transverse: false,
            });
        }
        FundamentalDomain { vertices, edges }
    }

    /// Faces per thread period.
    pub fn q(&self) -> usize {
        self.pattern.len()
    }

    /// Seam vertices per thread period.
    pub fn p(&self) -> usize {
        *self.cum_right.last().unwrap() as usize
    }

    fn cum(table: &[i64], n: i64) -> i64 {
        let q = (table.len() - 1) as i64;
        n.div_euclid(q) * table[table.len() - 1] + table[n.rem_euclid(q) as usize]
    }

    /// Seam index of the white endpoint of `e^i_j` on seam `i`.
    pub fn right_index(&self, j: i64) -> i64 {
        Self::cum(&self.cum_right, j + 1) + self.rho
    }

    /// Seam index of the black endpoint of `e^i_j` on seam `i - 1`.
    pub fn left_index(&self, j: i64) -> i64 {
        Self::cum(&self.cum_left, j + 1) + self.lambda
    }

    pub fn face_sides(&self, j: i64) -> usize {
        let (a, c) = self.pattern[j.rem_euclid(self.q() as i64) as usize];
        (a + c + 2) as usize
    }

    /// (white, black) endpoints of `e^i_j` as (seam, k) pairs.
    pub fn transverse_endpoints(&self, i: i64, j: i64) -> ((i64, i64), (i64, i64)) {
        ((i, self.right_index(j)), (i - 1, self.left_index(j)))
    }

    /// Boundary slots of `f^i_j`, counterclockwise from the bottom edge.
    /// Slot `t` runs from vertex `t` to vertex `t + 1` of
    /// [`LatticeSpec::face_vertices`].
    pub fn face_boundary(&self, i: i64, j: i64) -> Vec<Slot> {
        let mut out = vec![Slot::Transverse { thread: i, pos: j - 1 }];
        for k in self.right_index(j - 1)..self.right_index(j) {
            out.push(Slot::Seam { seam: i, k });
        }
        out.push(Slot::Transverse { thread: i, pos: j });
        for k in (self.left_index(j - 1)..self.left_index(j)).rev() {
            out.push(Slot::Seam { seam: i - 1, k });
        }
        out
    }

    /// Boundary vertices of `f^i_j` as (seam, k), counterclockwise, starting
    /// with the black end of the bottom edge.
    pub fn face_vertices(&self, i: i64, j: i64) -> Vec<(i64, i64)> {
        let mut out = vec![];
        for k in self.right_index(j - 1)..=self.right_index(j) {
            out.push((i, k));
        }
        for k in (self.left_index(j - 1)..=self.left_index(j)).rev() {
            out.push((i - 1, k));
        }
        out.rotate_right(1);
        out
    }

    /// Thread-`s` face whose right side contains the seam edge above `(s, k)`.
    pub fn seam_left_face(&self, k: i64) -> i64 {
        let (q, p) = (self.q() as i64, self.p() as i64);
        let mut j = (k - self.rho).div_euclid(p) * q - q;
        while self.right_index(j) <= k {
            j += 1;
        }
        j
    }

    /// Thread-`s + 1` face whose left side contains the seam edge above `(s, k)`.
    pub fn seam_right_face(&self, k: i64) -> i64 {
        let (q, p) = (self.q() as i64, self.p() as i64);
        let mut j = (k - self.lambda).div_euclid(p) * q - q;
        while self.left_index(j) <= k {
            j += 1;
        }
        j
    }

    /// `e^i_a ≺ e^{i+1}_b`: both have an endpoint on seam `i`, compare there.
    pub fn precedes_right(&self, a: i64, b: i64) -> bool {
        self.right_index(a) < self.left_index(b)
    }

    /// `e^{i-1}_b ≺ e^i_a`.
    pub fn precedes_left(&self, b: i64, a: i64) -> bool {
        self.right_index(b) < self.left_index(a)
    }

    /// Embedding numerators of seam vertex `(s, k)`.
    pub fn vertex_position(&self, s: i64, k: i64) -> (i64, i64) {
        let p = self.p() as i64;
        let (m, r) = (k.div_euclid(p), k.rem_euclid(p) as usize);
        let e = &self.embedding;
        (
            s * e.thread.0 + m * e.period.0 + e.offsets[r].0,
            s * e.thread.1 + m * e.period.1 + e.offsets[r].1,
        )
    }

    pub fn denominator(&self) -> i64 {
        self.embedding.den
    }

    /// Region unit in embedding numerators (x, y).
    pub fn region_unit(&self) -> (i64, i64) {
        (
            self.embedding.unit.0 * self.embedding.den,
            self.embedding.unit.1 * self.embedding.den,
        )
    }

    pub fn face_centroid(&self, i: i64, j: i64) -> (f64, f64) {
        let vs = self.face_vertices(i, j);
        let d = self.embedding.den as f64 * vs.len() as f64;
        let (sx, sy) = vs.iter().fold((0i64, 0i64), |acc, &(s, k)| {
            let p = self.vertex_position(s, k);
            (acc.0 + p.0, acc.1 + p.1)
        });
        (sx as f64 / d, sy as f64 / d)
    }

    pub fn vertex_id(&self, s: i64, k: i64) -> VertexId {
        let p = self.p() as i64;
        VertexId {
            tx: s,
            ty: k.div_euclid(p),
            idx: k.rem_euclid(p) as usize,
        }
    }

    pub fn vertex_coords(&self, v: VertexId) -> (i64, i64) {
        (v.tx, v.ty * self.p() as i64 + v.idx as i64)
    }

    pub fn face_id(&self, i: i64, j: i64) -> FaceId {
        let q = self.q() as i64;
        FaceId {
            tx: i,
            ty: j.div_euclid(q),
            idx: j.rem_euclid(q) as usize,
        }
    }

    pub fn face_coords(&self, f: FaceId) -> (i64, i64) {
        (f.tx, f.ty * self.q() as i64 + f.idx as i64)
    }

    pub fn edge_id(&self, slot: Slot) -> EdgeId {
        let (q, p) = (self.q() as i64, self.p() as i64);
        match slot {
            Slot::Transverse { thread, pos } => EdgeId {
                tx: thread,
                ty: pos.div_euclid(q),
                idx: pos.rem_euclid(q) as usize,
            },
            Slot::Seam { seam, k } => EdgeId {
                tx: seam,
                ty: k.div_euclid(p),
                idx: q as usize + k.rem_euclid(p) as usize,
            },
        }
    }

    pub fn edge_slot(&self, e: EdgeId) -> Slot {
        let q = self.q();
        if e.idx < q {
            Slot::Transverse {
                thread: e.tx,
                pos: e.ty * q as i64 + e.idx as i64,
            }
        } else {
            Slot::Seam {
                seam: e.tx,
                k: e.ty * self.p() as i64 + (e.idx - q) as i64,
            }
        }
    }

    /// (white, black) endpoints of a slot.
    pub fn slot_endpoints(&self, slot: Slot) -> ((i64, i64), (i64, i64)) {
        match slot {
            Slot::Transverse { thread, pos } => self.transverse_endpoints(thread, pos),
            Slot::Seam { seam, k } => seam_endpoints(seam, k),
        }
    }

    /// (from, to) faces of a slot as (thread, pos); crossing from → to is
    /// positive, i.e. has the white endpoint on its right.
    pub fn slot_faces(&self, slot: Slot) -> ((i64, i64), (i64, i64)) {
        match slot {
            Slot::Transverse { thread, pos } => ((thread, pos), (thread, pos + 1)),
            Slot::Seam { seam, k } => {
                let left = (seam, self.seam_left_face(k));
                let right = (seam + 1, self.seam_right_face(k));
                if k % 2 == 0 {
                    (left, right)
                } else {
                    (right, left)
                }
            }
        }
    }
}

pub fn vertex_color(k: i64) -> Color {
    if k.rem_euclid(2) == 0 {
        Color::White
    } else {
        Color::Black
    }
}

fn seam_endpoints(s: i64, k: i64) -> ((i64, i64), (i64, i64)) {
    if k.rem_euclid(2) == 0 {
        ((s, k), (s, k + 1))
    } else {
        ((s, k + 1), (s, k))
    }
}

/// Thread bookkeeping for the three dynamic lattices.
#[derive(Clone, Debug)]
pub struct ThreadIndexing {
    spec: LatticeSpec,
}

pub fn thread_decomposition(lattice: &LatticeSpec) -> Result<ThreadIndexing> {
    Ok(ThreadIndexing {
        spec: lattice.clone(),
    })
}

impl ThreadIndexing {
    pub fn thread_of_face(&self, f: FaceId) -> (i64, i64) {
        self.spec.face_coords(f)
    }

    pub fn face_at(&self, i: i64, j: i64) -> FaceId {
        self.spec.face_id(i, j)
    }

    /// (white, black) endpoints of `e^i_j`.
    pub fn transverse_edge(&self, i: i64, j: i64) -> (VertexId, VertexId) {
        let (w, b) = self.spec.transverse_endpoints(i, j);
        (self.spec.vertex_id(w.0, w.1), self.spec.vertex_id(b.0, b.1))
    }

    /// Order of `e^i_a` and `e^{i+1}_b` along seam `i`.
    pub fn precedes(&self, a: i64, b: i64) -> bool {
        self.spec.precedes_right(a, b)
    }
}
