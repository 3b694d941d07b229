//! A finite rectangle of threads and positions with dense indexing of its
//! faces, edges and vertices.

use super::{vertex_color, Color, LatticeSpec, Slot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Transverse { thread: i64, pos: i64 },
    Seam { seam: i64, k: i64 },
}

#[derive(Clone, Debug)]
pub struct WindowFace {
    pub thread: i64,
    pub pos: i64,
    /// Edge indices, counterclockwise from the bottom transverse edge.
    pub boundary: Vec<usize>,
    /// Vertex indices; edge `t` runs from vertex `t` to vertex `t + 1`.
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct WindowEdge {
    pub white: usize,
    pub black: usize,
    /// Crossing from `from` to `to` is positive (white endpoint on the right).
    pub from: Option<usize>,
    pub to: Option<usize>,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug)]
pub struct WindowVertex {
    pub seam: i64,
    pub k: i64,
    pub color: Color,
    pub edges: Vec<usize>,
}

/// Threads `threads.0..=threads.1`, positions `positions.0..=positions.1`.
/// Edges and vertices are those on the boundaries of the window faces.
#[derive(Clone)]
pub struct Window {
    pub spec: LatticeSpec,
    pub threads: (i64, i64),
    pub positions: (i64, i64),
    ks: (i64, i64),
    n_transverse: usize,
    pub faces: Vec<WindowFace>,
    pub edges: Vec<WindowEdge>,
    pub vertices: Vec<WindowVertex>,
}

impl std::fmt::Debug for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Window({} threads {:?} positions {:?})",
            self.spec.kind, self.threads, self.positions
        )
    }
}

impl Window {
    pub fn new(spec: &LatticeSpec, threads: (i64, i64), positions: (i64, i64)) -> Self {
        assert!(threads.0 <= threads.1 && positions.0 <= positions.1);
        let (j0, j1) = positions;
        let ks = (
            spec.right_index(j0 - 1).min(spec.left_index(j0 - 1)),
            spec.right_index(j1).max(spec.left_index(j1)),
        );
        let ni = (threads.1 - threads.0 + 1) as usize;
        let nj = (j1 - j0 + 1) as usize;
        let nk = (ks.1 - ks.0 + 1) as usize;
        let mut w = Window {
            spec: spec.clone(),
            threads,
            positions,
            ks,
            n_transverse: ni * (nj + 1),
            faces: Vec::with_capacity(ni * nj),
            edges: Vec::new(),
            vertices: Vec::with_capacity((ni + 1) * nk),
        };
        for s in threads.0 - 1..=threads.1 {
            for k in ks.0..=ks.1 {
                w.vertices.push(WindowVertex {
                    seam: s,
                    k,
                    color: vertex_color(k),
                    edges: vec![],
                });
            }
        }
        let mut edges = Vec::with_capacity(w.n_transverse + (ni + 1) * (nk - 1));
        for i in threads.0..=threads.1 {
            for j in j0 - 1..=j1 {
                edges.push(w.make_edge(Slot::Transverse { thread: i, pos: j }));
            }
        }
        for s in threads.0 - 1..=threads.1 {
            for k in ks.0..ks.1 {
                edges.push(w.make_edge(Slot::Seam { seam: s, k }));
            }
        }
        for (e, edge) in edges.iter().enumerate() {
            w.vertices[edge.white].edges.push(e);
            w.vertices[edge.black].edges.push(e);
        }
        w.edges = edges;
        for i in threads.0..=threads.1 {
            for j in j0..=j1 {
                let boundary = spec
                    .face_boundary(i, j)
                    .into_iter()
                    .map(|s| w.slot_index(s).expect("face slot inside window"))
                    .collect();
                let vertices = spec
                    .face_vertices(i, j)
                    .into_iter()
                    .map(|(s, k)| w.vertex_index(s, k).expect("face vertex inside window"))
                    .collect();
                w.faces.push(WindowFace {
                    thread: i,
                    pos: j,
                    boundary,
                    vertices,
                });
            }
        }
        w
    }

    /// Smallest window whose faces cover the box `lo..hi` (embedding
    /// numerators), widened by `margin` threads and periods on every side.
    pub fn covering(spec: &LatticeSpec, lo: (i64, i64), hi: (i64, i64), margin: i64) -> Self {
        let [t, m] = spec.translations;
        let det = (t.0 * m.1 - t.1 * m.0) as f64;
        let (c0, c1) = spec.face_centroid(0, 0);
        let d = spec.denominator() as f64;
        let mut i_range = (f64::MAX, f64::MIN);
        let mut m_range = (f64::MAX, f64::MIN);
        for x in [lo.0, hi.0] {
            for y in [lo.1, hi.1] {
                let (px, py) = (x as f64 - c0 * d, y as f64 - c1 * d);
                let a = (px * m.1 as f64 - py * m.0 as f64) / det;
                let b = (t.0 as f64 * py - t.1 as f64 * px) / det;
                i_range = (i_range.0.min(a), i_range.1.max(a));
                m_range = (m_range.0.min(b), m_range.1.max(b));
            }
        }
        let q = spec.q() as i64;
        let threads = (
            i_range.0.floor() as i64 - margin,
            i_range.1.ceil() as i64 + margin,
        );
        let positions = (
            (m_range.0.floor() as i64 - margin) * q,
            (m_range.1.ceil() as i64 + margin) * q + q - 1,
        );
        Window::new(spec, threads, positions)
    }

    fn make_edge(&self, slot: Slot) -> WindowEdge {
        let ((ws, wk), (bs, bk)) = self.spec.slot_endpoints(slot);
        let (from, to) = self.spec.slot_faces(slot);
        WindowEdge {
            white: self.vertex_index(ws, wk).expect("edge endpoint inside window"),
            black: self.vertex_index(bs, bk).expect("edge endpoint inside window"),
            from: self.face_index(from.0, from.1),
            to: self.face_index(to.0, to.1),
            kind: match slot {
                Slot::Transverse { thread, pos } => EdgeKind::Transverse { thread, pos },
                Slot::Seam { seam, k } => EdgeKind::Seam { seam, k },
            },
        }
    }

    fn nj(&self) -> i64 {
        self.positions.1 - self.positions.0 + 1
    }

    fn nk(&self) -> i64 {
        self.ks.1 - self.ks.0 + 1
    }

    pub fn face_index(&self, i: i64, j: i64) -> Option<usize> {
        let inside = (self.threads.0..=self.threads.1).contains(&i)
            && (self.positions.0..=self.positions.1).contains(&j);
        inside.then(|| ((i - self.threads.0) * self.nj() + (j - self.positions.0)) as usize)
    }

    pub fn transverse_index(&self, i: i64, j: i64) -> Option<usize> {
        let inside = (self.threads.0..=self.threads.1).contains(&i)
            && (self.positions.0 - 1..=self.positions.1).contains(&j);
        inside.then(|| ((i - self.threads.0) * (self.nj() + 1) + (j - self.positions.0 + 1)) as usize)
    }

    pub fn seam_edge_index(&self, s: i64, k: i64) -> Option<usize> {
        let inside = (self.threads.0 - 1..=self.threads.1).contains(&s)
            && (self.ks.0..self.ks.1).contains(&k);
        inside.then(|| {
            self.n_transverse
                + ((s - self.threads.0 + 1) * (self.nk() - 1) + (k - self.ks.0)) as usize
        })
    }

    pub fn vertex_index(&self, s: i64, k: i64) -> Option<usize> {
        let inside = (self.threads.0 - 1..=self.threads.1).contains(&s)
            && (self.ks.0..=self.ks.1).contains(&k);
        inside.then(|| ((s - self.threads.0 + 1) * self.nk() + (k - self.ks.0)) as usize)
    }

    pub fn slot_index(&self, slot: Slot) -> Option<usize> {
        match slot {
            Slot::Transverse { thread, pos } => self.transverse_index(thread, pos),
            Slot::Seam { seam, k } => self.seam_edge_index(seam, k),
        }
    }

    pub fn n_transverse(&self) -> usize {
        self.n_transverse
    }

    pub fn is_transverse(&self, e: usize) -> bool {
        e < self.n_transverse
    }

    /// Positions available to beads of one thread: `positions.0 - 1..=positions.1`.
    pub fn bead_range(&self) -> (i64, i64) {
        (self.positions.0 - 1, self.positions.1)
    }

    /// Faces across each boundary edge, as (edge, neighbour) pairs.
    pub fn neighbours(&self, f: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.faces[f].boundary.iter().filter_map(move |&e| {
            let edge = &self.edges[e];
            let other = if edge.from == Some(f) { edge.to } else { edge.from };
            other.map(|g| (e, g))
        })
    }

    /// Whether the face touches the outer rim of the window.
    pub fn on_rim(&self, f: usize) -> bool {
        let face = &self.faces[f];
        face.thread == self.threads.0
            || face.thread == self.threads.1
            || face.pos == self.positions.0
            || face.pos == self.positions.1
    }

    /// Whether every edge at the vertex has window faces on both sides, so
    /// the vertex has its full lattice degree here.
    pub fn is_enclosed(&self, v: usize) -> bool {
        self.vertices[v].edges.iter().all(|&e| {
            let edge = &self.edges[e];
            edge.from.is_some() && edge.to.is_some()
        })
    }

    pub fn same_shape(&self, other: &Window) -> bool {
        self.spec.kind == other.spec.kind
            && self.threads == other.threads
            && self.positions == other.positions
    }

    pub fn vertex_position(&self, v: usize) -> (i64, i64) {
        let vx = &self.vertices[v];
        self.spec.vertex_position(vx.seam, vx.k)
    }
}
