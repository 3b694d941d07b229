//! Finite domains G′: the faces inside a scaled region, with a boundary
//! matching frozen outside.

use super::{LatticeSpec, Window};
use crate::error::{Error, Result};
use crate::matching::Matching;
use std::collections::VecDeque;
use std::sync::Arc;

/// Region shapes, centred at the origin. `Square` and `Disk` have diameter
/// `L` region units; `Polygon` is convex and counterclockwise, given in
/// embedding numerators, and ignores `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    Square,
    Disk,
    Polygon(Vec<(i64, i64)>),
    /// Faces chosen by an explicit predicate, e.g. pyramid domains.
    Custom(String),
}

impl Region {
    /// Closed containment of an embedding point, exact.
    pub fn contains(&self, spec: &LatticeSpec, l: u32, p: (i64, i64)) -> bool {
        let (ux, uy) = spec.region_unit();
        let (x, y, l) = (p.0 as i128, p.1 as i128, l as i128);
        let (ux, uy) = (ux as i128, uy as i128);
        match self {
            Region::Square => 2 * x.abs() <= l * ux && 2 * y.abs() <= l * uy,
            Region::Disk => 4 * (x * x * uy * uy + y * y * ux * ux) <= l * l * ux * ux * uy * uy,
            Region::Polygon(vs) => (0..vs.len()).all(|t| {
                let a = vs[t];
                let b = vs[(t + 1) % vs.len()];
                let cross = (b.0 - a.0) as i128 * (y - a.1 as i128)
                    - (b.1 - a.1) as i128 * (x - a.0 as i128);
                cross >= 0
            }),
            Region::Custom(_) => false,
        }
    }

    /// Bounding box in embedding numerators.
    pub fn bounding_box(&self, spec: &LatticeSpec, l: u32) -> ((i64, i64), (i64, i64)) {
        let (ux, uy) = spec.region_unit();
        let (hx, hy) = ((l as i64 * ux + 1) / 2, (l as i64 * uy + 1) / 2);
        match self {
            Region::Polygon(vs) => {
                let xs = vs.iter().map(|v| v.0);
                let ys = vs.iter().map(|v| v.1);
                (
                    (xs.clone().min().unwrap_or(0), ys.clone().min().unwrap_or(0)),
                    (xs.max().unwrap_or(0), ys.max().unwrap_or(0)),
                )
            }
            _ => ((-hx, -hy), (hx, hy)),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Region::Square => "square".into(),
            Region::Disk => "disk".into(),
            Region::Polygon(vs) => format!("polygon{vs:?}"),
            Region::Custom(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiniteDomain {
    window: Arc<Window>,
    region: Region,
    scale: u32,
    interior_face: Vec<bool>,
    interior_faces: Vec<usize>,
    interior_edge: Vec<bool>,
    interior_vertex: Vec<bool>,
    boundary: Matching,
    reference_face: usize,
}

impl FiniteDomain {
    pub fn window(&self) -> &Arc<Window> {
        &self.window
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.window.spec
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// The boundary condition m.
    pub fn boundary(&self) -> &Matching {
        &self.boundary
    }

    pub fn reference_face(&self) -> usize {
        self.reference_face
    }

    pub fn n_faces(&self) -> usize {
        self.window.faces.len()
    }

    pub fn is_interior_face(&self, f: usize) -> bool {
        self.interior_face[f]
    }

    pub fn interior_faces(&self) -> &[usize] {
        &self.interior_faces
    }

    pub fn is_interior_edge(&self, e: usize) -> bool {
        self.interior_edge[e]
    }

    pub fn is_interior_vertex(&self, v: usize) -> bool {
        self.interior_vertex[v]
    }

    pub fn interior_vertex_count(&self) -> usize {
        self.interior_vertex.iter().filter(|&&b| b).count()
    }

    /// Same geometry with another boundary matching that agrees with the
    /// current one near G′ in the sense required by `carve_domain`.
    pub fn with_boundary(&self, m: Matching) -> Result<FiniteDomain> {
        if !m.window().same_shape(&self.window) {
            return Err(Error::DomainMismatch);
        }
        validate_boundary(&self.window, &self.interior_vertex, &m)?;
        Ok(FiniteDomain {
            boundary: m,
            ..self.clone()
        })
    }
}

struct Interior {
    face: Vec<bool>,
    edge: Vec<bool>,
    vertex: Vec<bool>,
}

fn interior_sets(window: &Window, pred: &dyn Fn(usize) -> bool) -> Result<Interior> {
    let nf = window.faces.len();
    let mut face: Vec<bool> = (0..nf).map(pred).collect();
    if !face.iter().any(|&b| b) {
        return Err(Error::EmptyDomain);
    }
    if (0..nf).any(|f| face[f] && window.on_rim(f)) {
        return Err(Error::WindowTooSmall);
    }
    let mut edge = vec![false; window.edges.len()];
    for f in (0..nf).filter(|&f| face[f]) {
        for &e in &window.faces[f].boundary {
            edge[e] = true;
        }
    }
    // Faces enclosed by G′ edges are faces of G′ too.
    for f in 0..nf {
        if !face[f] && !window.on_rim(f) && window.faces[f].boundary.iter().all(|&e| edge[e]) {
            face[f] = true;
        }
    }
    let mut vertex = vec![false; window.vertices.len()];
    for (e, _) in edge.iter().enumerate().filter(|(_, &b)| b) {
        vertex[window.edges[e].white] = true;
        vertex[window.edges[e].black] = true;
    }
    // exterior faces must form one connected piece
    let start = (0..nf).find(|&f| !face[f]).expect("rim faces are exterior");
    let mut seen = vec![false; nf];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(f) = queue.pop_front() {
        for (_, g) in window.neighbours(f) {
            if !face[g] && !seen[g] {
                seen[g] = true;
                queue.push_back(g);
            }
        }
    }
    if (0..nf).any(|f| !face[f] && !seen[f]) {
        return Err(Error::NotSimplyConnected);
    }
    Ok(Interior { face, edge, vertex })
}

fn validate_boundary(window: &Window, interior_vertex: &[bool], m: &Matching) -> Result<()> {
    for (v, vx) in window.vertices.iter().enumerate() {
        if interior_vertex[v] {
            let count = vx.edges.iter().filter(|&&e| m.is_occupied(e)).count();
            if count != 1 {
                return Err(Error::InvalidBoundary {
                    seam: vx.seam,
                    k: vx.k,
                });
            }
        }
    }
    Ok(())
}

fn assemble(
    window: Arc<Window>,
    region: Region,
    scale: u32,
    interior: Interior,
    boundary: Matching,
) -> FiniteDomain {
    let interior_faces = (0..interior.face.len()).filter(|&f| interior.face[f]).collect();
    FiniteDomain {
        window,
        region,
        scale,
        interior_face: interior.face,
        interior_faces,
        interior_edge: interior.edge,
        interior_vertex: interior.vertex,
        boundary,
        reference_face: 0,
    }
}

/// Domain on the window of `m` whose interior faces satisfy `pred`.
pub fn carve_with(
    m: Matching,
    region: Region,
    scale: u32,
    pred: &dyn Fn(usize) -> bool,
) -> Result<FiniteDomain> {
    let window = m.window().clone();
    let interior = interior_sets(&window, pred)?;
    validate_boundary(&window, &interior.vertex, &m)?;
    Ok(assemble(window, region, scale, interior, m))
}

fn region_predicate<'a>(
    window: &'a Window,
    region: &'a Region,
    l: u32,
) -> impl Fn(usize) -> bool + 'a {
    move |f| {
        window.faces[f]
            .vertices
            .iter()
            .all(|&v| region.contains(&window.spec, l, window.vertex_position(v)))
    }
}

/// Faces entirely inside `L·U` on the window of `m`, with boundary `m`.
pub fn carve_domain(
    lattice: &LatticeSpec,
    region: &Region,
    l: u32,
    m: &Matching,
) -> Result<FiniteDomain> {
    if m.window().spec.kind != lattice.kind {
        return Err(Error::DomainMismatch);
    }
    let window = m.window().clone();
    let pred = region_predicate(&window, region, l);
    carve_with(m.clone(), region.clone(), l, &pred)
}

/// Domain whose states are all perfect matchings of G′ (no boundary dimers
/// cross into G′). The stored boundary matching is one such matching.
pub fn carve_free(lattice: &LatticeSpec, region: &Region, l: u32) -> Result<FiniteDomain> {
    let (lo, hi) = region.bounding_box(lattice, l);
    let window = Arc::new(Window::covering(lattice, lo, hi, 2));
    let interior = interior_sets(&window, &region_predicate(&window, region, l))?;
    let occ = perfect_matching(&window, &interior.vertex, &interior.edge)?;
    let m = Matching::from_occupancy(window.clone(), occ);
    Ok(assemble(window, region.clone(), l, interior, m))
}

/// Perfect matching of the vertices flagged in `vertex` using edges flagged
/// in `edge`, by repeated breadth-first augmentation.
fn perfect_matching(window: &Window, vertex: &[bool], edge: &[bool]) -> Result<Vec<bool>> {
    use super::Color;
    let whites: Vec<usize> = (0..vertex.len())
        .filter(|&v| vertex[v] && window.vertices[v].color == Color::White)
        .collect();
    let blacks = (0..vertex.len())
        .filter(|&v| vertex[v] && window.vertices[v].color == Color::Black)
        .count();
    if whites.len() != blacks {
        return Err(Error::OddParity {
            white: whites.len(),
            black: blacks,
        });
    }
    let nv = vertex.len();
    let mut mate_edge: Vec<Option<usize>> = vec![None; nv];
    let mut parent: Vec<Option<usize>> = vec![None; nv];
    let mut stamp = vec![usize::MAX; nv];
    for (round, &root) in whites.iter().enumerate() {
        // BFS over alternating paths: white -(free edge)-> black -(mate)-> white
        let mut queue = VecDeque::from([root]);
        stamp[root] = round;
        let mut found = None;
        'bfs: while let Some(w) = queue.pop_front() {
            for &e in &window.vertices[w].edges {
                if !edge[e] {
                    continue;
                }
                let b = window.edges[e].black;
                if stamp[b] == round {
                    continue;
                }
                stamp[b] = round;
                parent[b] = Some(e);
                match mate_edge[b] {
                    None => {
                        found = Some(b);
                        break 'bfs;
                    }
                    Some(me) => {
                        let w2 = window.edges[me].white;
                        if stamp[w2] != round {
                            stamp[w2] = round;
                            queue.push_back(w2);
                        }
                    }
                }
            }
        }
        let mut b = found.ok_or(Error::NoMatching)?;
        loop {
            let e = parent[b].unwrap();
            let w = window.edges[e].white;
            let prev = mate_edge[w];
            mate_edge[b] = Some(e);
            mate_edge[w] = Some(e);
            match prev {
                Some(pe) => b = window.edges[pe].black,
                None => break,
            }
        }
    }
    let mut occ = vec![false; window.edges.len()];
    for &w in &whites {
        occ[mate_edge[w].unwrap()] = true;
    }
    Ok(occ)
}
