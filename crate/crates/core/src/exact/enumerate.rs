//! Depth-first enumeration of the matchings of a finite domain.

use super::FreeGraph;
use crate::error::{Error, Result};
use crate::lattice::FiniteDomain;
use crate::matching::Matching;

pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub count: u64,
    /// Present when states were requested.
    pub states: Option<Vec<Matching>>,
}

struct Search<'a> {
    g: &'a FreeGraph,
    matched: Vec<bool>,
    chosen: Vec<usize>,
    count: u64,
    cap: u64,
    out: Option<Vec<Vec<usize>>>,
}

impl Search<'_> {
    /// Unmatched vertex with the fewest available edges, or `None` when all
    /// are matched. `Some((v, 0))` signals a dead end.
    fn pick(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for v in 0..self.g.n_vertices() {
            if self.matched[v] {
                continue;
            }
            let n = self.g.adj[v]
                .iter()
                .filter(|&&(u, _)| !self.matched[u])
                .count();
            if best.is_none_or(|(_, m)| n < m) {
                best = Some((v, n));
                if n <= 1 {
                    break;
                }
            }
        }
        best
    }

    fn run(&mut self) -> Result<()> {
        let Some((v, n)) = self.pick() else {
            self.count += 1;
            if self.count > self.cap {
                return Err(Error::CapExceeded(self.cap));
            }
            if let Some(out) = &mut self.out {
                out.push(self.chosen.clone());
            }
            return Ok(());
        };
        if n == 0 {
            return Ok(());
        }
        for i in 0..self.g.adj[v].len() {
            let (u, e) = self.g.adj[v][i];
            if self.matched[u] {
                continue;
            }
            self.matched[v] = true;
            self.matched[u] = true;
            self.chosen.push(e);
            self.run()?;
            self.chosen.pop();
            self.matched[v] = false;
            self.matched[u] = false;
        }
        Ok(())
    }
}

/// Counts (and optionally lists) the matchings that agree with the boundary
/// matching outside G′. Vertices with a single available edge are always
/// branched on first, which propagates forced dimers.
pub fn enumerate_matchings(domain: &FiniteDomain, cap: u64, keep_states: bool) -> Result<Enumeration> {
    let g = FreeGraph::of(domain);
    if g.whites.len() != g.blacks.len() {
        return Ok(Enumeration {
            count: 0,
            states: keep_states.then(Vec::new),
        });
    }
    let mut s = Search {
        g: &g,
        matched: vec![false; g.n_vertices()],
        chosen: Vec::new(),
        count: 0,
        cap,
        out: keep_states.then(Vec::new),
    };
    s.run()?;
    let count = s.count;
    let states = s.out.map(|all| {
        all.into_iter()
            .map(|edges| g.matching(domain, edges.iter().map(|&e| g.edges[e].2)))
            .collect()
    });
    Ok(Enumeration { count, states })
}

pub fn count_matchings(domain: &FiniteDomain) -> Result<u64> {
    Ok(enumerate_matchings(domain, DEFAULT_CAP, false)?.count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, carve_free, LatticeKind, Region};
    use crate::matching::validate;

    fn square(l: u32) -> FiniteDomain {
        carve_free(&build_lattice(LatticeKind::Square), &Region::Square, l).unwrap()
    }

    #[test]
    fn domino_counts() {
        assert_eq!(count_matchings(&square(2)).unwrap(), 2);
        assert_eq!(count_matchings(&square(4)).unwrap(), 36);
        assert_eq!(count_matchings(&square(6)).unwrap(), 6728);
    }

    #[test]
    fn listed_states_are_distinct_valid_matchings() {
        let d = square(4);
        let e = enumerate_matchings(&d, 1000, true).unwrap();
        let states = e.states.unwrap();
        assert_eq!(states.len(), 36);
        for m in &states {
            validate(m, &d).unwrap();
        }
        let set: std::collections::HashSet<_> = states.iter().collect();
        assert_eq!(set.len(), 36);
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            enumerate_matchings(&square(4), 10, false).unwrap_err(),
            Error::CapExceeded(10)
        );
    }
}
