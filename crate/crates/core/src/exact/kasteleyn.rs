//! Kasteleyn matrices of finite domains: exact counts, conditional edge
//! probabilities and exact uniform sampling.

use super::{slot_of, FreeGraph, KasteleynSigns};
use crate::error::{Error, Result};
use crate::lattice::FiniteDomain;
use crate::matching::Matching;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

/// Signed adjacency of the free part of the domain, free whites by free
/// blacks, with the periodic sign gauge.
pub fn kasteleyn_matrix(domain: &FiniteDomain) -> Result<Vec<Vec<i64>>> {
    let g = FreeGraph::of(domain);
    matrix_of(domain, &g)
}

fn matrix_of(domain: &FiniteDomain, g: &FreeGraph) -> Result<Vec<Vec<i64>>> {
    if g.whites.len() != g.blacks.len() {
        return Err(Error::NonSquareMatrix {
            white: g.whites.len(),
            black: g.blacks.len(),
        });
    }
    let spec = domain.lattice();
    let signs = KasteleynSigns::of(spec)?;
    let w = domain.window();
    let n = g.whites.len();
    let mut k = vec![vec![0i64; n]; n];
    for &(a, b, e) in &g.edges {
        k[a][b] = signs.of_slot(spec, slot_of(w.edges[e].kind)) as i64;
    }
    Ok(k)
}

/// Fraction-free Gaussian elimination; exact for integer matrices.
pub fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

fn big(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}

/// Number of matchings, as `|det K|`.
pub fn kasteleyn_count(domain: &FiniteDomain) -> Result<BigInt> {
    Ok(bareiss_determinant(big(&kasteleyn_matrix(domain)?)).abs())
}

/// Count with the given free-graph edges forced, via the complementary minor.
fn forced_count(k: &[Vec<i64>], g: &FreeGraph, forced: &[usize]) -> BigInt {
    let mut rows = vec![true; k.len()];
    let mut cols = vec![true; k.len()];
    for &i in forced {
        let (a, b, _) = g.edges[i];
        if !rows[a] || !cols[b] {
            return BigInt::zero();
        }
        rows[a] = false;
        cols[b] = false;
    }
    let minor: Vec<Vec<BigInt>> = (0..k.len())
        .filter(|&a| rows[a])
        .map(|a| {
            (0..k.len())
                .filter(|&b| cols[b])
                .map(|b| BigInt::from(k[a][b]))
                .collect()
        })
        .collect();
    bareiss_determinant(minor).abs()
}

/// Probability that window edge `edge` is occupied given that the window
/// edges in `forced` are, under the uniform measure.
pub fn conditional_probability(domain: &FiniteDomain, forced: &[usize], edge: usize) -> Result<BigRational> {
    let g = FreeGraph::of(domain);
    let k = matrix_of(domain, &g)?;
    let local = |e: usize| g.edges.iter().position(|x| x.2 == e);
    let mut fixed = Vec::new();
    for &e in forced {
        if g.base[e] {
            continue;
        }
        match local(e) {
            Some(i) => fixed.push(i),
            None => return Err(Error::NoMatching),
        }
    }
    fixed.sort_unstable();
    fixed.dedup();
    let z = forced_count(&k, &g, &fixed);
    if z.is_zero() {
        return Err(Error::NoMatching);
    }
    let num = if g.base[edge] || forced.contains(&edge) {
        z.clone()
    } else {
        match local(edge) {
            Some(i) => {
                fixed.push(i);
                forced_count(&k, &g, &fixed)
            }
            None => BigInt::zero(),
        }
    };
    Ok(BigRational::new(num, z))
}

/// Exactly uniform matching. Whites are matched one at a time; the chance
/// that white `w` takes black `b` given the earlier choices is
/// `K(w,b)·K⁻¹(b,w)` for the Kasteleyn matrix of what is still free, and
/// the inverse follows each choice by a rank-one minor update.
pub fn exact_sample<R: Rng + ?Sized>(domain: &FiniteDomain, rng: &mut R) -> Result<Matching> {
    let g = FreeGraph::of(domain);
    let k = matrix_of(domain, &g).map_err(|_| Error::NoMatching)?;
    let n = k.len();
    let kf = DMatrix::from_fn(n, n, |i, j| k[i][j] as f64);
    let mut inv = if n == 0 {
        kf.clone()
    } else {
        kf.clone().try_inverse().ok_or(Error::NoMatching)?
    };
    // inv is indexed (black, white) over the full matrix; removed rows and
    // columns are ignored
    let mut white_alive = vec![true; n];
    let mut black_alive = vec![true; n];
    let mut chosen = Vec::with_capacity(n);
    const REFRESH: usize = 48;
    for step in 0..n {
        if step > 0 && step % REFRESH == 0 {
            refresh(&kf, &mut inv, &white_alive, &black_alive)?;
        }
        let w = (0..n).find(|&a| white_alive[a]).unwrap();
        let cands: Vec<(usize, usize, f64)> = g.adj[w]
            .iter()
            .map(|&(u, e)| (u - n, e))
            .filter(|&(b, _)| black_alive[b])
            .map(|(b, e)| (b, e, (kf[(w, b)] * inv[(b, w)]).max(0.0)))
            .collect();
        let total: f64 = cands.iter().map(|c| c.2).sum();
        if cands.is_empty() || total <= 0.0 {
            return Err(Error::NoMatching);
        }
        let mut u = rng.gen::<f64>() * total;
        let mut pick = cands.len() - 1;
        for (i, c) in cands.iter().enumerate() {
            if u < c.2 {
                pick = i;
                break;
            }
            u -= c.2;
        }
        let (b, e, _) = cands[pick];
        chosen.push(g.edges[e].2);
        // inverse of K with row w and column b deleted
        let pivot = inv[(b, w)];
        let col: Vec<f64> = (0..n).map(|r| inv[(r, w)]).collect();
        let row: Vec<f64> = (0..n).map(|c| inv[(b, c)]).collect();
        for r in (0..n).filter(|&r| black_alive[r] && r != b) {
            if col[r] == 0.0 {
                continue;
            }
            let f = col[r] / pivot;
            for c in (0..n).filter(|&c| white_alive[c] && c != w) {
                inv[(r, c)] -= f * row[c];
            }
        }
        white_alive[w] = false;
        black_alive[b] = false;
    }
    Ok(g.matching(domain, chosen.into_iter()))
}

fn refresh(kf: &DMatrix<f64>, inv: &mut DMatrix<f64>, wa: &[bool], ba: &[bool]) -> Result<()> {
    let ws: Vec<usize> = (0..wa.len()).filter(|&i| wa[i]).collect();
    let bs: Vec<usize> = (0..ba.len()).filter(|&i| ba[i]).collect();
    let sub = DMatrix::from_fn(ws.len(), bs.len(), |i, j| kf[(ws[i], bs[j])]);
    let si = sub.try_inverse().ok_or(Error::NoMatching)?;
    for (j, &b) in bs.iter().enumerate() {
        for (i, &w) in ws.iter().enumerate() {
            inv[(b, w)] = si[(j, i)];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::count_matchings;
    use crate::lattice::{build_lattice, carve_free, LatticeKind, Region};
    use crate::matching::validate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bareiss_matches_small_determinants() {
        let m = |v: Vec<Vec<i64>>| bareiss_determinant(big(&v));
        assert_eq!(m(vec![vec![2, 1], vec![1, 3]]), BigInt::from(5));
        assert_eq!(m(vec![vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        // first-row cofactors: 0·(-4) - 2·(-4) + 1·3
        assert_eq!(m(vec![vec![0, 2, 1], vec![3, 0, 4], vec![1, 1, 0]]), BigInt::from(11));
    }

    #[test]
    fn counts_agree_with_enumeration() {
        for kind in LatticeKind::ALL {
            let spec = build_lattice(kind);
            for region in [Region::Square, Region::Disk] {
                for l in [2, 3, 4, 5] {
                    let Ok(d) = carve_free(&spec, &region, l) else {
                        continue;
                    };
                    let n = count_matchings(&d).unwrap();
                    assert_eq!(kasteleyn_count(&d).unwrap(), BigInt::from(n), "{kind} {region:?} {l}");
                }
            }
        }
    }

    #[test]
    fn samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in LatticeKind::ALL {
            let d = carve_free(&build_lattice(kind), &Region::Disk, 8).unwrap();
            for _ in 0..5 {
                let m = exact_sample(&d, &mut rng).unwrap();
                validate(&m, &d).unwrap();
            }
        }
    }
}
