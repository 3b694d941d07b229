//! `K⁻¹` on the plane as a torus integral, local edge statistics, slopes
//! and the leading asymptotics of `K⁻¹`.

use super::torus::{build_torus_kasteleyn, p_in_w, poly_roots, SpectralData, TorusKasteleyn};
use crate::error::{Error, Result};
use crate::lattice::{newton_polygon, occupation_slope, periodic_matchings, strictly_inside, LatticeKind};
use crate::matching::newton_centre;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinvValue {
    pub value: Complex64,
    /// Difference between the `grid_n` and `2·grid_n` evaluations.
    pub error: f64,
}

/// A fundamental-domain edge translated by `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusEdge {
    pub fd_edge: usize,
    pub translation: (i64, i64),
}

const GL_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_ORDER;
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

fn horner(c: &[Complex64], x: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |a, &v| a * x + v)
}

/// `(1/2πi) ∮ Q_bw(z, w) w^x / P(z, w) dw/w` over `|w| = 1`, by residues.
fn inner(tk: &TorusKasteleyn, b: usize, w: usize, x: i64, z: Complex64) -> Result<Complex64> {
    let (nlo, nc) = tk.qb[b][w].in_w(z);
    if nc.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (plo, pc) = p_in_w(&tk.pb, z);
    let roots = poly_roots(&pc);
    if roots.iter().any(|r| (r.norm() - 1.0).abs() < 1e-10) {
        return Err(Error::SingularGrid);
    }
    let dpc: Vec<Complex64> = (1..pc.len()).map(|i| pc[i] * i as f64).collect();
    // integrand w^emin · N(w) / p(w)
    let emin = nlo + x - 1 - plo;
    let deg_n = nc.len() as i64 - 1;
    let deg_p = pc.len() as i64 - 1;
    let res = |r: Complex64| r.powi(emin as i32) * horner(&nc, r) / horner(&dpc, r);
    if emin >= 0 {
        Ok(roots.iter().filter(|r| r.norm() < 1.0).map(|&r| res(r)).sum())
    } else if emin + deg_n - deg_p <= -2 {
        Ok(-roots.iter().filter(|r| r.norm() > 1.0).map(|&r| res(r)).sum::<Complex64>())
    } else {
        // pole of order m = -emin at the origin: coefficient of w^(m-1) in N/p
        let m = (-emin) as usize;
        let mut inv = vec![Complex64::new(0.0, 0.0); m];
        inv[0] = Complex64::new(1.0, 0.0) / pc[0];
        for i in 1..m {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 1..=i.min(pc.len() - 1) {
                s += pc[j] * inv[i - j];
            }
            inv[i] = -s / pc[0];
        }
        let at0: Complex64 = (0..m)
            .filter(|&i| i < nc.len())
            .map(|i| nc[i] * inv[m - 1 - i])
            .sum();
        Ok(at0 + roots.iter().filter(|r| r.norm() < 1.0).map(|&r| res(r)).sum::<Complex64>())
    }
}

/// Composite Gauss–Legendre over `[0, 2π)` split at the break phases,
/// with about `nodes` nodes in total.
fn outer(tk: &TorusKasteleyn, b: usize, w: usize, x: i64, y: i64, nodes: usize) -> Result<Complex64> {
    let mut cuts = tk.breaks.clone();
    if cuts.is_empty() {
        cuts.push(0.0);
    }
    let gl = gauss_legendre();
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..cuts.len() {
        let a = cuts[i];
        let bnd = if i + 1 < cuts.len() { cuts[i + 1] } else { cuts[0] + TAU };
        let len = bnd - a;
        let panels = ((nodes as f64 / GL_ORDER as f64) * len / TAU).ceil().max(1.0) as usize;
        let h = len / panels as f64;
        for pnl in 0..panels {
            let c = a + h * (pnl as f64 + 0.5);
            for &(t, wt) in gl {
                let th = c + 0.5 * h * t;
                let z = Complex64::from_polar(1.0, th);
                total += 0.5 * h * wt * z.powi(y as i32) * inner(tk, b, w, x, z)?;
            }
        }
    }
    Ok(total / TAU)
}

fn kinv_pair(tk: &TorusKasteleyn, b: usize, w: usize, x: i64, y: i64, grid_n: usize) -> Result<(Complex64, Complex64)> {
    let run = |n: usize| -> Result<(Complex64, Complex64)> {
        Ok((outer(tk, b, w, x, y, 2 * n)?, outer(tk, b, w, x, y, n)?))
    };
    match run(grid_n) {
        // a node landed on a zero of P: shift the node set and retry
        Err(Error::SingularGrid) => run(grid_n + GL_ORDER / 2),
        r => r,
    }
}

/// `K⁻¹(b, w + (x, y))` for black `b` and white `w` of the fundamental
/// domain: `(1/(2πi)²) ∮∮ Q_bw / P · w^x z^y dw/w dz/z` on the unit torus.
/// The `w` integral is done by residues; the `z` integral by Gauss–Legendre
/// panels split where a root of `P(z, ·)` crosses the unit circle.
pub fn kinv_integral(tk: &TorusKasteleyn, b: usize, w: usize, x: i64, y: i64, grid_n: usize) -> Result<KinvValue> {
    if grid_n < 64 {
        return Err(Error::Parse(format!("grid_n must be at least 64, got {grid_n}")));
    }
    let (fine, coarse) = kinv_pair(tk, b, w, x, y, grid_n)?;
    Ok(KinvValue {
        value: fine,
        error: (fine - coarse).norm(),
    })
}

/// Endpoints of a translated edge: (white index, white translation, black
/// index, black translation) and its Kasteleyn weight.
fn endpoints(tk: &TorusKasteleyn, e: &TorusEdge) -> ((usize, (i64, i64)), (usize, (i64, i64)), f64) {
    let d = &tk.edges[e.fd_edge];
    let wt = e.translation;
    let bt = (wt.0 + d.translation.0, wt.1 + d.translation.1);
    ((d.white, wt), (d.black, bt), tk.edge_weight(d))
}

/// Kernel of the occupied edges among `edges` as a determinantal process:
/// `L(i, k) = K(w_i, b_i) K⁻¹(b_i, w_k)`, so that every principal minor is
/// a joint occupation probability. Also returns the entrywise difference
/// between the `grid_n` and `2·grid_n` evaluations.
pub fn edge_kernel(tk: &TorusKasteleyn, edges: &[TorusEdge], grid_n: usize) -> Result<(DMatrix<Complex64>, f64)> {
    if grid_n < 64 {
        return Err(Error::Parse(format!("grid_n must be at least 64, got {grid_n}")));
    }
    let n = edges.len();
    let ends: Vec<_> = edges.iter().map(|e| endpoints(tk, e)).collect();
    let mut fine = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let mut err: f64 = 0.0;
    let mut cache = std::collections::HashMap::new();
    for i in 0..n {
        for k in 0..n {
            let (bi, bt) = ends[i].1;
            let (wk, wt) = ends[k].0;
            let key = (bi, wk, wt.0 - bt.0, wt.1 - bt.1);
            let (f, c) = match cache.get(&key) {
                Some(&v) => v,
                None => {
                    let v = kinv_pair(tk, key.0, key.1, key.2, key.3, grid_n)?;
                    cache.insert(key, v);
                    v
                }
            };
            fine[(i, k)] = f * ends[i].2;
            err = err.max((f - c).norm() * ends[i].2);
        }
    }
    Ok((fine, err))
}

/// Probability that all listed edges are occupied under the translation
/// invariant Gibbs measure of the weights, with an error estimate.
pub fn edge_probabilities(tk: &TorusKasteleyn, edges: &[TorusEdge], grid_n: usize) -> Result<(f64, f64)> {
    if edges.len() > 12 {
        return Err(Error::ComputeBudgetExceeded(format!("{} edges (at most 12)", edges.len())));
    }
    if grid_n < 64 {
        return Err(Error::Parse(format!("grid_n must be at least 64, got {grid_n}")));
    }
    let n = edges.len();
    let ends: Vec<_> = edges.iter().map(|e| endpoints(tk, e)).collect();
    let weight: f64 = ends.iter().map(|e| e.2).product();
    let mut fine = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let mut coarse = fine.clone();
    for i in 0..n {
        for k in 0..n {
            let (wi, wt) = ends[i].0;
            let (bk, bt) = ends[k].1;
            let (f, c) = kinv_pair(tk, bk, wi, wt.0 - bt.0, wt.1 - bt.1, grid_n)?;
            fine[(i, k)] = f;
            coarse[(i, k)] = c;
        }
    }
    let pf = weight * fine.determinant();
    let pc = weight * coarse.determinant();
    Ok((pf.re, (pf - pc).norm() + pf.im.abs()))
}

pub fn edge_probability(tk: &TorusKasteleyn, edge: TorusEdge, grid_n: usize) -> Result<f64> {
    Ok(edge_probabilities(tk, &[edge], grid_n)?.0)
}

/// Leading term of `K⁻¹(b, w + (x, y))` at large distance.
pub fn asymptotic_kinv(sd: &SpectralData, b: usize, w: usize, x: i64, y: i64) -> f64 {
    let osc = sd.w0.powi(x as i32) * sd.z0.powi(y as i32);
    -(osc * sd.u[b] * sd.v[w] / (PI * sd.phi(x as f64, y as f64))).im
}

/// Mean height change per thread shift and per vertical period, measured
/// from the centre of the Newton polygon like the slopes taken by
/// `flatten_to_plane`.
pub fn slope_of_weights(tk: &TorusKasteleyn, grid_n: usize) -> Result<(f64, f64)> {
    let occ: Vec<f64> = (0..tk.edges.len())
        .map(|e| {
            edge_probability(
                tk,
                TorusEdge {
                    fd_edge: e,
                    translation: (0, 0),
                },
                grid_n,
            )
        })
        .collect::<Result<_>>()?;
    let reference = periodic_matchings(&tk.spec)
        .into_iter()
        .next()
        .expect("periodic matchings exist")
        .edges;
    let (s, t) = occupation_slope(&tk.spec, &occ, &reference);
    let c = newton_centre(&tk.spec);
    Ok((s - c.0, t - c.1))
}

/// Magnetic weights whose slope is `target` (centred coordinates), by
/// Newton iteration on `(ln B_x, ln B_y)` with difference Jacobians.
pub fn weights_for_slope(kind: LatticeKind, target: (f64, f64), tol: f64, grid_n: usize) -> Result<TorusKasteleyn> {
    let spec = crate::lattice::build_lattice(kind);
    let poly = newton_polygon(&spec)?;
    let c = newton_centre(&spec);
    if !strictly_inside(&poly, (target.0 + c.0, target.1 + c.1)) {
        return Err(Error::SlopeOutsidePolygon(target.0, target.1));
    }
    let slope = |u: (f64, f64)| -> Result<(f64, f64)> {
        let tk = build_torus_kasteleyn(kind, (u.0.exp(), u.1.exp()))?;
        slope_of_weights(&tk, grid_n)
    };
    let mut u = (0.0, 0.0);
    for _ in 0..60 {
        let s = slope(u)?;
        let r = (s.0 - target.0, s.1 - target.1);
        if r.0.abs().max(r.1.abs()) < tol {
            return build_torus_kasteleyn(kind, (u.0.exp(), u.1.exp()));
        }
        let h = 1e-4;
        let sx = slope((u.0 + h, u.1))?;
        let sy = slope((u.0, u.1 + h))?;
        let j = [
            [(sx.0 - s.0) / h, (sy.0 - s.0) / h],
            [(sx.1 - s.1) / h, (sy.1 - s.1) / h],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-12 {
            break;
        }
        let mut du = (
            -(j[1][1] * r.0 - j[0][1] * r.1) / det,
            -(-j[1][0] * r.0 + j[0][0] * r.1) / det,
        );
        // damp long steps, which leave the liquid region
        let len = du.0.hypot(du.1);
        if len > 1.0 {
            du = (du.0 / len, du.1 / len);
        }
        u = (u.0 + du.0, u.1 + du.1);
    }
    Err(Error::ComputeBudgetExceeded("slope inversion did not converge".into()))
}
