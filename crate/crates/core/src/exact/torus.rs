//! The Kasteleyn matrix of the fundamental domain with magnetic weights,
//! its characteristic polynomial and the zeros on the unit torus.

use super::laurent::{adjugate, determinant, Laurent};
use super::KasteleynSigns;
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, LatticeKind, LatticeSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU;

/// One fundamental-domain edge: its endpoints as white/black indices of
/// the domain, the translation of the black endpoint relative to the white
/// one, and its sign.
#[derive(Clone, Debug, PartialEq)]
pub struct FdEdgeData {
    pub white: usize,
    pub black: usize,
    pub translation: (i64, i64),
    pub sign: i8,
}

/// `K(z, w)` indexed (white, black). A black vertex translated by `(x, y)`
/// (thread shifts, vertical periods) relative to the white one contributes
/// `z^-y w^-x`. `P = det K`, `Q = adj K`, and the weighted versions are
/// `K(B_y z, B_x w)` and so on.
#[derive(Clone, Debug)]
pub struct TorusKasteleyn {
    pub kind: LatticeKind,
    pub spec: LatticeSpec,
    pub weights: (f64, f64),
    pub signs: KasteleynSigns,
    pub edges: Vec<FdEdgeData>,
    pub k: Vec<Vec<Laurent>>,
    pub p: Laurent,
    pub q: Vec<Vec<Laurent>>,
    pub kb: Vec<Vec<Laurent>>,
    pub pb: Laurent,
    pub qb: Vec<Vec<Laurent>>,
    /// Phases of `z` where a root of `P(z, ·)` crosses the unit circle.
    pub breaks: Vec<f64>,
}

impl TorusKasteleyn {
    pub fn size(&self) -> usize {
        self.k.len()
    }

    /// Weighted Kasteleyn entry of a single edge.
    pub fn edge_weight(&self, e: &FdEdgeData) -> f64 {
        let (bx, by) = self.weights;
        e.sign as f64 * bx.powi(-e.translation.0 as i32) * by.powi(-e.translation.1 as i32)
    }

    /// Scale of the coefficients of the weighted polynomial.
    pub fn scale(&self) -> f64 {
        self.pb.terms.values().map(|c| c.abs()).sum::<f64>().max(1e-300)
    }

    /// `Q·K = P·Id` coefficient by coefficient (unweighted, integer
    /// coefficients, so the comparison is exact).
    pub fn adjugate_identity_holds(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let mut s = Laurent::zero();
                for m in 0..n {
                    s = &s + &(&self.q[i][m] * &self.k[m][j]);
                }
                s == if i == j { self.p.clone() } else { Laurent::zero() }
            })
        })
    }
}

pub fn build_torus_kasteleyn(kind: LatticeKind, weights: (f64, f64)) -> Result<TorusKasteleyn> {
    if !(weights.0 > 0.0 && weights.1 > 0.0) {
        return Err(Error::Parse(format!("magnetic weights must be positive, got {weights:?}")));
    }
    let spec = build_lattice(kind);
    let signs = KasteleynSigns::of(&spec)?;
    let n = spec.p() / 2;
    let mut k = vec![vec![Laurent::zero(); n]; n];
    let mut edges = Vec::new();
    for idx in 0..spec.fundamental_domain.edges.len() {
        let slot = spec.edge_slot(crate::lattice::EdgeId { tx: 0, ty: 0, idx });
        let ((ws, wk), (bs, bk)) = spec.slot_endpoints(slot);
        let wid = spec.vertex_id(ws, wk);
        let bid = spec.vertex_id(bs, bk);
        let t = (bid.tx - wid.tx, bid.ty - wid.ty);
        let e = FdEdgeData {
            white: wid.idx / 2,
            black: bid.idx / 2,
            translation: t,
            sign: signs.of_slot(&spec, slot),
        };
        k[e.white][e.black].add_term(e.sign as f64, -t.1, -t.0);
        edges.push(e);
    }
    let p = determinant(&k);
    let q = adjugate(&k);
    let (bx, by) = weights;
    let kb: Vec<Vec<Laurent>> = k
        .iter()
        .map(|r| r.iter().map(|l| l.scaled(by, bx)).collect())
        .collect();
    let pb = p.scaled(by, bx);
    let qb: Vec<Vec<Laurent>> = q
        .iter()
        .map(|r| r.iter().map(|l| l.scaled(by, bx)).collect())
        .collect();
    let mut tk = TorusKasteleyn {
        kind,
        spec,
        weights,
        signs,
        edges,
        k,
        p,
        q,
        kb,
        pb,
        qb,
        breaks: vec![],
    };
    tk.breaks = find_breaks(&tk);
    Ok(tk)
}

/// Roots of `Σ c_i x^i` by simultaneous (Durand–Kerner) iteration followed
/// by Newton polishing. Leading and trailing zero coefficients are trimmed
/// by the caller.
pub(crate) fn poly_roots(c: &[Complex64]) -> Vec<Complex64> {
    let d = c.len().saturating_sub(1);
    if d == 0 {
        return vec![];
    }
    let lead = c[d];
    let monic: Vec<Complex64> = c.iter().map(|v| v / lead).collect();
    let eval = |x: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |a, &v| a * x + v);
    let scale = 1.0 + monic.iter().take(d).map(|v| v.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut r: Vec<Complex64> = (0..d).map(|i| seed.powi(i as i32) * scale.min(2.0)).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..d {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    den *= r[i] - r[j];
                }
            }
            let step = eval(r[i]) / den;
            r[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * scale {
            break;
        }
    }
    let deriv: Vec<Complex64> = (1..=d).map(|i| monic[i] * i as f64).collect();
    let eval_d = |x: Complex64| deriv.iter().rev().fold(Complex64::new(0.0, 0.0), |a, &v| a * x + v);
    for x in &mut r {
        for _ in 0..3 {
            let dv = eval_d(*x);
            if dv.norm() == 0.0 {
                break;
            }
            *x -= eval(*x) / dv;
        }
    }
    r
}

/// Coefficients of `P(z, ·)` with exact zeros trimmed at both ends, and
/// the lowest power of `w` kept.
pub(crate) fn p_in_w(pb: &Laurent, z: Complex64) -> (i64, Vec<Complex64>) {
    let (mut lo, mut c) = pb.in_w(z);
    while c.last().is_some_and(|v| v.norm() == 0.0) {
        c.pop();
    }
    while c.first().is_some_and(|v| v.norm() == 0.0) {
        c.remove(0);
        lo += 1;
    }
    (lo, c)
}

fn roots_inside(tk: &TorusKasteleyn, theta: f64) -> usize {
    let (_, c) = p_in_w(&tk.pb, Complex64::from_polar(1.0, theta));
    poly_roots(&c).iter().filter(|r| r.norm() < 1.0).count()
}

fn find_breaks(tk: &TorusKasteleyn) -> Vec<f64> {
    const M: usize = 720;
    let counts: Vec<usize> = (0..M).map(|i| roots_inside(tk, TAU * i as f64 / M as f64)).collect();
    let mut out = Vec::new();
    for i in 0..M {
        let j = (i + 1) % M;
        if counts[i] != counts[j] {
            let (mut a, mut b) = (TAU * i as f64 / M as f64, TAU * (i + 1) as f64 / M as f64);
            let ca = counts[i];
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if roots_inside(tk, m) == ca {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push((0.5 * (a + b)).rem_euclid(TAU));
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // roots crossing together show up as one break per root
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if out.len() > 1 && out[0] + TAU - out[out.len() - 1] < 1e-9 {
        out.pop();
    }
    out
}

/// A zero `(z₀, w₀)` of `P` on the unit torus with the derivative data
/// that governs the decay of `K⁻¹`. The zero is the one of the conjugate
/// pair with `Im(α z₀ · conj(β w₀)) > 0`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub z0: Complex64,
    pub w0: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    /// `Q(z₀, w₀)[b][w] = u[b] · v[w]`.
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    /// Second over first singular value of `Q(z₀, w₀)`.
    pub rank_ratio: f64,
    pub residual: f64,
}

impl SpectralData {
    pub fn phi(&self, x: f64, y: f64) -> Complex64 {
        x * self.alpha * self.z0 - y * self.beta * self.w0
    }

    /// `Im(conj(α z₀) · β w₀)`, which must stay away from zero.
    pub fn collinearity(&self) -> f64 {
        ((self.alpha * self.z0).conj() * (self.beta * self.w0)).im
    }

    /// The same data at the conjugate zero.
    pub fn conjugate(&self) -> SpectralData {
        SpectralData {
            z0: self.z0.conj(),
            w0: self.w0.conj(),
            alpha: self.alpha.conj(),
            beta: self.beta.conj(),
            u: self.u.iter().map(|c| c.conj()).collect(),
            v: self.v.iter().map(|c| c.conj()).collect(),
            rank_ratio: self.rank_ratio,
            residual: self.residual,
        }
    }
}

fn newton_zero(tk: &TorusKasteleyn, mut th: f64, mut ps: f64) -> (f64, f64, f64) {
    let (dz, dw) = (tk.pb.dz(), tk.pb.dw());
    let i = Complex64::new(0.0, 1.0);
    for _ in 0..100 {
        let z = Complex64::from_polar(1.0, th);
        let w = Complex64::from_polar(1.0, ps);
        let f = tk.pb.eval(z, w);
        let a = i * z * dz.eval(z, w);
        let b = i * w * dw.eval(z, w);
        // solve [a.re b.re; a.im b.im] (dθ, dψ) = -(f.re, f.im)
        let det = a.re * b.im - b.re * a.im;
        if det.abs() < 1e-300 {
            break;
        }
        let d_th = (-f.re * b.im + b.re * f.im) / det;
        let d_ps = (-a.re * f.im + a.im * f.re) / det;
        th += d_th;
        ps += d_ps;
        if d_th.abs() + d_ps.abs() < 1e-15 {
            break;
        }
    }
    let z = Complex64::from_polar(1.0, th);
    let w = Complex64::from_polar(1.0, ps);
    (th.rem_euclid(TAU), ps.rem_euclid(TAU), tk.pb.eval(z, w).norm())
}

/// Zeros of `P` on the unit torus by a phase-grid scan and Newton
/// refinement on `(arg z, arg w)`.
pub fn characteristic_zeros(tk: &TorusKasteleyn) -> Result<SpectralData> {
    const N: usize = 192;
    let scale = tk.scale();
    let grid: Vec<Vec<f64>> = (0..N)
        .map(|a| {
            (0..N)
                .map(|b| {
                    let z = Complex64::from_polar(1.0, TAU * a as f64 / N as f64);
                    let w = Complex64::from_polar(1.0, TAU * b as f64 / N as f64);
                    tk.pb.eval(z, w).norm() / scale
                })
                .collect()
        })
        .collect();
    let mut zeros: Vec<(f64, f64)> = Vec::new();
    let mut best_residual = f64::INFINITY;
    for a in 0..N {
        for b in 0..N {
            let v = grid[a][b];
            let is_min = (-1i64..=1).all(|da| {
                (-1i64..=1).all(|db| {
                    let (x, y) = ((a as i64 + da).rem_euclid(N as i64), (b as i64 + db).rem_euclid(N as i64));
                    grid[x as usize][y as usize] >= v
                })
            });
            if !is_min || v > 0.25 {
                continue;
            }
            let (th, ps, res) = newton_zero(tk, TAU * a as f64 / N as f64, TAU * b as f64 / N as f64);
            best_residual = best_residual.min(res / scale);
            if res / scale > 1e-10 {
                continue;
            }
            let close = |u: f64, v: f64| {
                let d = (u - v).rem_euclid(TAU);
                d.min(TAU - d) < 1e-6
            };
            if !zeros.iter().any(|&(t, p)| close(t, th) && close(p, ps)) {
                zeros.push((th, ps));
            }
        }
    }
    if zeros.is_empty() {
        return Err(if best_residual < 1e-4 {
            Error::DegenerateZero
        } else {
            Error::NoTorusZero
        });
    }
    let (dz, dw) = (tk.pb.dz(), tk.pb.dw());
    let mut chosen = None;
    for &(th, ps) in &zeros {
        let z0 = Complex64::from_polar(1.0, th);
        let w0 = Complex64::from_polar(1.0, ps);
        let alpha = dz.eval(z0, w0);
        let beta = dw.eval(z0, w0);
        let d = ((alpha * z0) * (beta * w0).conj()).im;
        if d.abs() < 1e-9 * scale * scale {
            return Err(Error::DegenerateZero);
        }
        if d > 0.0 && chosen.is_none() {
            chosen = Some((z0, w0, alpha, beta));
        }
    }
    let (z0, w0, alpha, beta) = chosen.ok_or(Error::DegenerateZero)?;
    let n = tk.size();
    let qm = DMatrix::from_fn(n, n, |b, w| tk.qb[b][w].eval(z0, w0));
    let svd = qm.svd(true, true);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let s1 = svd.singular_values[order[0]];
    let rank_ratio = if n > 1 { svd.singular_values[order[1]] / s1 } else { 0.0 };
    let um = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let u = (0..n).map(|b| um[(b, order[0])] * s1).collect();
    let v = (0..n).map(|w| vt[(order[0], w)]).collect();
    Ok(SpectralData {
        z0,
        w0,
        alpha,
        beta,
        u,
        v,
        rank_ratio,
        residual: tk.pb.eval(z0, w0).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjugate_identity_on_every_lattice() {
        for kind in LatticeKind::ALL {
            let tk = build_torus_kasteleyn(kind, (1.0, 1.0)).unwrap();
            assert!(tk.adjugate_identity_holds(), "{kind}");
            assert!(tk.p.eval(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).is_finite());
        }
    }

    #[test]
    fn roots_of_a_cubic() {
        let c = |re| Complex64::new(re, 0.0);
        // (x - 1)(x + 2)(x - 0.5)
        let r = poly_roots(&[c(1.0), c(-2.5), c(0.5), c(1.0)]);
        for want in [1.0, -2.0, 0.5] {
            assert!(r.iter().any(|x| (x - c(want)).norm() < 1e-12));
        }
    }

    #[test]
    fn liquid_weights_have_two_conjugate_zeros() {
        for kind in LatticeKind::ALL {
            let tk = build_torus_kasteleyn(kind, (1.0, 1.0)).unwrap();
            let sd = characteristic_zeros(&tk).unwrap();
            assert!(sd.residual < 1e-10, "{kind}");
            assert!(sd.rank_ratio < 1e-8, "{kind}");
            assert!(sd.collinearity().abs() > 1e-3, "{kind}");
            let c = sd.conjugate();
            assert!(tk.pb.eval(c.z0, c.w0).norm() < 1e-10);
            assert!((1..=2).contains(&tk.breaks.len()), "{kind}");
        }
    }
}
