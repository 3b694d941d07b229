//! Bivariate Laurent polynomials in `(z, w)`.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// Sum of `c · z^a · w^b`, keyed by `(a, b)`. Zero coefficients are dropped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Laurent {
    pub terms: BTreeMap<(i64, i64), f64>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }

    pub fn constant(c: f64) -> Self {
        Laurent::monomial(c, 0, 0)
    }

    pub fn monomial(c: f64, a: i64, b: i64) -> Self {
        let mut p = Laurent::zero();
        p.add_term(c, a, b);
        p
    }

    pub fn add_term(&mut self, c: f64, a: i64, b: i64) {
        let v = self.terms.entry((a, b)).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.terms.remove(&(a, b));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(a, b), &c)| c * z.powi(a as i32) * w.powi(b as i32))
            .sum()
    }

    pub fn dz(&self) -> Laurent {
        let mut out = Laurent::zero();
        for (&(a, b), &c) in &self.terms {
            out.add_term(c * a as f64, a - 1, b);
        }
        out
    }

    pub fn dw(&self) -> Laurent {
        let mut out = Laurent::zero();
        for (&(a, b), &c) in &self.terms {
            out.add_term(c * b as f64, a, b - 1);
        }
        out
    }

    /// `p(s·z, t·w)`.
    pub fn scaled(&self, s: f64, t: f64) -> Laurent {
        let mut out = Laurent::zero();
        for (&(a, b), &c) in &self.terms {
            out.add_term(c * s.powi(a as i32) * t.powi(b as i32), a, b);
        }
        out
    }

    /// Coefficients of the powers of `w` at a fixed `z`, as
    /// `(lowest exponent, coefficients from that exponent up)`.
    pub fn in_w(&self, z: Complex64) -> (i64, Vec<Complex64>) {
        if self.is_zero() {
            return (0, vec![]);
        }
        let lo = self.terms.keys().map(|k| k.1).min().unwrap();
        let hi = self.terms.keys().map(|k| k.1).max().unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for (&(a, b), &v) in &self.terms {
            c[(b - lo) as usize] += v * z.powi(a as i32);
        }
        (lo, c)
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, o: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (&(a, b), &c) in &o.terms {
            out.add_term(c, a, b);
        }
        out
    }
}

impl Sub for &Laurent {
    type Output = Laurent;
    fn sub(self, o: &Laurent) -> Laurent {
        self + &(-o)
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        Laurent {
            terms: self.terms.iter().map(|(&k, &c)| (k, -c)).collect(),
        }
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, o: &Laurent) -> Laurent {
        let mut out = Laurent::zero();
        for (&(a, b), &c) in &self.terms {
            for (&(a2, b2), &c2) in &o.terms {
                out.add_term(c * c2, a + a2, b + b2);
            }
        }
        out
    }
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant(m: &[Vec<Laurent>]) -> Laurent {
    let n = m.len();
    match n {
        0 => Laurent::constant(1.0),
        1 => m[0][0].clone(),
        _ => {
            let mut out = Laurent::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let term = &m[0][j] * &determinant(&minor(m, 0, j));
                out = if j % 2 == 0 { &out + &term } else { &out - &term };
            }
            out
        }
    }
}

fn minor(m: &[Vec<Laurent>], r: usize, c: usize) -> Vec<Vec<Laurent>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| *j != c)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}

/// Adjugate: `adj[j][i]` is the `(i, j)` cofactor, so `m · adj = det · Id`.
pub fn adjugate(m: &[Vec<Laurent>]) -> Vec<Vec<Laurent>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![Laurent::constant(1.0)]];
    }
    let mut adj = vec![vec![Laurent::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let d = determinant(&minor(m, i, j));
            adj[j][i] = if (i + j) % 2 == 0 { d } else { -&d };
        }
    }
    adj
}
