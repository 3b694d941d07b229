//! Exact rational transition kernels on an enumerated state space.

use super::{Band, DynamicsKind, Parity};
use crate::beads::{BeadId, Surface};
use crate::error::{Error, Result};
use crate::lattice::FiniteDomain;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::HashMap;

/// Sparse rows of rational entries over a fixed list of states. Depending
/// on the constructor this is a generator (off-diagonal rates) or a
/// stochastic matrix (diagonal included).
#[derive(Clone, Debug)]
pub struct Kernel {
    pub states: Vec<Surface>,
    pub rows: Vec<Vec<(usize, BigRational)>>,
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn add(row: &mut Vec<(usize, BigRational)>, j: usize, x: BigRational) {
    match row.iter_mut().find(|(k, _)| *k == j) {
        Some((_, v)) => *v += x,
        None => row.push((j, x)),
    }
}

impl Kernel {
    fn index(states: &[Surface]) -> HashMap<&[i64], usize> {
        states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.heights.as_slice(), i))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        self.rows[i]
            .iter()
            .find(|(k, _)| *k == j)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// Detailed balance with respect to the uniform measure, which for a
    /// uniform measure means the matrix is symmetric.
    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|i| self.rows[i].iter().all(|(j, v)| self.entry(*j, i) == *v))
    }

    /// Row vector times matrix.
    pub fn apply(&self, mu: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            if mu[i].is_zero() {
                continue;
            }
            for (j, v) in row {
                out[*j] += &mu[i] * v;
            }
        }
        out
    }

    pub fn row_sums(&self) -> Vec<BigRational> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(BigRational::zero(), |a, (_, v)| a + v))
            .collect()
    }

    /// Uniform measure is invariant: every column sums to the row sum of
    /// the same index, which covers both generators and stochastic matrices.
    pub fn preserves_uniform(&self) -> bool {
        let ones = vec![BigRational::one(); self.len()];
        self.apply(&ones) == self.row_sums()
    }
}

/// Glauber generator: each face rings at rate 1 and each orientation is
/// chosen with probability 1/2.
pub fn glauber_generator(states: Vec<Surface>, domain: &FiniteDomain, band: Option<&Band>) -> Result<Kernel> {
    let index = Kernel::index(&states);
    let mut rows = vec![Vec::new(); states.len()];
    for (i, s) in states.iter().enumerate() {
        for &f in domain.interior_faces() {
            for up in [true, false] {
                let mut t = s.clone();
                if t.rotate(domain, f, up, band) {
                    let j = *index.get(t.heights.as_slice()).ok_or(Error::DomainMismatch)?;
                    add(&mut rows[i], j, frac(1, 2));
                }
            }
        }
    }
    Ok(Kernel { states, rows })
}

/// Asynchronous fast generator: each mobile bead rings at rate 1 and jumps
/// to a uniform point of its interval.
pub fn async_generator(states: Vec<Surface>, domain: &FiniteDomain, band: Option<&Band>) -> Result<Kernel> {
    let index = Kernel::index(&states);
    let mut rows = vec![Vec::new(); states.len()];
    for (i, s) in states.iter().enumerate() {
        for b in s.beads.mobile(domain) {
            let (lo, hi) = s.interval(domain, b, band);
            let p = s.beads.position(b);
            for x in lo..=hi {
                if x == p {
                    continue;
                }
                let mut t = s.clone();
                t.move_bead(domain, b, x);
                let j = *index.get(t.heights.as_slice()).ok_or(Error::DomainMismatch)?;
                add(&mut rows[i], j, frac(1, hi - lo + 1));
            }
        }
    }
    Ok(Kernel { states, rows })
}

/// One synchronous resampling of the given parity, as a stochastic matrix.
pub fn sync_step_matrix(
    states: Vec<Surface>,
    parity: Parity,
    domain: &FiniteDomain,
    band: Option<&Band>,
) -> Result<Kernel> {
    let index = Kernel::index(&states);
    let mut rows = vec![Vec::new(); states.len()];
    for (i, s) in states.iter().enumerate() {
        let moves: Vec<(BeadId, i64, i64)> = s
            .beads
            .mobile(domain)
            .into_iter()
            .filter(|b| Parity::of(b.thread) == parity)
            .map(|b| {
                let (lo, hi) = s.interval(domain, b, band);
                (b, lo, hi)
            })
            .collect();
        let weight = moves
            .iter()
            .fold(BigRational::one(), |a, (_, lo, hi)| a * frac(1, hi - lo + 1));
        let mut choice: Vec<i64> = moves.iter().map(|m| m.1).collect();
        loop {
            let mut t = s.clone();
            for (m, &x) in moves.iter().zip(&choice) {
                t.move_bead(domain, m.0, x);
            }
            let j = *index.get(t.heights.as_slice()).ok_or(Error::DomainMismatch)?;
            add(&mut rows[i], j, weight.clone());
            // odometer over the product of intervals
            let mut k = 0;
            while k < moves.len() && choice[k] == moves[k].2 {
                choice[k] = moves[k].1;
                k += 1;
            }
            if k == moves.len() {
                break;
            }
            choice[k] += 1;
        }
    }
    Ok(Kernel { states, rows })
}

/// Synchronous fast generator: each parity clock rings at rate 1, so the
/// off-diagonal rates are those of `P_even + P_odd`.
pub fn sync_generator(states: Vec<Surface>, domain: &FiniteDomain, band: Option<&Band>) -> Result<Kernel> {
    let even = sync_step_matrix(states, Parity::Even, domain, band)?;
    let odd = sync_step_matrix(even.states.clone(), Parity::Odd, domain, band)?;
    let mut rows = vec![Vec::new(); even.len()];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, v) in even.rows[i].iter().chain(&odd.rows[i]) {
            if *j != i {
                add(row, *j, v.clone());
            }
        }
    }
    Ok(Kernel {
        states: even.states,
        rows,
    })
}

/// Generator of the given dynamics (off-diagonal rates only).
pub fn exact_kernel(
    states: Vec<Surface>,
    kind: DynamicsKind,
    domain: &FiniteDomain,
    band: Option<&Band>,
) -> Result<Kernel> {
    match kind {
        DynamicsKind::GlauberLocal => glauber_generator(states, domain, band),
        DynamicsKind::SyncFast => sync_generator(states, domain, band),
        DynamicsKind::AsyncFast => async_generator(states, domain, band),
    }
}
