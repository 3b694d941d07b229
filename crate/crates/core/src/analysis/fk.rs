//! Exact values of `F_k(L) = tr A^k` and `F̃_k(L) = 1ᵀ A^{k-1} 1` for the
//! `L × L` matrix `A_ij = 1/(i + j)`.
//!
//! With `D = lcm(2, ..., 2L)` the matrix `B = D·A` is integral, so every sum
//! is an integer over a power of `D`. Traces use the symmetry of `A`:
//! `tr A^{a+b} = Σ_ij (A^a)_ij (A^b)_ij`, which needs powers up to 3 for
//! `k ≤ 6`.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::Write as _;

pub const FK_MAX_K: u32 = 6;
pub const FK_MAX_L: u32 = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct FkRow {
    pub k: u32,
    pub l: u32,
    pub f: BigRational,
    pub f_tilde: BigRational,
    /// `F̃_k ≤ L·F_{k-1}`, undefined for `k = 1`.
    pub bound_holds: Option<bool>,
    /// `F_k / (ln L)^{⌊k/2⌋}`.
    pub ratio: f64,
}

type Mat = Vec<Vec<BigInt>>;

fn product(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut c = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut s = BigInt::zero();
            for k in 0..n {
                s += &a[i][k] * &b[k][j];
            }
            c[j][i] = s.clone();
            c[i][j] = s;
        }
    }
    c
}

fn frobenius(a: &Mat, b: &Mat) -> BigInt {
    let mut s = BigInt::zero();
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            s += x * y;
        }
    }
    s
}

/// All rows `k = 1..=k_max` for one `L`.
fn rows_for(k_max: u32, l: u32) -> Vec<FkRow> {
    let n = l as usize;
    let d = (2..=2 * l as u64).fold(BigInt::one(), |acc, m| acc.lcm(&BigInt::from(m)));
    let b: Mat = (1..=n)
        .map(|i| (1..=n).map(|j| &d / BigInt::from(i + j)).collect())
        .collect();
    let b2 = if k_max >= 3 { Some(product(&b, &b)) } else { None };
    let b3 = match &b2 {
        Some(b2) if k_max >= 5 => Some(product(b2, &b)),
        _ => None,
    };
    let trace = |k: u32| -> BigInt {
        match k {
            1 => (0..n).map(|i| b[i][i].clone()).sum(),
            2 => frobenius(&b, &b),
            3 => frobenius(&b, b2.as_ref().unwrap()),
            4 => frobenius(b2.as_ref().unwrap(), b2.as_ref().unwrap()),
            5 => frobenius(b2.as_ref().unwrap(), b3.as_ref().unwrap()),
            _ => frobenius(b3.as_ref().unwrap(), b3.as_ref().unwrap()),
        }
    };
    let mut v: Vec<BigInt> = vec![BigInt::one(); n];
    let mut out: Vec<FkRow> = Vec::new();
    let ln_l = (l as f64).ln();
    for k in 1..=k_max {
        let f = BigRational::new(trace(k), d.pow(k));
        let f_tilde = BigRational::new(v.iter().sum(), d.pow(k - 1));
        let bound_holds = out
            .last()
            .map(|prev| f_tilde <= BigRational::from_integer(BigInt::from(l)) * &prev.f);
        let ratio = f.to_f64().unwrap_or(f64::NAN) / ln_l.powi((k / 2) as i32);
        out.push(FkRow {
            k,
            l,
            f,
            f_tilde,
            bound_holds,
            ratio,
        });
        v = (0..n)
            .map(|i| (0..n).map(|j| &b[i][j] * &v[j]).sum())
            .collect();
    }
    out
}

/// Rows for every `k ≤ k_max` and every `L` in `ls`.
pub fn fk_sums(k_max: u32, ls: &[u32]) -> Result<Vec<FkRow>> {
    if k_max == 0 || k_max > FK_MAX_K {
        return Err(Error::ComputeBudgetExceeded(format!("k = {k_max} (1 to {FK_MAX_K})")));
    }
    if let Some(&l) = ls.iter().find(|&&l| l == 0 || l > FK_MAX_L) {
        return Err(Error::ComputeBudgetExceeded(format!("L = {l} (1 to {FK_MAX_L})")));
    }
    Ok(ls.iter().flat_map(|&l| rows_for(k_max, l)).collect())
}

/// `Σ_{d ≤ L} 1/(2d)`, half the harmonic number.
pub fn f1_closed_form(l: u32) -> BigRational {
    (1..=l as i64).fold(BigRational::zero(), |acc, d| {
        acc + BigRational::new(BigInt::one(), BigInt::from(2 * d))
    })
}

pub fn fk_csv(rows: &[FkRow]) -> String {
    let mut out = String::from("k,L,F,F_tilde,bound_holds,ratio\n");
    for r in rows {
        let bound = r.bound_holds.map_or(String::new(), |b| b.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            r.l,
            r.f.to_f64().unwrap_or(f64::NAN),
            r.f_tilde.to_f64().unwrap_or(f64::NAN),
            bound,
            r.ratio
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `A^k` by plain rational products.
    fn naive(k: u32, l: u32) -> (BigRational, BigRational) {
        let n = l as usize;
        let a: Vec<Vec<BigRational>> = (1..=n)
            .map(|i| (1..=n).map(|j| BigRational::new(1.into(), BigInt::from(i + j))).collect())
            .collect();
        let mut p: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
            .collect();
        let mut prev = p.clone();
        for _ in 0..k {
            prev = p.clone();
            p = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).fold(BigRational::zero(), |s, m| s + &prev[i][m] * &a[m][j]))
                        .collect()
                })
                .collect();
        }
        let tr = (0..n).fold(BigRational::zero(), |s, i| s + &p[i][i]);
        let ones = prev.iter().flatten().fold(BigRational::zero(), |s, x| s + x);
        (tr, ones)
    }

    #[test]
    fn agrees_with_rational_matrix_powers() {
        let rows = fk_sums(6, &[1, 4, 7]).unwrap();
        for r in rows {
            let (f, ft) = naive(r.k, r.l);
            assert_eq!(r.f, f, "k={} L={}", r.k, r.l);
            assert_eq!(r.f_tilde, ft, "k={} L={}", r.k, r.l);
        }
    }

    #[test]
    fn first_sum_is_half_harmonic() {
        for r in fk_sums(1, &[1, 10, 57]).unwrap() {
            assert_eq!(r.f, f1_closed_form(r.l));
            assert_eq!(r.bound_holds, None);
        }
    }

    #[test]
    fn bound_holds_on_small_grid() {
        let rows = fk_sums(5, &[3, 12, 30]).unwrap();
        assert!(rows.iter().filter(|r| r.k > 1).all(|r| r.bound_holds == Some(true)));
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(fk_sums(7, &[10]), Err(Error::ComputeBudgetExceeded(_))));
        assert!(matches!(fk_sums(3, &[201]), Err(Error::ComputeBudgetExceeded(_))));
    }
}
