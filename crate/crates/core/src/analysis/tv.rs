//! Exact laws of the dynamics on enumerable domains.

use crate::beads::Surface;
use crate::dynamics::{exact_kernel, Band, DynamicsKind};
use crate::error::Result;
use crate::exact::enumerate_matchings;
use crate::lattice::FiniteDomain;
use crate::matching::extremal_heights;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Largest state space handled exactly.
pub const TV_STATE_CAP: u64 = 4000;

/// Bound on the Poisson mass dropped by uniformization.
pub const TRUNCATION: f64 = 1e-9;

/// Threshold defining the mixing time.
pub fn tv_threshold() -> f64 {
    1.0 / (2.0 * std::f64::consts::E)
}

/// The generator of a dynamics on the full enumerated state space, started
/// from `h_max`.
#[derive(Clone, Debug)]
pub struct ExactChain {
    pub states: Vec<Surface>,
    pub start: usize,
    rows: Vec<Vec<(usize, f64)>>,
    exit: Vec<f64>,
    rate: f64,
}

impl ExactChain {
    pub fn new(domain: &FiniteDomain, kind: DynamicsKind, band: Option<&Band>) -> Result<Self> {
        let list = enumerate_matchings(domain, TV_STATE_CAP, true)?
            .states
            .unwrap_or_default();
        let states = list
            .into_iter()
            .map(|m| Surface::new(m, domain))
            .collect::<Result<Vec<_>>>()?;
        let top = match band {
            Some(b) => b.ceiling.clone(),
            None => extremal_heights(domain)?.1.values,
        };
        let start = states
            .iter()
            .position(|s| s.heights == top)
            .unwrap_or(0);
        let k = exact_kernel(states, kind, domain, band)?;
        let rows: Vec<Vec<(usize, f64)>> = k
            .rows
            .iter()
            .map(|r| r.iter().map(|(j, v)| (*j, v.to_f64().unwrap_or(0.0))).collect())
            .collect();
        let exit: Vec<f64> = rows.iter().map(|r| r.iter().map(|x| x.1).sum()).collect();
        let rate = exit.iter().copied().fold(0.0, f64::max);
        Ok(ExactChain {
            states: k.states,
            start,
            rows,
            exit,
            rate,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Law at time `t` from the start state, by uniformization, together
    /// with the bound on the dropped Poisson mass.
    pub fn law(&self, t: f64) -> (Vec<f64>, f64) {
        let n = self.len();
        let mut mu = vec![0.0; n];
        mu[self.start] = 1.0;
        let lam = self.rate * t;
        if lam <= 0.0 {
            return (mu, 0.0);
        }
        let mut out = vec![0.0; n];
        let mut log_w = -lam;
        let mut k = 0u64;
        loop {
            let w = log_w.exp();
            for (o, m) in out.iter_mut().zip(&mu) {
                *o += w * m;
            }
            // tail beyond k is at most pmf(k+1) / (1 - lam/(k+2)) once k+2 > lam
            let next = log_w + lam.ln() - ((k + 1) as f64).ln();
            let ratio = lam / (k + 2) as f64;
            if ratio < 1.0 {
                let tail = next.exp() / (1.0 - ratio);
                if tail < TRUNCATION {
                    return (out, tail);
                }
            }
            mu = self.step(&mu);
            log_w = next;
            k += 1;
        }
    }

    /// `mu · (I + Q / rate)`.
    fn step(&self, mu: &[f64]) -> Vec<f64> {
        let mut next: Vec<f64> = mu
            .iter()
            .zip(&self.exit)
            .map(|(m, e)| m * (1.0 - e / self.rate))
            .collect();
        for (i, row) in self.rows.iter().enumerate() {
            if mu[i] == 0.0 {
                continue;
            }
            for &(j, v) in row {
                next[j] += mu[i] * v / self.rate;
            }
        }
        next
    }

    /// Total variation distance to uniform at time `t`, and the truncation
    /// bound.
    pub fn tv(&self, t: f64) -> (f64, f64) {
        let (law, tail) = self.law(t);
        let u = 1.0 / self.len() as f64;
        (0.5 * law.iter().map(|p| (p - u).abs()).sum::<f64>(), tail)
    }

    /// Total variation of the point mass at time 0, in exact arithmetic.
    pub fn initial_tv(&self) -> BigRational {
        let n = BigInt::from(self.len());
        let u = BigRational::new(BigInt::from(1), n.clone());
        let one = BigRational::from_integer(BigInt::from(1));
        let rest = BigRational::from_integer(n - 1) * &u;
        ((&one - &u).abs() + rest) / BigRational::from_integer(BigInt::from(2))
    }

    /// First time the TV from the start drops below `1/(2e)`, to relative
    /// precision `1e-4`.
    pub fn mixing_time(&self) -> f64 {
        if self.len() <= 1 || self.tv(0.0).0 < tv_threshold() {
            return 0.0;
        }
        let below = |t: f64| self.tv(t).0 < tv_threshold();
        let mut hi = 1.0 / self.rate.max(1e-12);
        while !below(hi) {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        while hi - lo > 1e-4 * hi {
            let mid = 0.5 * (lo + hi);
            if below(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TvCurve {
    pub times: Vec<f64>,
    pub tv: Vec<f64>,
    pub n_states: usize,
    /// Largest dropped Poisson mass over the requested times.
    pub truncation: f64,
    /// TV at time 0, exactly.
    pub initial: BigRational,
    pub t_mix: f64,
}

impl TvCurve {
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("time,tv\n");
        for (t, v) in self.times.iter().zip(&self.tv) {
            writeln!(out, "{t},{v}").unwrap();
        }
        out
    }

    /// Whether consecutive values never increase by more than the
    /// truncation allowance.
    pub fn is_nonincreasing(&self) -> bool {
        self.tv.windows(2).all(|w| w[1] <= w[0] + 2.0 * self.truncation)
    }
}

/// Exact TV to uniform from `h_max` at each requested time.
pub fn tv_curve_exact(domain: &FiniteDomain, kind: DynamicsKind, band: Option<&Band>, times: &[f64]) -> Result<TvCurve> {
    let chain = ExactChain::new(domain, kind, band)?;
    let mut tv = Vec::with_capacity(times.len());
    let mut truncation: f64 = 0.0;
    for &t in times {
        let (v, tail) = chain.tv(t);
        tv.push(v);
        truncation = truncation.max(tail);
    }
    let initial = chain.initial_tv();
    debug_assert!(!initial.is_zero() || chain.len() == 1);
    Ok(TvCurve {
        times: times.to_vec(),
        tv,
        n_states: chain.len(),
        truncation,
        initial,
        t_mix: chain.mixing_time(),
    })
}
