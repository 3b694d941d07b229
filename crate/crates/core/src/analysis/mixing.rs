//! Coalescence of the monotone coupling, mixing-time scaling and pyramid
//! erosion.

use super::{drift::surface_drift, par_map, Fit};
use crate::beads::Surface;
use crate::dynamics::{async_fast_step, coupled_step, Band, ChainState, CoupledState, DynamicsKind};
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, carve_free, FiniteDomain, LatticeKind, Region};
use crate::matching::pyramid;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// Sampled `(time, V_t)` for the coupled extremal pair.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeTrace {
    pub lattice: LatticeKind,
    pub region: String,
    pub scale: u32,
    pub dynamics: DynamicsKind,
    /// Largest floor-to-ceiling gap, when a band is used.
    pub band_width: Option<i64>,
    pub seed: u64,
    pub points: Vec<(f64, i64)>,
    pub coalesced: bool,
}

impl VolumeTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,volume\n");
        for (t, v) in &self.points {
            writeln!(out, "{t},{v}").unwrap();
        }
        out
    }
}

/// Runs the coupled extremes, recording `V` every `every` events and at
/// coalescence. Stops after `max_events` without an error.
pub fn volume_trace(
    domain: &FiniteDomain,
    kind: DynamicsKind,
    band: Option<Band>,
    seed: u64,
    every: u64,
    max_events: u64,
) -> Result<VolumeTrace> {
    let band_width = band.as_ref().map(Band::width);
    let mut cs = CoupledState::extremes(domain, band, seed)?;
    let mut points = vec![(0.0, cs.volume())];
    let every = every.max(1);
    while !cs.coalesced() && cs.events < max_events {
        coupled_step(&mut cs, kind, domain);
        if cs.events % every == 0 || cs.coalesced() {
            points.push((cs.time, cs.volume()));
        }
    }
    Ok(VolumeTrace {
        lattice: domain.lattice().kind,
        region: domain.region().name(),
        scale: domain.scale(),
        dynamics: kind,
        band_width,
        seed,
        points,
        coalesced: cs.coalesced(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coalescence {
    pub time: f64,
    pub events: u64,
}

/// First time the coupled chains started from the bottom and the top of
/// the band (or of the domain) agree.
pub fn coalescence_time(
    domain: &FiniteDomain,
    kind: DynamicsKind,
    band: Option<Band>,
    seed: u64,
    max_events: u64,
) -> Result<Coalescence> {
    let mut cs = CoupledState::extremes(domain, band, seed)?;
    while !cs.coalesced() {
        if cs.events >= max_events {
            return Err(Error::HorizonExceeded {
                time: cs.time,
                volume: cs.volume(),
            });
        }
        coupled_step(&mut cs, kind, domain);
    }
    Ok(Coalescence {
        time: cs.time,
        events: cs.events,
    })
}

pub(crate) fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Order-statistic 95% interval for the median.
fn median_interval(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len() as f64;
    let half = 0.98 * n.sqrt();
    let lo = ((n / 2.0 - half).floor().max(1.0) as usize).min(sorted.len()) - 1;
    let hi = ((n / 2.0 + half).ceil() as usize).clamp(1, sorted.len()) - 1;
    (sorted[lo], sorted[hi])
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub l: u32,
    pub median: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Sorted coalescence times.
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub lattice: LatticeKind,
    pub dynamics: DynamicsKind,
    pub band: Option<u32>,
    pub rows: Vec<ScalingRow>,
    pub fit: Fit,
    /// Bootstrap 95% interval of the slope.
    pub slope_ci: (f64, f64),
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("L,median_coalescence,ci_lo,ci_hi\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.l, r.median, r.ci_lo, r.ci_hi).unwrap();
        }
        out
    }
}

/// The square-region domain of side `l` used by the scaling experiments.
pub fn scaling_domain(lattice: LatticeKind, l: u32) -> Result<FiniteDomain> {
    carve_free(&build_lattice(lattice), &Region::Square, l)
}

fn replica_seed(seed: u64, l: u32, r: usize) -> u64 {
    seed ^ ((l as u64) << 32) ^ r as u64
}

/// Median coalescence time per `L` on square regions, with a band of width
/// about `h` around the boundary height when given, and the log-log slope
/// of the medians against `L`.
#[allow(clippy::too_many_arguments)]
pub fn mixing_scaling(
    lattice: LatticeKind,
    kind: DynamicsKind,
    ls: &[u32],
    h: Option<u32>,
    replicas: usize,
    seed: u64,
    max_events: u64,
    jobs: usize,
) -> Result<ScalingReport> {
    let (lmin, lmax) = (ls.iter().min().copied(), ls.iter().max().copied());
    if ls.len() < 3 || lmax.unwrap_or(0) < 4 * lmin.unwrap_or(0) {
        return Err(Error::Parse("need at least three sizes spanning a factor of 4".into()));
    }
    if replicas == 0 {
        return Err(Error::Parse("need at least one replica".into()));
    }
    let mut rows = Vec::new();
    for &l in ls {
        let d = scaling_domain(lattice, l)?;
        let band = h.map(|h| Band::around_boundary(&d, h));
        let runs = par_map(jobs, (0..replicas).collect(), |r| {
            coalescence_time(&d, kind, band.clone(), replica_seed(seed, l, r), max_events)
        });
        let mut times: Vec<f64> = runs.into_iter().map(|r| r.map(|c| c.time)).collect::<Result<_>>()?;
        times.sort_by(f64::total_cmp);
        let (ci_lo, ci_hi) = median_interval(&times);
        rows.push(ScalingRow {
            l,
            median: median(&times),
            ci_lo,
            ci_hi,
            times,
        });
    }
    let fit = Fit::loglog(&rows.iter().map(|r| (r.l as f64, r.median)).collect::<Vec<_>>());
    let slope_ci = bootstrap_slope(&rows, seed);
    Ok(ScalingReport {
        lattice,
        dynamics: kind,
        band: h,
        rows,
        fit,
        slope_ci,
    })
}

fn bootstrap_slope(rows: &[ScalingRow], seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb007);
    let mut slopes: Vec<f64> = (0..400)
        .map(|_| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| {
                    let n = r.times.len();
                    let mut s: Vec<f64> = (0..n).map(|_| r.times[rng.gen_range(0..n)]).collect();
                    s.sort_by(f64::total_cmp);
                    (r.l as f64, median(&s))
                })
                .collect();
            Fit::loglog(&pts).slope
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    (slopes[9], slopes[389])
}

/// Eroded volume `Σ_f (p(f) - h_t(f))` of the asynchronous fast dynamics on
/// `W_L` started from the pyramid `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErosionTrace {
    pub lattice: LatticeKind,
    pub l: u32,
    pub seed: u64,
    /// `(time, eroded volume, apex drop)` at evenly spaced checkpoints,
    /// starting at time 0.
    pub points: Vec<(f64, i64, i64)>,
    /// Exact expected erosion per unit time at `p`.
    pub initial_rate: BigRational,
    /// Least-squares slope through the origin of eroded volume against time.
    pub rate: f64,
}

impl ErosionTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,volume\n");
        for (t, v, _) in &self.points {
            writeln!(out, "{t},{v}").unwrap();
        }
        out
    }
}

pub fn pyramid_erosion(lattice: LatticeKind, l: u32, horizon: f64, checkpoints: usize, seed: u64) -> Result<ErosionTrace> {
    let p = pyramid(lattice, l);
    let d = &p.domain;
    let start = Surface::new(p.matching.clone(), d)?;
    let initial_rate = -surface_drift(&start, d, DynamicsKind::AsyncFast, None);
    let mut state = ChainState::new(p.matching.clone(), d, seed)?;
    let beads = state.surface.beads.mobile(d);
    let eroded = |s: &Surface| -s.heights.iter().sum::<i64>();
    let checkpoints = checkpoints.max(1);
    let mut points = vec![(0.0, 0, 0)];
    let mut next = 1;
    let rate = beads.len() as f64;
    while next <= checkpoints {
        let dt = -(1.0 - state.rng.gen::<f64>()).ln() / rate;
        let t = state.time + dt;
        while next <= checkpoints && horizon * next as f64 / checkpoints as f64 <= t {
            let tc = horizon * next as f64 / checkpoints as f64;
            points.push((tc, eroded(&state.surface), -state.surface.heights[p.apex]));
            next += 1;
        }
        state.time = t;
        let b = beads[state.rng.gen_range(0..beads.len())];
        state = async_fast_step(state, b, d, None)?;
    }
    let (sxy, sxx) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, v, _)| (a + t * v as f64, b + t * t));
    Ok(ErosionTrace {
        lattice,
        l,
        seed,
        points,
        initial_rate,
        rate: if sxx > 0.0 { sxy / sxx } else { 0.0 },
    })
}

/// Mean fitted erosion rate per `L` over `seeds` runs, and its log-log
/// slope against `L`. Only the apex bead can move at `p`, so single runs
/// over short horizons are very noisy and the mean needs many seeds.
pub fn erosion_scaling(lattice: LatticeKind, ls: &[u32], horizon: f64, seeds: usize, seed: u64, jobs: usize) -> Result<Fit> {
    let mut pts = Vec::new();
    for &l in ls {
        let runs = par_map(jobs, (0..seeds).collect(), |r| {
            pyramid_erosion(lattice, l, horizon, 20, replica_seed(seed, l, r)).map(|e| e.rate)
        });
        let rates: Vec<f64> = runs.into_iter().collect::<Result<_>>()?;
        pts.push((l as f64, rates.iter().sum::<f64>() / rates.len().max(1) as f64));
    }
    Ok(Fit::loglog(&pts))
}

/// Drop of the apex below `p` after time `eps·L²`.
pub fn apex_drop(lattice: LatticeKind, l: u32, eps: f64, seed: u64) -> Result<i64> {
    let t = eps * (l as f64).powi(2);
    let e = pyramid_erosion(lattice, l, t, 1, seed)?;
    Ok(e.points.last().map_or(0, |p| p.2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::count_matchings;

    #[test]
    fn two_state_domain_coalesces_quickly() {
        let d = scaling_domain(LatticeKind::Square, 2).unwrap();
        assert_eq!(count_matchings(&d).unwrap(), 2);
        for kind in DynamicsKind::ALL {
            let mut ev: Vec<u64> = (0..100)
                .map(|s| coalescence_time(&d, kind, None, s, 10_000).unwrap().events)
                .collect();
            ev.sort_unstable();
            assert!(ev[50] < 100, "{kind}");
        }
    }

    #[test]
    fn coalescence_is_deterministic_per_seed() {
        let d = scaling_domain(LatticeKind::Hexagon, 6).unwrap();
        for kind in DynamicsKind::ALL {
            let a = coalescence_time(&d, kind, None, 7, 1_000_000).unwrap();
            let b = coalescence_time(&d, kind, None, 7, 1_000_000).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn event_cap_reports_partial_state() {
        let d = scaling_domain(LatticeKind::Square, 8).unwrap();
        match coalescence_time(&d, DynamicsKind::GlauberLocal, None, 1, 3) {
            Err(Error::HorizonExceeded { volume, .. }) => assert!(volume > 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn volume_trace_stays_nonnegative_and_ends_at_zero() {
        let d = scaling_domain(LatticeKind::SquareHexagon, 6).unwrap();
        for kind in DynamicsKind::ALL {
            let t = volume_trace(&d, kind, Some(Band::around_boundary(&d, 3)), 4, 5, 10_000_000).unwrap();
            assert!(t.coalesced);
            assert!(t.points.iter().all(|p| p.1 >= 0));
            assert_eq!(t.points.last().unwrap().1, 0);
            assert!(t.to_csv().starts_with("time,volume\n"));
        }
    }

    #[test]
    fn erosion_starts_at_zero_and_initial_rate_is_exact() {
        for kind in LatticeKind::ALL {
            let e = pyramid_erosion(kind, 6, 1.0, 4, 3).unwrap();
            assert_eq!(e.points[0], (0.0, 0, 0));
            assert!(e.points.iter().all(|p| p.1 >= 0));
            assert!(e.initial_rate > BigRational::from_integer(0.into()));
        }
    }

    #[test]
    fn median_interval_brackets_median() {
        let xs: Vec<f64> = (0..51).map(f64::from).collect();
        let (lo, hi) = median_interval(&xs);
        assert!(lo < median(&xs) && median(&xs) < hi);
    }

    #[test]
    fn scaling_checks_its_grid() {
        assert!(mixing_scaling(LatticeKind::Square, DynamicsKind::SyncFast, &[4, 8], None, 3, 0, 100, 1).is_err());
    }
}
