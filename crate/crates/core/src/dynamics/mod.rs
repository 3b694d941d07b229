//! Glauber and fast bead dynamics, floor/ceiling bands and the monotone
//! coupling.
//!
//! All three dynamics run in continuous time, event by event. Glauber puts a
//! rate-1 clock on every interior face. Synchronous fast dynamics has one
//! rate-1 clock per thread parity and resamples every mobile bead of that
//! parity uniformly on its accessible interval. Asynchronous fast dynamics
//! puts a rate-1 clock on every mobile bead.

mod kernel;

pub use kernel::{async_generator, exact_kernel, glauber_generator, sync_generator, sync_step_matrix, Kernel};

use crate::beads::{BeadId, Surface};
use crate::error::{Error, Result};
use crate::lattice::FiniteDomain;
use crate::matching::{extremal_heights, Capacities, HeightField, Matching};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DynamicsKind {
    GlauberLocal,
    SyncFast,
    AsyncFast,
}

impl DynamicsKind {
    pub const ALL: [DynamicsKind; 3] = [
        DynamicsKind::GlauberLocal,
        DynamicsKind::SyncFast,
        DynamicsKind::AsyncFast,
    ];
}

impl fmt::Display for DynamicsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DynamicsKind::GlauberLocal => "glauber",
            DynamicsKind::SyncFast => "sync",
            DynamicsKind::AsyncFast => "async",
        })
    }
}

impl FromStr for DynamicsKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "glauber" => Ok(DynamicsKind::GlauberLocal),
            "sync" => Ok(DynamicsKind::SyncFast),
            "async" => Ok(DynamicsKind::AsyncFast),
            _ => Err(Error::Parse(format!("unknown dynamics '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(thread: i64) -> Parity {
        if thread.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Floor and ceiling heights (relative to the boundary matching).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Band {
    pub floor: Vec<i64>,
    pub ceiling: Vec<i64>,
}

impl Band {
    pub fn new(floor: Vec<i64>, ceiling: Vec<i64>) -> Result<Band> {
        if let Some(f) = (0..floor.len()).find(|&f| floor[f] > ceiling[f]) {
            return Err(Error::InvalidConstraint(f));
        }
        Ok(Band { floor, ceiling })
    }

    /// The band between `h_min` and `h_max`, which never binds.
    pub fn trivial(domain: &FiniteDomain) -> Result<Band> {
        let (lo, hi) = extremal_heights(domain)?;
        Band::new(lo.values, hi.values)
    }

    /// Valid floor and ceiling at distance about `h` around the boundary
    /// height: the smallest valid height above `-⌊h/2⌋` and the largest
    /// valid height below `h - ⌊h/2⌋` on G′, both pinned to 0 outside.
    pub fn around_boundary(domain: &FiniteDomain, h: u32) -> Band {
        let caps = Capacities::of_domain(domain);
        let (down, up) = ((h / 2) as i64, (h - h / 2) as i64);
        let target = |v: i64| -> Vec<i64> {
            (0..domain.n_faces())
                .map(|f| if domain.is_interior_face(f) { v } else { 0 })
                .collect()
        };
        let floor = caps.closure_max(&target(-down));
        let ceiling = caps.closure_min(&target(up));
        Band { floor, ceiling }
    }

    pub fn check(&self, heights: &[i64]) -> Result<()> {
        match (0..heights.len()).find(|&f| heights[f] < self.floor[f] || heights[f] > self.ceiling[f]) {
            Some(f) => Err(Error::StateOutsideBand(f)),
            None => Ok(()),
        }
    }

    /// Largest `ceiling - floor`.
    pub fn width(&self) -> i64 {
        self.floor
            .iter()
            .zip(&self.ceiling)
            .map(|(a, b)| b - a)
            .max()
            .unwrap_or(0)
    }
}

/// Validates a floor/ceiling pair against a state.
pub fn constrain(state: &ChainState, floor: &HeightField, ceiling: &HeightField) -> Result<Band> {
    let band = Band::new(floor.values.clone(), ceiling.values.clone())?;
    band.check(&state.surface.heights)?;
    Ok(band)
}

#[derive(Clone, Debug)]
pub struct ChainState {
    pub surface: Surface,
    pub time: f64,
    pub rng: ChaCha8Rng,
}

impl ChainState {
    pub fn new(m: Matching, domain: &FiniteDomain, seed: u64) -> Result<Self> {
        Ok(ChainState {
            surface: Surface::new(m, domain)?,
            time: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

fn exponential(rng: &mut impl Rng, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

fn check_band(band: Option<&Band>) -> Result<()> {
    if let Some(b) = band {
        if let Some(f) = (0..b.floor.len()).find(|&f| b.floor[f] > b.ceiling[f]) {
            return Err(Error::InvalidConstraint(f));
        }
    }
    Ok(())
}

/// Runs Glauber dynamics until `horizon`. Each interior face rings at rate
/// 1; a fair coin picks the target orientation, and moves that are not
/// possible or leave the band are skipped.
pub fn glauber_run(
    mut state: ChainState,
    horizon: f64,
    domain: &FiniteDomain,
    band: Option<&Band>,
) -> Result<ChainState> {
    check_band(band)?;
    let faces = domain.interior_faces();
    let rate = faces.len() as f64;
    loop {
        let dt = exponential(&mut state.rng, rate);
        if state.time + dt > horizon {
            state.time = horizon.max(state.time);
            return Ok(state);
        }
        state.time += dt;
        let f = faces[state.rng.gen_range(0..faces.len())];
        let up = state.rng.gen::<bool>();
        state.surface.rotate(domain, f, up, band);
    }
}

/// Resamples every mobile bead on threads of the given parity uniformly on
/// its accessible interval. Intervals of these beads do not interact, so
/// they are all computed before any bead moves.
pub fn sync_fast_step(
    mut state: ChainState,
    parity: Parity,
    domain: &FiniteDomain,
    band: Option<&Band>,
) -> ChainState {
    let moves: Vec<(BeadId, (i64, i64))> = state
        .surface
        .beads
        .mobile(domain)
        .into_iter()
        .filter(|b| Parity::of(b.thread) == parity)
        .map(|b| (b, state.surface.interval(domain, b, band)))
        .collect();
    for (b, (lo, hi)) in moves {
        let target = state.rng.gen_range(lo..=hi);
        state.surface.move_bead(domain, b, target);
    }
    state
}

/// Heat-bath update of one bead.
pub fn async_fast_step(
    mut state: ChainState,
    bead: BeadId,
    domain: &FiniteDomain,
    band: Option<&Band>,
) -> Result<ChainState> {
    if !state.surface.beads.is_mobile(domain, bead) {
        return Err(Error::FrozenBead {
            thread: bead.thread,
            rank: bead.rank,
        });
    }
    let (lo, hi) = state.surface.interval(domain, bead, band);
    let target = state.rng.gen_range(lo..=hi);
    state.surface.move_bead(domain, bead, target);
    Ok(state)
}

/// Runs any of the three dynamics in continuous time until `horizon`.
pub fn run(
    mut state: ChainState,
    kind: DynamicsKind,
    horizon: f64,
    domain: &FiniteDomain,
    band: Option<&Band>,
) -> Result<ChainState> {
    check_band(band)?;
    match kind {
        DynamicsKind::GlauberLocal => glauber_run(state, horizon, domain, band),
        DynamicsKind::SyncFast => loop {
            let dt = exponential(&mut state.rng, 2.0);
            if state.time + dt > horizon {
                state.time = horizon.max(state.time);
                return Ok(state);
            }
            state.time += dt;
            let parity = if state.rng.gen::<bool>() {
                Parity::Even
            } else {
                Parity::Odd
            };
            state = sync_fast_step(state, parity, domain, band);
        },
        DynamicsKind::AsyncFast => {
            let beads = state.surface.beads.mobile(domain);
            if beads.is_empty() {
                state.time = horizon.max(state.time);
                return Ok(state);
            }
            let rate = beads.len() as f64;
            loop {
                let dt = exponential(&mut state.rng, rate);
                if state.time + dt > horizon {
                    state.time = horizon.max(state.time);
                    return Ok(state);
                }
                state.time += dt;
                let b = beads[state.rng.gen_range(0..beads.len())];
                state = async_fast_step(state, b, domain, band)?;
            }
        }
    }
}

/// Several chains driven by one randomness source.
#[derive(Clone, Debug)]
pub struct CoupledState {
    pub chains: Vec<Surface>,
    pub band: Option<Band>,
    pub time: f64,
    pub events: u64,
    rng: ChaCha8Rng,
    key: u64,
    beads: Vec<BeadId>,
}

impl CoupledState {
    pub fn new(chains: Vec<Surface>, band: Option<Band>, domain: &FiniteDomain, seed: u64) -> Self {
        let beads = chains
            .first()
            .map(|s| s.beads.mobile(domain))
            .unwrap_or_default();
        CoupledState {
            chains,
            band,
            time: 0.0,
            events: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            key: splitmix(seed ^ 0x5eed_c0de),
            beads,
        }
    }

    /// Coupled chains started from the extremes of the band (or of the
    /// domain when there is no band).
    pub fn extremes(domain: &FiniteDomain, band: Option<Band>, seed: u64) -> Result<Self> {
        let (lo, hi) = match &band {
            Some(b) => (b.floor.clone(), b.ceiling.clone()),
            None => {
                let (lo, hi) = extremal_heights(domain)?;
                (lo.values, hi.values)
            }
        };
        let caps = Capacities::of_domain(domain);
        let make = |h: &[i64]| {
            let m = Matching::from_occupancy(domain.window().clone(), caps.occupancy_of(h));
            Surface::new(m, domain)
        };
        Ok(CoupledState::new(vec![make(&lo)?, make(&hi)?], band, domain, seed))
    }

    /// Sum over faces of the last chain's height minus the first chain's.
    pub fn volume(&self) -> i64 {
        let (a, b) = (&self.chains[0], &self.chains[self.chains.len() - 1]);
        a.heights.iter().zip(&b.heights).map(|(x, y)| y - x).sum()
    }

    pub fn coalesced(&self) -> bool {
        self.chains.windows(2).all(|w| w[0].heights == w[1].heights)
    }

    pub fn ordered(&self) -> bool {
        self.chains
            .windows(2)
            .all(|w| w[0].heights.iter().zip(&w[1].heights).all(|(a, b)| a <= b))
    }

    /// Shared uniform for bead `b` at position `x` in the current event.
    fn shared_uniform(&self, b: BeadId, x: i64) -> u64 {
        let mut h = splitmix(self.key ^ self.events);
        h = splitmix(h ^ b.thread as u64);
        h = splitmix(h ^ b.rank as u64);
        splitmix(h ^ x as u64)
    }

    fn choose(&self, b: BeadId, lo: i64, hi: i64) -> i64 {
        (lo..=hi)
            .min_by_key(|&x| self.shared_uniform(b, x))
            .expect("intervals are nonempty")
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// One shared-randomness event for every chain. Glauber chains share the
/// face and the coin. Fast chains share per-(bead, edge) uniforms and each
/// bead takes the accessible edge carrying the smallest one, which keeps
/// ordered chains ordered.
pub fn coupled_step(cs: &mut CoupledState, kind: DynamicsKind, domain: &FiniteDomain) {
    let band = cs.band.clone();
    let band = band.as_ref();
    match kind {
        DynamicsKind::GlauberLocal => {
            let faces = domain.interior_faces();
            cs.time += exponential(&mut cs.rng, faces.len() as f64);
            let f = faces[cs.rng.gen_range(0..faces.len())];
            let up = cs.rng.gen::<bool>();
            for s in &mut cs.chains {
                s.rotate(domain, f, up, band);
            }
        }
        DynamicsKind::SyncFast => {
            cs.time += exponential(&mut cs.rng, 2.0);
            let parity = if cs.rng.gen::<bool>() {
                Parity::Even
            } else {
                Parity::Odd
            };
            let beads: Vec<BeadId> = cs
                .beads
                .iter()
                .copied()
                .filter(|b| Parity::of(b.thread) == parity)
                .collect();
            for c in 0..cs.chains.len() {
                let moves: Vec<(BeadId, i64)> = beads
                    .iter()
                    .map(|&b| {
                        let (lo, hi) = cs.chains[c].interval(domain, b, band);
                        (b, cs.choose(b, lo, hi))
                    })
                    .collect();
                for (b, x) in moves {
                    cs.chains[c].move_bead(domain, b, x);
                }
            }
        }
        DynamicsKind::AsyncFast => {
            if cs.beads.is_empty() {
                return;
            }
            cs.time += exponential(&mut cs.rng, cs.beads.len() as f64);
            let b = cs.beads[cs.rng.gen_range(0..cs.beads.len())];
            for c in 0..cs.chains.len() {
                let (lo, hi) = cs.chains[c].interval(domain, b, band);
                let x = cs.choose(b, lo, hi);
                cs.chains[c].move_bead(domain, b, x);
            }
        }
    }
    cs.events += 1;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, carve_free, LatticeKind, Region};

    fn domino(l: u32) -> FiniteDomain {
        carve_free(&build_lattice(LatticeKind::Square), &Region::Square, l).unwrap()
    }

    #[test]
    fn zero_horizon_is_identity() {
        let d = domino(6);
        let s = ChainState::new(d.boundary().clone(), &d, 1).unwrap();
        for kind in DynamicsKind::ALL {
            let out = run(s.clone(), kind, 0.0, &d, None).unwrap();
            assert_eq!(out.surface, s.surface);
        }
    }

    #[test]
    fn frozen_band_freezes_chain() {
        let d = domino(6);
        let s = ChainState::new(d.boundary().clone(), &d, 3).unwrap();
        let band = Band::new(s.surface.heights.clone(), s.surface.heights.clone()).unwrap();
        for kind in DynamicsKind::ALL {
            let out = run(s.clone(), kind, 20.0, &d, Some(&band)).unwrap();
            assert_eq!(out.surface, s.surface);
        }
    }

    #[test]
    fn inverted_band_is_rejected() {
        let d = domino(4);
        let s = ChainState::new(d.boundary().clone(), &d, 3).unwrap();
        let mut floor = s.surface.heights.clone();
        let f = d.interior_faces()[0];
        floor[f] += 1;
        let band = Band {
            floor,
            ceiling: s.surface.heights.clone(),
        };
        assert_eq!(
            glauber_run(s, 1.0, &d, Some(&band)).unwrap_err(),
            Error::InvalidConstraint(f)
        );
    }

    #[test]
    fn identical_chains_stay_identical() {
        let d = domino(8);
        let s = Surface::new(d.boundary().clone(), &d).unwrap();
        for kind in DynamicsKind::ALL {
            let mut cs = CoupledState::new(vec![s.clone(), s.clone()], None, &d, 9);
            for _ in 0..500 {
                coupled_step(&mut cs, kind, &d);
                assert!(cs.coalesced());
            }
        }
    }

    #[test]
    fn extremes_coalesce_and_stay_ordered() {
        let d = domino(6);
        for kind in DynamicsKind::ALL {
            let mut cs = CoupledState::extremes(&d, None, 5).unwrap();
            let mut steps = 0;
            while !cs.coalesced() {
                coupled_step(&mut cs, kind, &d);
                assert!(cs.ordered(), "{kind}");
                steps += 1;
                assert!(steps < 1_000_000);
            }
            for _ in 0..100 {
                coupled_step(&mut cs, kind, &d);
                assert!(cs.coalesced());
            }
        }
    }

    #[test]
    fn band_around_boundary_is_valid() {
        let d = domino(8);
        let band = Band::around_boundary(&d, 3);
        let caps = Capacities::of_domain(&d);
        caps.check(&band.floor).unwrap();
        caps.check(&band.ceiling).unwrap();
        band.check(&vec![0; d.n_faces()]).unwrap();
        assert!(band.width() <= 3);
    }
}
