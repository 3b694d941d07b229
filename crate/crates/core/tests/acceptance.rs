//! Acceptance suite. Every criterion prints one `PASS` or `FAIL` line with
//! the measured values, then asserts. Run with `--nocapture` to see the
//! lines:
//!
//! ```text
//! cargo test -p dimerflow-core --test acceptance -- --nocapture
//! ```

mod common;

use common::{macmahon, ordered_pair, report};
use dimerflow::analysis::{
    erosion_scaling, exact_update_drift, fk_sums, fluctuation_moments, mixing_scaling, pyramid_drift_report,
    scaling_domain, variance_profile, ExactChain, FluctuationConfig, TRUNCATION,
};
use dimerflow::beads::{beads_of, check_interlacing, matching_of_beads, Surface};
use dimerflow::dynamics::{coupled_step, exact_kernel, Band, CoupledState, DynamicsKind};
use dimerflow::exact::{
    asymptotic_kinv, build_torus_kasteleyn, characteristic_zeros, enumerate_matchings, exact_sample,
    kasteleyn_count, kinv_integral, DEFAULT_CAP,
};
use dimerflow::lattice::{build_lattice, carve_free, LatticeKind, Region};
use dimerflow::matching::{heights, matching_of};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

const FAST: [DynamicsKind; 2] = [DynamicsKind::SyncFast, DynamicsKind::AsyncFast];

#[test]
fn criterion_01_kasteleyn_matches_enumeration() {
    let start = Instant::now();
    let square = build_lattice(LatticeKind::Square);
    let mut cases = Vec::new();
    for (l, known) in [(2u32, 2u64), (4, 36), (6, 6728)] {
        cases.push((format!("{l}x{l} domino"), carve_free(&square, &Region::Square, l).unwrap(), Some(known)));
    }
    // the hexagonal disk of diameter 4 is the 2x2x2 lozenge hexagon: 24
    // triangles, counted by MacMahon's product
    let hex = carve_free(&build_lattice(LatticeKind::Hexagon), &Region::Disk, 4).unwrap();
    assert_eq!(hex.interior_vertex_count(), 24);
    cases.push(("2x2x2 lozenge".into(), hex, Some(macmahon(2, 2, 2))));

    let mut pass = true;
    let mut detail = Vec::new();
    for (name, d, known) in &cases {
        let k = kasteleyn_count(d).unwrap();
        let e = enumerate_matchings(d, DEFAULT_CAP, false).unwrap().count;
        let ok = k == BigInt::from(e) && known.is_none_or(|v| v == e);
        pass &= ok;
        detail.push(format!("{name} {k}/{e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    report(1, "oracle agreement", pass, &format!("{} ({secs:.1}s)", detail.join(", ")));
    assert!(pass);
}

#[test]
fn criterion_02_kernels_reversible_for_uniform() {
    let mut pass = true;
    let mut detail = Vec::new();
    for (kind, region, l) in [
        (LatticeKind::Square, Region::Square, 4),
        (LatticeKind::Hexagon, Region::Disk, 4),
        (LatticeKind::SquareHexagon, Region::Square, 4),
    ] {
        let d = carve_free(&build_lattice(kind), &region, l).unwrap();
        let states: Vec<Surface> = enumerate_matchings(&d, 200, true)
            .unwrap()
            .states
            .unwrap()
            .into_iter()
            .map(|m| Surface::new(m, &d).unwrap())
            .collect();
        let band = Band::around_boundary(&d, 2);
        for dynamics in DynamicsKind::ALL {
            for b in [None, Some(&band)] {
                let inside: Vec<Surface> = states
                    .iter()
                    .filter(|s| b.is_none_or(|b| b.check(&s.heights).is_ok()))
                    .cloned()
                    .collect();
                let k = exact_kernel(inside, dynamics, &d, b).unwrap();
                // with uniform stationary law, detailed balance is symmetry
                let ok = k.is_symmetric() && k.preserves_uniform();
                pass &= ok;
                if !ok {
                    detail.push(format!("{kind} {dynamics} band={}", b.is_some()));
                }
            }
        }
        detail.push(format!("{kind} |Ω|={}", states.len()));
    }
    report(2, "detailed balance", pass, &detail.join(", "));
    assert!(pass);
}

#[test]
fn criterion_03_volume_drift_supermartingale() {
    let start = Instant::now();
    let zero = BigRational::zero();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut pairs = 0;
    let mut worst = BigRational::from_integer((-1000).into());
    let mut glauber_positive = 0;
    let lattices = LatticeKind::ALL;
    while pairs < 200 {
        let kind = lattices[pairs % 3];
        let banded = pairs % 2 == 1;
        let d = carve_free(&build_lattice(kind), &Region::Disk, 8).unwrap();
        let band = banded.then(|| Band::around_boundary(&d, 4));
        let (lo, hi) = ordered_pair(&d, band.as_ref(), &mut rng);
        for dynamics in FAST {
            let v = exact_update_drift(&lo, &hi, &d, dynamics, band.as_ref()).unwrap();
            if v > worst {
                worst = v.clone();
            }
        }
        if exact_update_drift(&lo, &hi, &d, DynamicsKind::GlauberLocal, band.as_ref()).unwrap() > zero {
            glauber_positive += 1;
        }
        pairs += 1;
    }
    let pairs_ok = worst <= zero;

    let mut interior_ok = true;
    let mut cases = 0;
    let mut radii = Vec::new();
    for kind in lattices {
        for dynamics in FAST {
            let r = pyramid_drift_report(kind, 8, dynamics, 10, 7).unwrap();
            cases += r.cases.len();
            interior_ok &= r.all_nonpositive();
            interior_ok &= r.cases.iter().filter(|c| !c.is_boundary()).all(|c| c.drift.is_zero());
            radii.push(format!("{kind}/{dynamics} r={}", r.zero_radius()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = pairs_ok && interior_ok && secs < 300.0;
    report(
        3,
        "supermartingale drift",
        pass,
        &format!(
            "{pairs} pairs, max fast drift {worst}; W_8 {cases} cases, interior zero: {interior_ok} ({}) ({secs:.1}s)",
            radii.join(", ")
        ),
    );
    println!("info: glauber drift positive on {glauber_positive}/{pairs} pairs");
    assert!(pass);
}

#[test]
fn criterion_04_monotone_coupling_preserves_order() {
    let domains: Vec<_> = LatticeKind::ALL
        .iter()
        .map(|&k| scaling_domain(k, 16).unwrap())
        .collect();
    let mut violations = 0u64;
    let mut events = 0u64;
    for seed in 0..100u64 {
        let d = &domains[seed as usize % 3];
        for dynamics in DynamicsKind::ALL {
            let mut cs = CoupledState::extremes(d, None, seed).unwrap();
            for _ in 0..10_000 {
                coupled_step(&mut cs, dynamics, d);
                events += 1;
                if !cs.ordered() {
                    violations += 1;
                }
            }
        }
    }
    let pass = violations == 0;
    report(4, "monotone coupling", pass, &format!("{events} events, {violations} violations"));
    assert!(pass);
}

#[test]
fn criterion_05_round_trip_bijections() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    let mut total = 0;
    for kind in LatticeKind::ALL {
        let d = carve_free(&build_lattice(kind), &Region::Disk, 8).unwrap();
        for _ in 0..1000 {
            let m = exact_sample(&d, &mut rng).unwrap();
            let h = heights(&m, &d).unwrap();
            let via_h = matching_of(&h, &d).unwrap();
            let b = beads_of(&m, &d);
            let via_b = matching_of_beads(&b, &d).unwrap();
            let ok = via_h.occupancy() == m.occupancy()
                && via_b.occupancy() == m.occupancy()
                && check_interlacing(&b, &d).is_ok()
                && beads_of(&via_h, &d) == b;
            total += 1;
            if !ok {
                violations += 1;
            }
        }
    }
    let pass = violations == 0;
    report(5, "round trips", pass, &format!("{total} samples, {violations} violations"));
    assert!(pass);
}

#[test]
fn criterion_06_mixing_scaling_window() {
    let start = Instant::now();
    let r = mixing_scaling(
        LatticeKind::Square,
        DynamicsKind::SyncFast,
        &[8, 16, 32],
        Some(3),
        60,
        11,
        50_000_000,
        1,
    )
    .unwrap();
    let medians: Vec<String> = r.rows.iter().map(|x| format!("L={} {:.1}", x.l, x.median)).collect();
    let secs = start.elapsed().as_secs_f64();
    let pass = (1.6..=2.6).contains(&r.fit.slope) && secs <= 1800.0;
    report(
        6,
        "mixing scaling",
        pass,
        &format!(
            "sync H=3 slope {:.3} (bootstrap {:.2}..{:.2}), medians {} ({secs:.1}s)",
            r.fit.slope,
            r.slope_ci.0,
            r.slope_ci.1,
            medians.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_pyramid_erosion_rate() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for kind in LatticeKind::ALL {
        let fit = erosion_scaling(kind, &[8, 16, 32], 2.0, 40, 17, 1).unwrap();
        pass &= (fit.slope - 1.0).abs() <= 0.3;
        detail.push(format!("{kind} {:.3}", fit.slope));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 1200.0;
    report(7, "pyramid erosion", pass, &format!("slopes {} ({secs:.1}s)", detail.join(", ")));
    assert!(pass);
}

#[test]
fn criterion_08_tv_calibration() {
    let d = carve_free(&build_lattice(LatticeKind::Hexagon), &Region::Disk, 6).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for dynamics in DynamicsKind::ALL {
        let chain = ExactChain::new(&d, dynamics, None).unwrap();
        let n = chain.len();
        let exact_start =
            chain.initial_tv() == BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(n));
        let t_mix = chain.mixing_time();
        let grid: Vec<f64> = (0..=60).map(|i| 3.0 * t_mix * i as f64 / 60.0).collect();
        let curve: Vec<(f64, f64)> = grid.iter().map(|&t| chain.tv(t)).collect();
        let monotone = curve.windows(2).all(|w| w[1].0 <= w[0].0 + 1e-12);
        let (tv2, e2) = chain.tv(2.0 * t_mix);
        let (tv3, e3) = chain.tv(3.0 * t_mix);
        let trunc = curve.iter().map(|c| c.1).fold(e2.max(e3), f64::max);
        let ok = n <= 2000
            && exact_start
            && monotone
            && tv2 <= (-2.0f64).exp()
            && tv3 <= (-3.0f64).exp()
            && trunc < TRUNCATION.max(1e-9);
        pass &= ok;
        detail.push(format!(
            "{dynamics}: |Ω|={n} t_mix={t_mix:.2} TV(2T)={tv2:.4} TV(3T)={tv3:.5} trunc={trunc:.1e}"
        ));
    }
    report(8, "TV calibration", pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_09_kinv_asymptotics() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for kind in LatticeKind::ALL {
        let tk = build_torus_kasteleyn(kind, (1.0, 1.0)).unwrap();
        let sd = characteristic_zeros(&tk).unwrap();
        let mut sups = Vec::new();
        let mut quad = 0.0f64;
        for r in (5..=50).step_by(5) {
            let mut sup = 0.0f64;
            for dir in 0..8 {
                let th = dir as f64 * PI / 4.0;
                let (x, y) = ((r as f64 * th.cos()).round() as i64, (r as f64 * th.sin()).round() as i64);
                let k = kinv_integral(&tk, 0, 0, x, y, 256).unwrap();
                quad = quad.max(k.error);
                let a = asymptotic_kinv(&sd, 0, 0, x, y);
                sup = sup.max((k.value.re - a).abs() * (x * x + y * y) as f64);
            }
            sups.push(sup);
        }
        let mut sorted = sups.clone();
        sorted.sort_by(f64::total_cmp);
        let median = 0.5 * (sorted[4] + sorted[5]);
        let last = *sups.last().unwrap();
        pass &= last <= 2.0 * median;
        detail.push(format!("{kind} sup(d=50)={last:.3} median={median:.3} quad={quad:.1e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 600.0;
    report(9, "K^-1 asymptotics", pass, &format!("{} ({secs:.1}s)", detail.join("; ")));
    assert!(pass);
}

#[test]
fn criterion_10_gaussian_fluctuations() {
    let start = Instant::now();
    let mut cfg = FluctuationConfig::new(LatticeKind::Hexagon, 32, 10_000);
    cfg.seed = 3;
    let m = fluctuation_moments(&cfg).unwrap();
    let (r4, r6) = (m.row(4).unwrap(), m.row(6).unwrap());
    let moments_ok = m.within(4, 3.0) && m.within(6, 3.0);
    let (_, fit) = variance_profile(LatticeKind::Hexagon, (1.0, 1.0), &[4, 8, 16, 32, 64], 128).unwrap();
    let target = 1.0 / (PI * PI);
    let slope_ok = (fit.slope - target).abs() <= 0.3 * target;
    let secs = start.elapsed().as_secs_f64();
    let pass = moments_ok && slope_ok && secs <= 1800.0;
    report(
        10,
        "gaussian fluctuations",
        pass,
        &format!(
            "d=32 n=10^4: m4={:.3}±{:.3} (3), m6={:.2}±{:.2} (15); variance slope {:.4} vs 1/π² {target:.4} ({secs:.1}s)",
            r4.moment, r4.se, r6.moment, r6.se, fit.slope
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_fk_sums() {
    let start = Instant::now();
    let ls = [10, 25, 50, 100, 200];
    let rows = fk_sums(5, &ls).unwrap();
    let bound_ok = rows.iter().all(|r| r.bound_holds != Some(false));
    let ratio = |k: u32, l: u32| rows.iter().find(|r| r.k == k && r.l == l).unwrap().ratio;
    // k = 1 pairs each cycle with itself and is the harmonic base case
    let growth: Vec<(u32, f64)> = (2..=5).map(|k| (k, ratio(k, 200) / ratio(k, 100))).collect();
    let bounded = growth.iter().all(|g| g.1 <= 1.2);
    let secs = start.elapsed().as_secs_f64();
    let pass = bound_ok && bounded && secs < 300.0;
    let g: Vec<String> = growth.iter().map(|(k, v)| format!("k={k} {v:.3}")).collect();
    report(
        11,
        "F_k sums",
        pass,
        &format!(
            "bound holds on {} rows: {bound_ok}; ratio(200)/ratio(100): {} ({secs:.1}s)",
            rows.len(),
            g.join(", ")
        ),
    );
    assert!(pass);
}
