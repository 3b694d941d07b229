//! Randomized invariants over lattices, regions, seeds and dynamics.

mod common;

use common::{ordered_pair, surface};
use dimerflow::analysis::{direct_drift, exact_update_drift, fk_sums, volume};
use dimerflow::beads::{beads_of, check_interlacing, matching_of_beads};
use dimerflow::dynamics::{coupled_step, Band, CoupledState, DynamicsKind};
use dimerflow::exact::{count_matchings, exact_sample, kasteleyn_count};
use dimerflow::lattice::{build_lattice, carve_free, FiniteDomain, LatticeKind, Region};
use dimerflow::matching::{extremal_heights, height_field, heights, is_valid_height, matching_of, validate};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lattice() -> impl Strategy<Value = LatticeKind> {
    prop::sample::select(LatticeKind::ALL.to_vec())
}

fn region() -> impl Strategy<Value = Region> {
    prop::sample::select(vec![Region::Square, Region::Disk])
}

fn kind() -> impl Strategy<Value = DynamicsKind> {
    prop::sample::select(DynamicsKind::ALL.to_vec())
}

fn domain(k: LatticeKind, r: &Region, l: u32) -> Option<FiniteDomain> {
    carve_free(&build_lattice(k), r, l).ok()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn encodings_round_trip(k in lattice(), r in region(), l in 3u32..10, seed in any::<u64>()) {
        let Some(d) = domain(k, &r, l) else { return Ok(()) };
        let m = exact_sample(&d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        validate(&m, &d).unwrap();
        let h = heights(&m, &d).unwrap();
        prop_assert!(is_valid_height(&d, &h.values));
        prop_assert_eq!(&matching_of(&h, &d).unwrap(), &m);
        let b = beads_of(&m, &d);
        prop_assert!(check_interlacing(&b, &d).is_ok());
        prop_assert_eq!(&matching_of_beads(&b, &d).unwrap(), &m);
    }

    #[test]
    fn samples_lie_between_extremes(k in lattice(), r in region(), l in 3u32..10, seed in any::<u64>()) {
        let Some(d) = domain(k, &r, l) else { return Ok(()) };
        let (lo, hi) = extremal_heights(&d).unwrap();
        let h = heights(&exact_sample(&d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap(), &d).unwrap();
        prop_assert!(lo.le(&h) && h.le(&hi));
    }

    #[test]
    fn coupling_keeps_order(k in lattice(), dynamics in kind(), banded in any::<bool>(), seed in any::<u64>()) {
        let d = domain(k, &Region::Square, 8).unwrap();
        let band = banded.then(|| Band::around_boundary(&d, 3));
        let mut cs = CoupledState::extremes(&d, band.clone(), seed).unwrap();
        for _ in 0..400 {
            coupled_step(&mut cs, dynamics, &d);
            prop_assert!(cs.ordered());
            if let Some(b) = &band {
                for s in &cs.chains {
                    prop_assert!(b.check(&s.heights).is_ok());
                }
            }
        }
    }

    #[test]
    fn fast_drift_is_nonpositive(k in lattice(), banded in any::<bool>(), seed in any::<u64>()) {
        let d = domain(k, &Region::Disk, 6).unwrap();
        let band = banded.then(|| Band::around_boundary(&d, 4));
        let (lo, hi) = ordered_pair(&d, band.as_ref(), &mut ChaCha8Rng::seed_from_u64(seed));
        for dynamics in [DynamicsKind::SyncFast, DynamicsKind::AsyncFast] {
            let chain = exact_update_drift(&lo, &hi, &d, dynamics, band.as_ref()).unwrap();
            prop_assert!(chain <= BigRational::zero(), "{} {}", dynamics, chain);
        }
        for dynamics in DynamicsKind::ALL {
            let chain = exact_update_drift(&lo, &hi, &d, dynamics, band.as_ref()).unwrap();
            let direct = direct_drift(&lo, &hi, &d, dynamics, band.as_ref()).unwrap();
            prop_assert_eq!(chain, direct);
        }
    }

    #[test]
    fn volume_is_antisymmetric(k in lattice(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let d = domain(k, &Region::Disk, 7).unwrap();
        let a = heights(&exact_sample(&d, &mut ChaCha8Rng::seed_from_u64(s1)).unwrap(), &d).unwrap();
        let b = heights(&exact_sample(&d, &mut ChaCha8Rng::seed_from_u64(s2)).unwrap(), &d).unwrap();
        let (ab, ba) = (volume(&a, &b).unwrap(), volume(&b, &a).unwrap());
        prop_assert_eq!(ab.value, -ba.value);
        prop_assert_eq!(ab.ordered, a.le(&b));
        let lo: Vec<i64> = a.values.iter().zip(&b.values).map(|(x, y)| *x.min(y)).collect();
        let v = volume(&height_field(&d, lo), &b).unwrap();
        prop_assert!(v.ordered && v.value >= 0);
    }

    #[test]
    fn bands_hold_the_boundary(k in lattice(), r in region(), l in 3u32..9, h in 0u32..6) {
        let Some(d) = domain(k, &r, l) else { return Ok(()) };
        let band = Band::around_boundary(&d, h);
        prop_assert!(is_valid_height(&d, &band.floor) && is_valid_height(&d, &band.ceiling));
        let zero = vec![0; d.n_faces()];
        prop_assert!(band.check(&zero).is_ok());
        prop_assert!(surface(&d, &band.floor).heights.iter().zip(&band.ceiling).all(|(a, b)| a <= b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn determinant_counts_match_enumeration(k in lattice(), r in region(), l in 2u32..6) {
        let Some(d) = domain(k, &r, l) else { return Ok(()) };
        prop_assert_eq!(kasteleyn_count(&d).unwrap(), BigInt::from(count_matchings(&d).unwrap()));
    }

    #[test]
    fn fk_bound_holds(k in 2u32..5, l in 1u32..40) {
        let rows = fk_sums(k, &[l]).unwrap();
        prop_assert!(rows.iter().all(|r| r.bound_holds != Some(false)));
    }
}
