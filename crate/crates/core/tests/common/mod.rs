#![allow(dead_code)]

use dimerflow::beads::Surface;
use dimerflow::dynamics::Band;
use dimerflow::exact::exact_sample;
use dimerflow::lattice::FiniteDomain;
use dimerflow::matching::{Capacities, Matching};
use num_bigint::BigInt;
use num_traits::One;
use rand::Rng;

pub fn surface(d: &FiniteDomain, h: &[i64]) -> Surface {
    let caps = Capacities::of_domain(d);
    Surface::new(Matching::from_occupancy(d.window().clone(), caps.occupancy_of(h)), d).unwrap()
}

/// Pointwise min and max of two exact samples, clamped into the band when
/// one is given. Clamping and lattice operations keep heights valid.
pub fn ordered_pair<R: Rng>(d: &FiniteDomain, band: Option<&Band>, rng: &mut R) -> (Surface, Surface) {
    let mut draw = || -> Vec<i64> {
        let h = Surface::new(exact_sample(d, rng).unwrap(), d).unwrap().heights;
        match band {
            Some(b) => h
                .iter()
                .enumerate()
                .map(|(f, &x)| x.clamp(b.floor[f], b.ceiling[f]))
                .collect(),
            None => h,
        }
    };
    let (a, b) = (draw(), draw());
    let lo: Vec<i64> = a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect();
    let hi: Vec<i64> = a.iter().zip(&b).map(|(x, y)| *x.max(y)).collect();
    (surface(d, &lo), surface(d, &hi))
}

/// Number of lozenge tilings of an `a × b × c` hexagon.
pub fn macmahon(a: u64, b: u64, c: u64) -> u64 {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 1..=a {
        for j in 1..=b {
            for k in 1..=c {
                num *= i + j + k - 1;
                den *= i + j + k - 2;
            }
        }
    }
    (num / den).try_into().unwrap()
}

pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id:>2} {name}: {detail}");
}
