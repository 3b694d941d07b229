//! Fixtures shared by the benchmarks.

use dimerflow::analysis::scaling_domain;
use dimerflow::dynamics::CoupledState;
use dimerflow::{FiniteDomain, LatticeKind};

/// The domain used by the mixing experiments, with its coupled extremal
/// pair.
pub fn coupled_fixture(lattice: LatticeKind, l: u32, seed: u64) -> (FiniteDomain, CoupledState) {
    let d = scaling_domain(lattice, l).expect("scaling domains exist for every lattice");
    let cs = CoupledState::extremes(&d, None, seed).expect("extremal heights exist");
    (d, cs)
}
