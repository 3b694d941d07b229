//! Random perfect matchings of the square, hexagon and square-hexagon
//! lattices: height functions, the bead encoding, Glauber and fast
//! dynamics with monotone couplings, and Kasteleyn oracles for exact
//! counting, sampling and infinite-volume statistics.

pub mod analysis;
pub mod beads;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod matching;

pub use error::{Error, Result};
pub use lattice::{build_lattice, FiniteDomain, LatticeKind, LatticeSpec, Region};
pub use matching::{HeightField, Matching};
