use thiserror::Error;

/// Every failure the engine reports. Variants carry enough context to print
/// a useful message without the caller re-deriving it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lattice {0} has no thread decomposition")]
    UnsupportedLattice(String),
    #[error("no face fits inside the region at this scale")]
    EmptyDomain,
    #[error("interior has {white} free white and {black} free black vertices")]
    OddParity { white: usize, black: usize },
    #[error("region does not fit inside the window with a collar")]
    WindowTooSmall,
    #[error("complement of the interior faces is not connected")]
    NotSimplyConnected,
    #[error("boundary matching does not cover vertex ({seam},{k}) exactly once")]
    InvalidBoundary { seam: i64, k: i64 },
    #[error("vertex ({seam},{k}) is covered {count} times")]
    NotAMatching { seam: i64, k: i64, count: usize },
    #[error("height violates the capacity bound between faces {from} and {to}")]
    InvalidHeight { from: usize, to: usize },
    #[error("no perfect matching exists")]
    NoMatching,
    #[error("face {0} is not rotatable in the requested direction")]
    NotRotatable(usize),
    #[error("face {0} is not an interior face")]
    OutsideDomain(usize),
    #[error("interlacing fails on thread {thread} near bead {index}")]
    InterlacingViolation { thread: i64, index: usize },
    #[error("bead ({thread},{rank}) is frozen")]
    FrozenBead { thread: i64, rank: usize },
    #[error("floor exceeds ceiling at face {0}")]
    InvalidConstraint(usize),
    #[error("state leaves the floor/ceiling band at face {0}")]
    StateOutsideBand(usize),
    #[error("enumeration exceeded the cap of {0} states")]
    CapExceeded(u64),
    #[error("Kasteleyn matrix is {white}x{black}")]
    NonSquareMatrix { white: usize, black: usize },
    #[error("characteristic polynomial has no zero on the unit torus")]
    NoTorusZero,
    #[error("torus zero is degenerate")]
    DegenerateZero,
    #[error("integration grid hits a zero of P")]
    SingularGrid,
    #[error("slope ({0}, {1}) is not strictly inside the Newton polygon")]
    SlopeOutsidePolygon(f64, f64),
    #[error("coupled chains did not coalesce before time {time} (volume {volume})")]
    HorizonExceeded { time: f64, volume: i64 },
    #[error("standard error {se} exceeds tolerance {tol}")]
    InsufficientSamples { se: f64, tol: f64 },
    #[error("computation exceeds its budget: {0}")]
    ComputeBudgetExceeded(String),
    #[error("objects belong to different windows or domains")]
    DomainMismatch,
    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
