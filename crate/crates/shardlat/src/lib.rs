//! Shard intersection lattices of the classical Coxeter groups.
//!
//! This crate builds the shard intersection order `(W, ≤)` for `W` of type
//! `A_{n-1}`, `B_n`, or `D_n` from purely combinatorial models of the group
//! elements — block decompositions of (signed, forked) permutations — and
//! mechanically checks the structural facts one expects of these lattices:
//!
//! * shard counts against closed formulas and against the one-descent census,
//! * grading by descent number (rank generating function = `W`-Eulerian),
//! * equivalence of the combinatorial order with exact cone containment,
//! * the lattice property and direct joins by constraint closure,
//! * EL-shellability of every interval, with Möbius/falling-chain duality,
//! * the symmetric boolean decomposition of `(S_n, ≤)` via valley hopping,
//!   and its restriction to the noncrossing partition lattice `NC(n)`.
//!
//! The geometry never leaves exact integer arithmetic: cones are systems of
//! equalities and inequalities between (negated) coordinates, and containment
//! is decided by reachability in a signed constraint digraph.
//!
//! Pairwise order tests and per-interval verifications are data-parallel.
//! With the default `parallel` feature they run on rayon; without it the same
//! code paths degrade to sequential iteration.

pub mod cones;
pub mod elements;
pub mod lattice;
mod par;
pub mod preorders;
pub mod sbd;
pub mod shards;
pub mod shelling;

pub use elements::{CoxType, Element, PermA, PermB, PermD};
pub use lattice::Poset;

/// Run a computation on a thread pool of the given size (`None` = default).
/// Without the `parallel` feature the closure runs sequentially either way.
pub fn run_with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    par::with_jobs(jobs, f)
}

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed element: {0}")]
    Malformed(String),
    #[error("type or degree mismatch: {0}")]
    Mismatch(String),
    #[error("n = {n} not supported for type {ctype:?}: {reason}")]
    UnsupportedRank {
        ctype: CoxType,
        n: usize,
        reason: String,
    },
    #[error("element cap exceeded: {requested} > {cap} (set SHARDLAT_CAP_ELEMENTS to raise)")]
    CapExceeded { requested: usize, cap: usize },
    #[error("relation is not a partial order: {0}")]
    NotAPartialOrder(String),
    #[error("poset is not graded: {0}")]
    NotGraded(String),
    #[error("not comparable: {0}")]
    NotComparable(String),
    #[error("join closure did not produce a valid pre-order: {0}")]
    JoinFailed(String),
    #[error("chain cap {cap} exceeded in interval [{lo}, {hi}]")]
    ChainCapExceeded { cap: u64, lo: String, hi: String },
    #[error("invalid shard descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default ceiling on poset sizes (dense bit-matrix storage).
pub const DEFAULT_POSET_CAP: usize = 10_000;

/// Ceiling on raw element enumeration, independent of poset construction.
pub const ENUM_CAP: usize = 200_000;

/// Poset element cap, overridable through `SHARDLAT_CAP_ELEMENTS`.
pub fn poset_cap() -> usize {
    std::env::var("SHARDLAT_CAP_ELEMENTS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_POSET_CAP)
}
