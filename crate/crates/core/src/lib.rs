//! Succinct partial orders.
//!
//! An `n`-element poset is stored in about `n²/4` bits while precedence
//! queries take a constant number of operations. The same machinery gives
//! constant-time reachability for arbitrary digraphs (via their condensation)
//! and for transitive binary relations.
//!
//! Pipeline: [`order`] computes height levels of the closure, [`flatten`]
//! merges thin consecutive levels until at most `lg n` remain, and
//! [`compress`] encodes the remaining flat poset by peeling balanced bicliques
//! ([`biclique`]) off dense level pairs. [`oracle`] assembles the pieces.

pub mod biclique;
pub mod bits;
pub mod bitseq;
pub mod codec;
pub mod compress;
pub mod container;
pub mod error;
pub mod flatten;
pub mod format;
pub mod gen;
pub mod oracle;
pub mod order;
pub mod scc;

pub use bitseq::CompressedBitSequence;
pub use error::{Error, Result, Violation};
pub use oracle::{
    Mode, Oracle, ReachabilityOracle, ReductionIndex, SpaceReport, SuccinctPoset, TransitiveRelationOracle,
};

pub use order::{AntichainDecomposition, BitMatrix, ClosureMatrix, Digraph, LinearExtension};
