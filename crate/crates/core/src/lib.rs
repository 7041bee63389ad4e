//! Combinatorial machinery for planar presentations of 3-manifolds.
//!
//! A planar presentation sweeps a compact 3-manifold in `S^3` by level
//! spheres; every generic level meets the manifold in a planar surface whose
//! boundary circles cut the sphere into a tree of alternately-labelled faces.
//! This crate simulates such sweeps from a small event language, builds the
//! connectivity graph of a presentation and decides its tree criterion,
//! computes knot width with its thick/thin level formula, extracts and
//! certifies leveled graphs from nested intervals, constructs the explicit
//! layered embedding of a bipartite graph in a cube together with the slide
//! schedule that flattens it, and assembles verifiable reimbedding plans over
//! connectivity trees.
//!
//! Everything is pure data in, pure data out: schedules, certificates and
//! plans are values that an independent checker can replay.

pub mod bipartite;
pub mod connectivity;
pub mod heegaard;
pub mod leveled;
pub mod sweep;
pub mod sym;
pub mod width;

pub use sym::Sym;
