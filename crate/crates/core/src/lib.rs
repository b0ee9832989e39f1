//! Feasibility of completely positive extensions of partially specified
//! linear maps between matrix algebras.
//!
//! A map is given as finitely many input/output pairs `X_i -> Y_i` of
//! Hermitian matrices. The library decides whether the map is completely
//! positive on the span of its inputs, whether it extends to a completely
//! positive map (or a quantum channel, or a probabilistic operation) on the
//! full algebra, and produces independently checkable certificates either
//! way. Everything runs on an embedded dense semidefinite-programming
//! engine; no external solver is required.

pub mod aucrit;
pub mod classical;
pub mod cpcheck;
pub mod error;
pub mod extend;
pub mod fixtures;
pub mod linalg;
pub mod report;
pub mod solver;

pub use error::Error;

/// Crate-wide `Result`.
pub type Result<T> = std::result::Result<T, Error>;
