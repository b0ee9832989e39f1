//! Commuting-domain and commuting-range specializations.
//!
//! Commuting states are probability vectors in a common eigenbasis; the
//! normalized part of their span meets the nonnegative orthant in a
//! polytope with finitely many vertices, so positivity of a map on the
//! span reduces to finitely many eigenvalue checks on the vertex images.
//! Low input dimensions admit explicit completely positive extensions,
//! assembled here exactly as constructed in the existence proofs;
//! everything else falls back to the SDPs.

mod extension;
mod polytope;
mod simdiag;

pub use extension::{
    commuting_domain_extension, commuting_domain_positive, commuting_range_cp_extension,
    CommutingDomainExtension, CommutingPositivity, CommutingRangeExtension,
};
pub use polytope::{polytope_extremes, ClassicalPolytope, PolytopeVertex};
pub use simdiag::simultaneous_diagonalize;

/// Absolute commutation tolerance after unit-trace normalization.
pub const COMMUTE_TOL: f64 = 1e-10;

/// Eigenvalue clustering threshold for simultaneous diagonalization.
pub const CLUSTER_TOL: f64 = 1e-8;
