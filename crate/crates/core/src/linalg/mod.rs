//! Dense complex-matrix kernel.
//!
//! Provides the matrix types shared by every other module (general complex
//! matrices, Hermitian matrices, Choi matrices), the tensor/partial-trace
//! operations of the Choi correspondence, Hermitian eigendecompositions and
//! the spectral functionals built on them (trace norm, operator norm,
//! square root, fidelity, support ratios), and the real symmetric embedding
//! that lets the SDP engine work over complex Hermitian cones in real
//! arithmetic.
//!
//! Tensor index convention: Choi matrices live on (output ⊗ input), and all
//! flattening is row-major. Transposition is always with respect to the
//! canonical basis.

mod choi;
mod eig;
mod matrix;
mod ops;

pub use choi::{apply_choi, choi_of_map, dual_apply, ChoiMatrix};
pub use eig::{Eigendecomposition, Svd};
pub use matrix::{Complex64, ComplexMatrix, HermitianMatrix};
pub use ops::{
    hermitian_basis_of_span, independent_subset, partial_trace, pauli, real_embedding, tensor,
    TraceFactor,
};

/// Default absolute tolerance for "is PSD" questions.
pub const PSD_TOL: f64 = 1e-9;

/// Relative Hermiticity tolerance at the public API boundary.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Numerical-rank tolerance for a matrix of dimension `dim` and operator
/// norm `op_norm`.
pub fn rank_tol(dim: usize, op_norm: f64) -> f64 {
    dim as f64 * f64::EPSILON * op_norm.max(1.0)
}

/// Three-valued PSD verdict: feasibility boundaries are the whole subject
/// here, so marginal cases are reported instead of silently rounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdVerdict {
    Yes,
    No,
    Marginal,
}

/// Classify `min_eig` against the tolerance band `[-tol, tol]`.
pub fn psd_verdict(min_eig: f64, tol: f64) -> PsdVerdict {
    if min_eig > tol {
        PsdVerdict::Yes
    } else if min_eig < -tol {
        PsdVerdict::No
    } else {
        PsdVerdict::Marginal
    }
}
