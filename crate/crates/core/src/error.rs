use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entries must be finite, found NaN/Inf at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (max |H - H^dag| = {deviation:.3e} exceeds {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e} below -{tolerance:.3e})")]
    NotPsd { min_eig: f64, tolerance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dependent inputs with conflicting outputs: the pairs do not define a linear map ({0})")]
    NotLinear(String),

    #[error("dual-side pairs are incompatible with the primal pairs: {0}")]
    Incompatible(String),

    #[error("inputs do not commute (max commutator norm {0:.3e})")]
    NonCommuting(f64),

    #[error("outputs do not commute (max commutator norm {0:.3e})")]
    NonCommutingRange(f64),

    #[error("eigendecomposition failed to converge")]
    EigFailure,

    #[error("numeric failure in SDP solve: {0}")]
    NumericFailure(String),

    #[error("malformed SDP problem: {0}")]
    MalformedProblem(String),

    #[error("{0}")]
    Unsupported(String),
}
