//! Complete positivity of a map on a subspace, best completely positive
//! approximations, exact extension existence, and analytic classification.
//!
//! The map is given by pairs X_i -> Y_i; complete positivity on
//! span{X_i} is decided by the compactified witness program
//!
//!   gamma = inf sum_i tr[Y_i^T H_i]
//!           s.t. sum_i X_i (x) H_i >= 0, ||H_i|| <= 1,
//!
//! whose optimum is 0 exactly for completely positive maps and strictly
//! negative otherwise, the optimal H_i being an independently checkable
//! witness. Its dual measures the best completely positive approximation
//! on the full algebra; both are solved and cross-validated.

mod classify;
mod delta;
mod extension;
mod gamma;
mod spec;
mod witness;

pub use classify::{classify, contains_nonzero_psd, ClassifyReport, PsdInSpan, SpanGuarantee};
pub use delta::{delta_sdp, delta_sdp_with, unboundedness_diagnostic, ApproxObjective, DeltaResult, DiagnosticPoint};
pub use extension::{exact_cp_extension, extension_verdict, ExactExtension, ExtensionVerdict};
pub use gamma::{gamma_sdp, gamma_sdp_with, CpStatus, CpVerdict};
pub use spec::{preprocess, MapSpec};
pub use witness::{normalize_witness, validate_witness, Witness, WitnessCheck};

pub(crate) use delta::{apply_coeff, choi_from_solution};

/// Dead zone around 0 for the gamma dichotomy: optima below the negative
/// margin are treated as genuinely negative, provided the witness
/// re-validates.
pub const WITNESS_MARGIN: f64 = 1e-7;

/// Wider dead zone used when the approximation program cross-examines a
/// negative gamma claim. Witness programs without interior points admit
/// slightly infeasible witnesses whose objectives reach this scale, so
/// approximation optima below it certify complete positivity rather than
/// refute it.
pub const DELTA_MARGIN: f64 = 1e-6;

#[cfg(test)]
mod duality_tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, Complex64, HermitianMatrix};
    use crate::solver::Tolerances;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> HermitianMatrix {
        let m = ComplexMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
        });
        HermitianMatrix::symmetrize(m)
    }

    /// |delta + gamma| small on random specs (strong duality of the pair).
    #[test]
    fn delta_equals_minus_gamma_on_random_specs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let tols = Tolerances::default();
        for trial in 0..10 {
            let d = 2 + trial % 2;
            let dp = 2 + (trial / 2) % 2;
            let n = 1 + trial % 3;
            let pairs: Vec<_> = (0..n)
                .map(|_| (random_hermitian(&mut rng, d), random_hermitian(&mut rng, dp)))
                .collect();
            let spec = preprocess(&pairs, &[]).unwrap();
            let g = gamma_sdp(&spec, &tols).unwrap();
            let de = delta_sdp(&spec, &tols).unwrap();
            let err = (de.delta + g.gamma).abs();
            assert!(
                err <= 1e-6 * (1.0 + de.delta.abs()),
                "trial {trial}: delta {} gamma {} err {err:.3e}",
                de.delta,
                g.gamma
            );
        }
    }
}
