use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{rank_tol, ComplexMatrix, HermitianMatrix};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HilbertVerdict {
    Exists,
    NotExists,
    SupportIncompatible,
}

/// Outcome of the Hilbert-metric existence criterion for a probabilistic
/// operation mapping two states to two states with nonzero probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HilbertCheck {
    pub verdict: HilbertVerdict,
    /// ||rho1^{-1/2} rho2 rho1^{-1/2}|| * ||rho2^{-1/2} rho1 rho2^{-1/2}||
    /// (infinity encodes a support violation factor).
    pub lhs: f64,
    pub rhs: f64,
    /// True when a support decision sat within 10x of the rank tolerance,
    /// i.e. the discontinuous support conditions were decided on a knife
    /// edge.
    pub marginal_support: bool,
}

struct SupportRelation {
    contained: bool,
    marginal: bool,
}

/// Is supp(b) contained in supp(a)? Measured by the mass of b outside the
/// support projector of a.
fn support_contained(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<SupportRelation> {
    let cut = rank_tol(a.dim(), a.op_norm());
    let proj = a.support_projector_with(cut)?;
    let one = ComplexMatrix::identity(a.dim());
    let q = &one - proj.matrix();
    let outside = HermitianMatrix::symmetrize(&(&q * b.matrix()) * &q).op_norm();
    let threshold = 10.0 * rank_tol(a.dim(), b.op_norm());
    Ok(SupportRelation {
        contained: outside <= threshold,
        marginal: outside > threshold / 10.0 && outside <= threshold * 10.0,
    })
}

/// ||a^{-1/2} b a^{-1/2}||, infinite when supp(b) is not contained in
/// supp(a).
fn sandwich_norm(a: &HermitianMatrix, b: &HermitianMatrix, contained: bool) -> Result<f64> {
    if !contained {
        return Ok(f64::INFINITY);
    }
    let cut = rank_tol(a.dim(), a.op_norm());
    let apinv = a.pinv_sqrt(cut)?;
    let sandwich = HermitianMatrix::symmetrize(&(apinv.matrix() * b.matrix()) * apinv.matrix());
    Ok(sandwich.max_eig().max(0.0))
}

fn product(a: f64, b: f64) -> f64 {
    // 0 * infinity := 0 by convention
    if (a == 0.0 && b.is_infinite()) || (b == 0.0 && a.is_infinite()) {
        0.0
    } else {
        a * b
    }
}

/// Existence criterion for a probabilistic operation with strictly
/// positive success probabilities on two given input/output states.
pub fn hilbert_metric_check(
    rho1: &HermitianMatrix,
    rho2: &HermitianMatrix,
    rho1p: &HermitianMatrix,
    rho2p: &HermitianMatrix,
) -> Result<HilbertCheck> {
    for (label, r) in [("rho1", rho1), ("rho2", rho2), ("rho1'", rho1p), ("rho2'", rho2p)] {
        let min_eig = r.min_eig();
        if min_eig < -1e-9 {
            return Err(Error::NotPsd {
                min_eig,
                tolerance: 1e-9,
            });
        }
        if (r.trace() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "{label} has trace {} (must be 1)",
                r.trace()
            )));
        }
    }
    if rho1.dim() != rho2.dim() || rho1p.dim() != rho2p.dim() {
        return Err(Error::DimensionMismatch("state dimensions differ".into()));
    }

    let in_12 = support_contained(rho2, rho1)?; // supp(rho1) vs supp(rho2)
    let in_21 = support_contained(rho1, rho2)?;
    let out_12 = support_contained(rho2p, rho1p)?;
    let out_21 = support_contained(rho1p, rho2p)?;
    let marginal_support =
        in_12.marginal || in_21.marginal || out_12.marginal || out_21.marginal;

    // supp[rho1] <= supp[rho2] must imply supp[rho1'] <= supp[rho2'], and
    // symmetrically
    if (in_12.contained && !out_12.contained) || (in_21.contained && !out_21.contained) {
        return Ok(HilbertCheck {
            verdict: HilbertVerdict::SupportIncompatible,
            lhs: f64::NAN,
            rhs: f64::NAN,
            marginal_support,
        });
    }

    let lhs = product(
        sandwich_norm(rho1, rho2, in_21.contained)?,
        sandwich_norm(rho2, rho1, in_12.contained)?,
    );
    let rhs = product(
        sandwich_norm(rho1p, rho2p, out_21.contained)?,
        sandwich_norm(rho2p, rho1p, out_12.contained)?,
    );
    let verdict = if lhs.is_infinite() || lhs >= rhs - 1e-9 {
        HilbertVerdict::Exists
    } else {
        HilbertVerdict::NotExists
    };
    Ok(HilbertCheck {
        verdict,
        lhs,
        rhs,
        marginal_support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::{psi0, psi1};

    #[test]
    fn identity_task_exists_with_equality() {
        let r1 = HermitianMatrix::diag(&[0.3, 0.7]);
        let r2 = HermitianMatrix::diag(&[0.8, 0.2]);
        let c = hilbert_metric_check(&r1, &r2, &r1, &r2).unwrap();
        assert_eq!(c.verdict, HilbertVerdict::Exists);
        assert!((c.lhs - c.rhs).abs() < 1e-9);
    }

    #[test]
    fn classical_example_values() {
        let r1 = HermitianMatrix::diag(&[1.0 / 3.0, 2.0 / 3.0]);
        let r2 = HermitianMatrix::diag(&[0.2, 0.8]);
        let r1p = HermitianMatrix::diag(&[0.5, 0.5]);
        let r2p = HermitianMatrix::diag(&[1.0 / 3.0, 2.0 / 3.0]);
        let c = hilbert_metric_check(&r1, &r2, &r1p, &r2p).unwrap();
        assert_eq!(c.verdict, HilbertVerdict::Exists);
        assert!((c.lhs - 2.0).abs() < 1e-9, "lhs = {}", c.lhs);
        assert!((c.rhs - 2.0).abs() < 1e-9, "rhs = {}", c.rhs);
    }

    #[test]
    fn identical_inputs_cannot_reach_distinct_outputs() {
        let mixed = HermitianMatrix::diag(&[0.5, 0.5]);
        let c = hilbert_metric_check(&mixed, &mixed, &psi0(), &psi1()).unwrap();
        // supp(rho1) = supp(rho2) (full), but supp(rho1') !<= supp(rho2')
        assert_eq!(c.verdict, HilbertVerdict::SupportIncompatible);
    }

    #[test]
    fn full_support_outputs_from_identical_inputs() {
        // identical full-rank inputs, distinct full-rank outputs:
        // lhs = 1 < rhs -> NotExists
        let mixed = HermitianMatrix::diag(&[0.5, 0.5]);
        let o1 = HermitianMatrix::diag(&[0.9, 0.1]);
        let o2 = HermitianMatrix::diag(&[0.1, 0.9]);
        let c = hilbert_metric_check(&mixed, &mixed, &o1, &o2).unwrap();
        assert_eq!(c.verdict, HilbertVerdict::NotExists);
        assert!((c.lhs - 1.0).abs() < 1e-9);
        assert!(c.rhs > 1.0);
    }
}
