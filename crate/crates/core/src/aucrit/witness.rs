use serde::{Deserialize, Serialize};

use super::AuInstance;
use crate::cpcheck::WITNESS_MARGIN;
use crate::error::Error;
use crate::linalg::{tensor, ComplexMatrix, HermitianMatrix};
use crate::Result;

/// Certificate that a two-state instance admits no channel: matrices
/// (H0, H1, H2) with H0 (x) 1 + rho1 (x) H1 + rho2 (x) H2 >= 0 while the
/// channel-side pairing tr[H0] + tr[rho1' H1^T] + tr[rho2' H2^T] stays
/// below a negative bound, robustly so under the shift H0 -> H0 + eps*1
/// over the recorded range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuWitnessPackage {
    pub h0: HermitianMatrix,
    pub h1: HermitianMatrix,
    pub h2: HermitianMatrix,
    pub objective_bound: f64,
    pub eps_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum AuWitnessVerdict {
    Valid {
        min_eig_m: f64,
        objective: f64,
    },
    Invalid {
        reason: String,
        min_eig_m: f64,
        objective: f64,
    },
}

impl AuWitnessVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, AuWitnessVerdict::Valid { .. })
    }
}

/// Re-check a witness package against an instance with plain eigenvalue
/// arithmetic, including the eps-shifted variants at the given sample
/// points.
pub fn verify_au_witness(
    inst: &AuInstance,
    pkg: &AuWitnessPackage,
    eps_samples: &[f64],
    psd_tol: f64,
) -> Result<AuWitnessVerdict> {
    let d = inst.din();
    let dp = inst.dout();
    if pkg.h0.dim() != d || pkg.h1.dim() != dp || pkg.h2.dim() != dp {
        return Err(Error::DimensionMismatch(
            "witness dimensions do not match the instance".into(),
        ));
    }
    let one_out = ComplexMatrix::identity(dp);
    let m = HermitianMatrix::symmetrize(
        &(&tensor(pkg.h0.matrix(), &one_out)
            + &tensor(inst.rho1.matrix(), pkg.h1.matrix()))
            + &tensor(inst.rho2.matrix(), pkg.h2.matrix()),
    );
    let min_eig_m = m.min_eig();
    let objective = pkg.h0.trace()
        + inst.rho1p.inner(&pkg.h1.transpose())
        + inst.rho2p.inner(&pkg.h2.transpose());

    let fail = |reason: String| AuWitnessVerdict::Invalid {
        reason,
        min_eig_m,
        objective,
    };
    if min_eig_m < -psd_tol {
        return Ok(fail(format!("witness LMI is not PSD (min eig {min_eig_m:.3e})")));
    }
    if pkg.objective_bound >= -WITNESS_MARGIN {
        return Ok(fail(format!(
            "objective bound {} is not safely negative",
            pkg.objective_bound
        )));
    }
    if objective > pkg.objective_bound {
        return Ok(fail(format!(
            "objective {objective:.9} exceeds the recorded bound {}",
            pkg.objective_bound
        )));
    }
    for &eps in eps_samples {
        if eps < 0.0 {
            return Ok(fail(format!("negative shift {eps}")));
        }
        if let Some((lo, hi)) = pkg.eps_range {
            if eps < lo || eps > hi {
                return Ok(fail(format!(
                    "shift {eps} outside the recorded range ({lo}, {hi})"
                )));
            }
        }
        // H0 + eps*1 adds eps to every eigenvalue of M and eps*d to the
        // objective; both are re-measured rather than inferred
        let shifted_obj = objective + eps * d as f64;
        if shifted_obj >= -WITNESS_MARGIN {
            return Ok(fail(format!(
                "objective at shift {eps} is {shifted_obj:.6}, no longer negative"
            )));
        }
        let m_eps = HermitianMatrix::symmetrize(
            &m.matrix().clone() + &ComplexMatrix::identity(d * dp).scale_re(eps),
        );
        if m_eps.min_eig() < -psd_tol {
            return Ok(fail(format!("shifted LMI at {eps} lost positivity")));
        }
    }
    Ok(AuWitnessVerdict::Valid {
        min_eig_m,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_positive_witness_is_invalid() {
        let mixed3 = HermitianMatrix::diag(&[1.0 / 3.0; 3]);
        let inst = AuInstance::new(
            mixed3.clone(),
            mixed3.clone(),
            mixed3.clone(),
            mixed3.clone(),
        )
        .unwrap();
        let pkg = AuWitnessPackage {
            h0: HermitianMatrix::identity(3),
            h1: HermitianMatrix::zeros(3),
            h2: HermitianMatrix::zeros(3),
            objective_bound: -1.0,
            eps_range: None,
        };
        let v = verify_au_witness(&inst, &pkg, &[], 1e-9).unwrap();
        assert!(!v.is_valid());
    }
}
