use serde::{Deserialize, Serialize};

use super::AuInstance;
use crate::error::Error;
use crate::linalg::{
    apply_choi, ChoiMatrix, Complex64, ComplexMatrix, HermitianMatrix, PSD_TOL,
};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailedCondition {
    /// rho1' - a rho2' is not PSD.
    FirstDifferenceNotPsd,
    /// rho2' - b rho1' is not PSD.
    SecondDifferenceNotPsd,
    /// The fidelity inequality fails.
    FidelityInequality,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FidelityCriterion {
    Exists {
        a: f64,
        b: f64,
        fidelity_out: f64,
        fidelity_in: f64,
    },
    NotExists {
        failed: FailedCondition,
        a: f64,
        b: f64,
    },
}

/// Channel-extension criterion for qubit-sized inputs (any output
/// dimension): with a = inf(rho1/rho2) and b = inf(rho2/rho1), a channel
/// exists iff rho1' - a rho2' and rho2' - b rho1' are PSD and
/// F(rho1' - a rho2', rho2' - b rho1') >= F(rho1 - a rho2, rho2 - b rho1).
pub fn fidelity_criterion(inst: &AuInstance) -> Result<FidelityCriterion> {
    if inst.din() > 2 {
        return Err(Error::Unsupported(format!(
            "the fidelity criterion is sufficient only for input dimension <= 2, got {}",
            inst.din()
        )));
    }
    let a = inst.rho1.inf_ratio(&inst.rho2, PSD_TOL)?;
    let b = inst.rho2.inf_ratio(&inst.rho1, PSD_TOL)?;
    let d1 = inst.rho1p.sub(&inst.rho2p.scale(a));
    let d2 = inst.rho2p.sub(&inst.rho1p.scale(b));
    if d1.min_eig() < -PSD_TOL {
        return Ok(FidelityCriterion::NotExists {
            failed: FailedCondition::FirstDifferenceNotPsd,
            a,
            b,
        });
    }
    if d2.min_eig() < -PSD_TOL {
        return Ok(FidelityCriterion::NotExists {
            failed: FailedCondition::SecondDifferenceNotPsd,
            a,
            b,
        });
    }
    let fid_out = d1.fidelity(&d2, 1e-7)?;
    let fid_in = inst
        .rho1
        .sub(&inst.rho2.scale(a))
        .fidelity(&inst.rho2.sub(&inst.rho1.scale(b)), 1e-7)?;
    if fid_out >= fid_in - 1e-9 {
        Ok(FidelityCriterion::Exists {
            a,
            b,
            fidelity_out: fid_out,
            fidelity_in: fid_in,
        })
    } else {
        Ok(FidelityCriterion::NotExists {
            failed: FailedCondition::FidelityInequality,
            a,
            b,
        })
    }
}

/// Top eigenvector of a rank-one-within-tolerance PSD matrix, normalized.
fn dominant_vector(h: &HermitianMatrix) -> Result<Vec<Complex64>> {
    let eig = h.eig()?;
    let d = h.dim();
    let top = d - 1;
    let mut v: Vec<Complex64> = (0..d).map(|i| eig.vectors[(i, top)]).collect();
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
    Ok(v)
}

/// vec(M) with row-major flattening; tr_2 of its projector is M M^dag.
fn vec_of(m: &ComplexMatrix) -> Vec<Complex64> {
    m.vec()
}

/// Build a channel achieving rho_i -> rho_i' for a qubit-sized input pair
/// satisfying the fidelity criterion, through the purification isometry.
///
/// The purification phases are fixed so both the purification overlap and
/// the auxiliary overlap are real nonnegative; the construction is then
/// deterministic. The returned Choi matrix is hard-validated: pairs
/// reproduced and trace preservation within 1e-8, PSD within 1e-9.
pub fn construct_qubit_channel(inst: &AuInstance) -> Result<ChoiMatrix> {
    let criterion = fidelity_criterion(inst)?;
    let (a, b) = match criterion {
        FidelityCriterion::Exists { a, b, .. } => (a, b),
        FidelityCriterion::NotExists { failed, .. } => {
            return Err(Error::InvalidArgument(format!(
                "the fidelity criterion fails ({failed:?}); no channel exists"
            )))
        }
    };
    let d = inst.din();
    let dp = inst.dout();

    // equal states: the constant channel X -> rho1' tr[X]
    if inst.rho1.sub(&inst.rho2).trace_norm() <= 1e-9 {
        let choi = ChoiMatrix::new(
            d,
            dp,
            HermitianMatrix::symmetrize(crate::linalg::tensor(
                inst.rho1p.matrix(),
                &ComplexMatrix::identity(d),
            )),
        )?;
        return validate_and_return(inst, choi);
    }

    // pure differences and their unit vectors
    let psi1_m = inst.rho1.sub(&inst.rho2.scale(a)).scale(1.0 / (1.0 - a));
    let psi2_m = inst.rho2.sub(&inst.rho1.scale(b)).scale(1.0 / (1.0 - b));
    let v1 = dominant_vector(&psi1_m)?;
    let mut v2 = dominant_vector(&psi2_m)?;
    // align the phase so <psi1|psi2> is real nonnegative
    let overlap: Complex64 = v1.iter().zip(v2.iter()).map(|(x, y)| x.conj() * y).sum();
    if overlap.norm() > 1e-15 {
        let phase = overlap.conj() / Complex64::new(overlap.norm(), 0.0);
        for z in v2.iter_mut() {
            *z *= phase;
        }
    }
    let g = v1
        .iter()
        .zip(v2.iter())
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .re
        .clamp(-1.0, 1.0);

    // output states of the pure inputs
    let sigma1 = clamp_psd(&inst.rho1p.sub(&inst.rho2p.scale(a)).scale(1.0 / (1.0 - a)))?;
    let sigma2 = clamp_psd(&inst.rho2p.sub(&inst.rho1p.scale(b)).scale(1.0 / (1.0 - b)))?;
    let s1_sqrt = sigma1.sqrt_psd(1e-7)?;
    let s2_sqrt = sigma2.sqrt_psd(1e-7)?;

    // purifications with maximal real overlap: |w2> = vec(sqrt(sigma2) W^dag)
    // where W = U V^dag from the SVD of sqrt(sigma1) sqrt(sigma2)
    let n = s1_sqrt.matrix() * s2_sqrt.matrix();
    let svd = n.svd()?;
    let w_unitary = &svd.u * &svd.v_dagger;
    let w1 = vec_of(s1_sqrt.matrix());
    let w2 = vec_of(&(s2_sqrt.matrix() * &w_unitary.dagger()));
    let fid: f64 = svd.singular_values.iter().sum();

    // auxiliary qubit matching the overlap deficit
    let r = if fid > 1e-12 {
        (g / fid).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let aux1 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let aux2 = [
        Complex64::new(r, 0.0),
        Complex64::new((1.0 - r * r).max(0.0).sqrt(), 0.0),
    ];

    // targets in C^{dp * dp * 2}
    let dim_target = dp * dp * 2;
    let target = |w: &Vec<Complex64>, aux: &[Complex64; 2]| -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); dim_target];
        for (i, wi) in w.iter().enumerate() {
            for (m, am) in aux.iter().enumerate() {
                out[i * 2 + m] = wi * am;
            }
        }
        out
    };
    let t1 = target(&w1, &aux1);
    let t2 = target(&w2, &aux2);

    // V = [t1 t2] G^{-1} [<psi1|; <psi2|]; Gram matrices of (psi_i) and
    // (t_i) agree, so V is an isometry on span{psi_i} = C^2
    let det = 1.0 - g * g;
    if det < 1e-12 {
        return Err(Error::NumericFailure(
            "input states too close to collinear for the isometry construction".into(),
        ));
    }
    // G^{-1} = (1/det) [[1, -g], [-g, 1]]
    let mut v_iso = ComplexMatrix::zeros(dim_target, d);
    for row in 0..dim_target {
        for col in 0..d {
            // coefficients of <psi_i| e_col>
            let c1 = v1[col].conj();
            let c2 = v2[col].conj();
            let alpha1 = (c1 - g * c2) / det;
            let alpha2 = (c2 - g * c1) / det;
            v_iso[(row, col)] = t1[row] * alpha1 + t2[row] * alpha2;
        }
    }

    // T(E_ij) = tr_{2,3}[(V e_i)(V e_j)^dag]
    let action = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
        // m is a matrix unit E_ij in the canonical basis
        let mut out = ComplexMatrix::zeros(dp, dp);
        for i in 0..d {
            for j in 0..d {
                let w = m[(i, j)];
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..dp {
                    for kp in 0..dp {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for l in 0..dp {
                            for aux in 0..2 {
                                let idx_k = (k * dp + l) * 2 + aux;
                                let idx_kp = (kp * dp + l) * 2 + aux;
                                acc += v_iso[(idx_k, i)] * v_iso[(idx_kp, j)].conj();
                            }
                        }
                        out[(k, kp)] += w * acc;
                    }
                }
            }
        }
        Ok(out)
    };
    let choi = crate::linalg::choi_of_map(d, dp, action)?;
    validate_and_return(inst, choi)
}

fn clamp_psd(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = h.eig()?;
    Ok(eig.apply_spectral(|l| l.max(0.0)))
}

fn validate_and_return(inst: &AuInstance, choi: ChoiMatrix) -> Result<ChoiMatrix> {
    for (x, y) in [(&inst.rho1, &inst.rho1p), (&inst.rho2, &inst.rho2p)] {
        let img = apply_choi(&choi, x.matrix())?;
        let dev = (&img - y.matrix()).max_abs();
        if dev > 1e-8 {
            return Err(Error::NumericFailure(format!(
                "constructed channel misses a pair by {dev:.3e}"
            )));
        }
    }
    let tp = choi
        .input_marginal()
        .sub(&HermitianMatrix::identity(inst.din()))
        .op_norm();
    if tp > 1e-8 {
        return Err(Error::NumericFailure(format!(
            "constructed channel violates trace preservation by {tp:.3e}"
        )));
    }
    if choi.hermitian().min_eig() < -1e-9 {
        return Err(Error::NumericFailure(
            "constructed Choi matrix is not PSD".into(),
        ));
    }
    Ok(choi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::{psi0, psi1};

    #[test]
    fn orthogonal_pure_inputs_reach_anything() {
        // a = b = 0; F(out) = F(I/2, I/2) = 1 >= F(psi0, psi1) = 0
        let mixed = HermitianMatrix::diag(&[0.5, 0.5]);
        let inst = AuInstance::new(psi0(), psi1(), mixed.clone(), mixed).unwrap();
        match fidelity_criterion(&inst).unwrap() {
            FidelityCriterion::Exists { a, b, .. } => {
                assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
            }
            other => panic!("expected Exists, got {other:?}"),
        }
        let choi = construct_qubit_channel(&inst).unwrap();
        assert_eq!(choi.dout(), 2);
    }

    #[test]
    fn identical_inputs_with_distinct_outputs_fail() {
        let mixed = HermitianMatrix::diag(&[0.5, 0.5]);
        let inst = AuInstance::new(mixed.clone(), mixed, psi0(), psi1()).unwrap();
        match fidelity_criterion(&inst).unwrap() {
            FidelityCriterion::NotExists { failed, .. } => {
                assert!(matches!(
                    failed,
                    FailedCondition::FirstDifferenceNotPsd
                        | FailedCondition::SecondDifferenceNotPsd
                ));
            }
            other => panic!("expected NotExists, got {other:?}"),
        }
    }

    #[test]
    fn constant_channel_branch_validates() {
        let mixed = HermitianMatrix::diag(&[0.5, 0.5]);
        let out = HermitianMatrix::diag(&[0.3, 0.7]);
        let inst = AuInstance::new(mixed.clone(), mixed, out.clone(), out).unwrap();
        let choi = construct_qubit_channel(&inst).unwrap();
        let img = apply_choi(&choi, HermitianMatrix::diag(&[0.9, 0.1]).matrix()).unwrap();
        // constant channel: every state maps to the fixed output
        assert!((&img - inst.rho1p.matrix()).max_abs() < 1e-9);
    }

    #[test]
    fn random_qubit_instances_construct_when_criterion_holds() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(777);
        let mut built = 0;
        for _ in 0..40 {
            let mut rand_state = |dim: usize| {
                let a = ComplexMatrix::from_fn(dim, dim, |_, _| {
                    Complex64::new(rng.gen(), rng.gen())
                });
                let aa = HermitianMatrix::symmetrize(&a * &a.dagger());
                aa.scale(1.0 / aa.trace())
            };
            let inst = AuInstance::new(
                rand_state(2),
                rand_state(2),
                rand_state(3),
                rand_state(3),
            )
            .unwrap();
            if let FidelityCriterion::Exists { .. } = fidelity_criterion(&inst).unwrap() {
                construct_qubit_channel(&inst).unwrap();
                built += 1;
            }
        }
        assert!(built > 0, "no constructible instance sampled");
    }
}
