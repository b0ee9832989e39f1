use serde::{Deserialize, Serialize};

use super::{AuInstance, AU_TOL};
use crate::linalg::{rank_tol, HermitianMatrix};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuVerdict {
    Holds,
    Fails,
    Marginal,
}

/// Result of evaluating the two-state trace-norm condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuOutcome {
    pub verdict: AuVerdict,
    /// min over p of ||p rho1 - (1-p) rho2||_1 - ||p rho1' - (1-p) rho2'||_1.
    pub min_f: f64,
    /// Location of the minimum in the compactified parameter p in [0,1].
    pub argmin_p: f64,
    /// The corresponding t = (1-p)/p (infinite at p = 0).
    pub argmin_t: f64,
}

fn f_at(inst: &AuInstance, p: f64) -> f64 {
    let lhs = inst
        .rho1
        .scale(p)
        .sub(&inst.rho2.scale(1.0 - p))
        .trace_norm();
    let rhs = inst
        .rho1p
        .scale(p)
        .sub(&inst.rho2p.scale(1.0 - p))
        .trace_norm();
    lhs - rhs
}

/// Generalized eigenvalues s of the pencil (a, b) (i.e. det(a - s b) = 0 on
/// the common support), mapped to breakpoints p = s/(1+s).
fn pencil_breakpoints(a: &HermitianMatrix, b: &HermitianMatrix, out: &mut Vec<f64>) {
    let cut = rank_tol(b.dim(), b.op_norm());
    if let Ok(pinv) = b.pinv_sqrt(cut) {
        let sandwich =
            HermitianMatrix::symmetrize(&(pinv.matrix() * a.matrix()) * pinv.matrix());
        if let Ok(eigs) = sandwich.eigenvalues() {
            for s in eigs {
                if s.is_finite() && s >= 0.0 {
                    out.push(s / (1.0 + s));
                    // the reciprocal pencil contributes the mirrored point
                    if s > 0.0 {
                        out.push(1.0 / (1.0 + s));
                    }
                }
            }
        }
    }
}

/// Evaluate the condition on a 512-point grid over p in [0,1], refined at
/// the pencil breakpoints of both the input and output pairs and polished
/// locally around the best point. The t <= 0 half-line holds with equality
/// automatically and is skipped.
pub fn au_condition(inst: &AuInstance) -> Result<AuOutcome> {
    let mut candidates: Vec<f64> = (0..=512).map(|k| k as f64 / 512.0).collect();
    pencil_breakpoints(&inst.rho1, &inst.rho2, &mut candidates);
    pencil_breakpoints(&inst.rho2, &inst.rho1, &mut candidates);
    pencil_breakpoints(&inst.rho1p, &inst.rho2p, &mut candidates);
    pencil_breakpoints(&inst.rho2p, &inst.rho1p, &mut candidates);
    candidates.retain(|p| (0.0..=1.0).contains(p));

    let mut best_p = 0.0;
    let mut best = f64::INFINITY;
    for &p in &candidates {
        let v = f_at(inst, p);
        if v < best {
            best = v;
            best_p = p;
        }
    }
    // golden-section polish on the bracket around the best grid point
    let step = 1.0 / 512.0;
    let (mut lo, mut hi) = ((best_p - step).max(0.0), (best_p + step).min(1.0));
    let phi = 0.5 * (3.0 - 5.0f64.sqrt());
    for _ in 0..60 {
        let m1 = lo + phi * (hi - lo);
        let m2 = hi - phi * (hi - lo);
        if f_at(inst, m1) <= f_at(inst, m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let polished = 0.5 * (lo + hi);
    let v = f_at(inst, polished);
    if v < best {
        best = v;
        best_p = polished;
    }

    let verdict = if best < -AU_TOL {
        AuVerdict::Fails
    } else if best >= -AU_TOL * 1e-3 {
        AuVerdict::Holds
    } else {
        AuVerdict::Marginal
    };
    Ok(AuOutcome {
        verdict,
        min_f: best,
        argmin_p: best_p,
        argmin_t: if best_p > 0.0 {
            (1.0 - best_p) / best_p
        } else {
            f64::INFINITY
        },
    })
}
