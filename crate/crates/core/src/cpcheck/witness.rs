use serde::{Deserialize, Serialize};

use super::spec::MapSpec;
use crate::linalg::{tensor, ComplexMatrix, HermitianMatrix};

/// Dual certificate of non-complete-positivity or non-extendability:
/// matrices (H_0; H_1, ..., H_N) with
///
///   H_0 (x) 1 + sum_i X_i (x) H_i >= 0   and
///   tr[H_0] + sum_i tr[Y_i^T H_i] < 0,
///
/// the H_0 part appearing only for trace-side (channel) witnesses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub h0: Option<HermitianMatrix>,
    pub h: Vec<HermitianMatrix>,
}

/// Result of independently re-checking a witness against the map data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub valid: bool,
    /// min eigenvalue of the witness LMI.
    pub lmi_min_eig: f64,
    /// tr[H_0] + sum_i tr[Y_i^T H_i].
    pub objective: f64,
    /// max_i ||H_i||.
    pub max_h_norm: f64,
    /// ||H_0||_1 when present.
    pub h0_trace_norm: Option<f64>,
}

/// Re-validate a witness with plain eigenvalue arithmetic.
///
/// `weight_w` bounds ||H_0||_1 for trace-side witnesses; pass the weight
/// used in the trace-preserving program (1 by convention for certificates
/// of the hard-equality channel system).
pub fn validate_witness(
    spec: &MapSpec,
    witness: &Witness,
    weight_w: f64,
    psd_tol: f64,
    witness_margin: f64,
) -> WitnessCheck {
    let din = spec.din();
    let dout = spec.dout();
    let mut lmi = ComplexMatrix::zeros(din * dout, din * dout);
    if let Some(h0) = &witness.h0 {
        lmi = &lmi + &tensor(h0.matrix(), &ComplexMatrix::identity(dout));
    }
    for ((x, _), h) in spec.pairs().iter().zip(witness.h.iter()) {
        lmi = &lmi + &tensor(x.matrix(), h.matrix());
    }
    let lmi_min_eig = HermitianMatrix::symmetrize(lmi).min_eig();

    let mut objective = 0.0;
    if let Some(h0) = &witness.h0 {
        objective += h0.trace();
    }
    for ((_, y), h) in spec.pairs().iter().zip(witness.h.iter()) {
        objective += y.transpose().inner(h);
    }
    let max_h_norm = witness.h.iter().map(|h| h.op_norm()).fold(0.0, f64::max);
    let h0_trace_norm = witness.h0.as_ref().map(|h0| h0.trace_norm());

    let norms_ok = max_h_norm <= 1.0 + psd_tol
        && h0_trace_norm.map(|t| t <= weight_w + psd_tol).unwrap_or(true);
    WitnessCheck {
        valid: lmi_min_eig >= -psd_tol && objective <= -witness_margin && norms_ok,
        lmi_min_eig,
        objective,
        max_h_norm,
        h0_trace_norm,
    }
}

/// Rescale a witness so it satisfies the compactification bounds
/// max_i ||H_i|| <= 1 and ||H_0||_1 <= w with equality on the binding one.
pub fn normalize_witness(witness: &Witness, weight_w: f64) -> Witness {
    let max_h = witness.h.iter().map(|h| h.op_norm()).fold(0.0f64, f64::max);
    let h0_scale = witness
        .h0
        .as_ref()
        .map(|h0| h0.trace_norm() / weight_w)
        .unwrap_or(0.0);
    let denom = max_h.max(h0_scale);
    if denom <= 1e-300 {
        return witness.clone();
    }
    let f = 1.0 / denom;
    Witness {
        h0: witness.h0.as_ref().map(|h0| h0.scale(f)),
        h: witness.h.iter().map(|h| h.scale(f)).collect(),
    }
}
