use serde::{Deserialize, Serialize};

use super::polytope::{polytope_extremes, ClassicalPolytope, PolytopeVertex};
use super::simdiag::simultaneous_diagonalize;
use super::COMMUTE_TOL;
use crate::cpcheck::{
    exact_cp_extension, gamma_sdp, CpStatus, ExactExtension, MapSpec, Witness, WitnessCheck,
};
use crate::error::Error;
use crate::extend::{channel_extension, ChannelExtension};
use crate::linalg::{
    apply_choi, choi_of_map, ChoiMatrix, Complex64, ComplexMatrix, HermitianMatrix,
};
use crate::solver::Tolerances;
use crate::Result;

/// Positivity of a map with commuting inputs, decided on the polytope
/// vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CommutingPositivity {
    Positive {
        polytope: ClassicalPolytope,
    },
    NotPositive {
        vertex: PolytopeVertex,
        image_min_eig: f64,
    },
}

/// Diagonalize the commuting inputs and return (basis, probability
/// vectors).
fn diagonalize_inputs(spec: &MapSpec) -> Result<(ComplexMatrix, Vec<Vec<f64>>)> {
    let inputs: Vec<HermitianMatrix> = spec.pairs().iter().map(|(x, _)| x.clone()).collect();
    // normalize to unit trace for the commutation tolerance; inputs here
    // are states so the traces are positive
    let normalized: Vec<HermitianMatrix> = inputs
        .iter()
        .map(|x| {
            let t = x.trace();
            if t.abs() > 1e-12 {
                x.scale(1.0 / t)
            } else {
                x.clone()
            }
        })
        .collect();
    let u = simultaneous_diagonalize(&normalized, COMMUTE_TOL)?;
    let udag = u.dagger();
    let mut vectors = Vec::with_capacity(inputs.len());
    for x in &inputs {
        let rot = &(&udag * x.matrix()) * &u;
        let mut v = Vec::with_capacity(spec.din());
        for i in 0..spec.din() {
            v.push(rot[(i, i)].re.max(0.0));
        }
        // renormalize away roundoff so downstream validation is exact
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-12 && s > 0.0 {
            for e in v.iter_mut() {
                *e /= s;
            }
        }
        vectors.push(v);
    }
    Ok((u, vectors))
}

/// Positivity check for commuting inputs: the map is positive iff every
/// vertex of the state polytope has a PSD image.
pub fn commuting_domain_positive(spec: &MapSpec, tols: &Tolerances) -> Result<CommutingPositivity> {
    let (_u, vectors) = diagonalize_inputs(spec)?;
    let polytope = polytope_extremes(&vectors)?;
    for vertex in &polytope.extremes {
        let mut image = HermitianMatrix::zeros(spec.dout());
        for (c, (_, y)) in vertex.coeffs.iter().zip(spec.pairs()) {
            image = image.add(&y.scale(*c));
        }
        let min_eig = image.min_eig();
        if min_eig < -tols.psd_tol {
            return Ok(CommutingPositivity::NotPositive {
                vertex: vertex.clone(),
                image_min_eig: min_eig,
            });
        }
    }
    Ok(CommutingPositivity::Positive { polytope })
}

/// Outcome of the commuting-range extension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CommutingRangeExtension {
    Exists(ChoiMatrix),
    NotCP {
        witness: Witness,
        witness_check: WitnessCheck,
    },
}

/// Completely positive extension for maps whose outputs commute: here
/// positivity already implies complete positivity, the extension is built
/// by the feasibility system, and composing with the pinching onto the
/// common output eigenbasis keeps the range commutative.
pub fn commuting_range_cp_extension(
    spec: &MapSpec,
    tols: &Tolerances,
) -> Result<CommutingRangeExtension> {
    // inputs must be states
    for (i, (x, _)) in spec.pairs().iter().enumerate() {
        if x.min_eig() < -tols.psd_tol || (x.trace() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "input {i} is not a density matrix"
            )));
        }
    }
    // outputs must commute
    let outputs: Vec<HermitianMatrix> = spec.pairs().iter().map(|(_, y)| y.clone()).collect();
    let out_scale = outputs.iter().map(|y| y.op_norm()).fold(0.0f64, f64::max).max(1e-300);
    let normalized: Vec<HermitianMatrix> =
        outputs.iter().map(|y| y.scale(1.0 / out_scale)).collect();
    let u_out = simultaneous_diagonalize(&normalized, COMMUTE_TOL)
        .map_err(|e| match e {
            Error::NonCommuting(v) => Error::NonCommutingRange(v),
            other => other,
        })?;

    let verdict = gamma_sdp(spec, tols)?;
    match verdict.status {
        CpStatus::NotCP => {
            let witness = verdict.witness.expect("NotCP carries a witness");
            let witness_check = verdict.witness_check.expect("NotCP carries a check");
            return Ok(CommutingRangeExtension::NotCP {
                witness,
                witness_check,
            });
        }
        CpStatus::Marginal => {
            return Err(Error::NumericFailure(
                "complete positivity undecided at the current tolerances".into(),
            ))
        }
        CpStatus::CompletelyPositive => {}
    }

    // the inputs span a space of density matrices and the map is CP, so an
    // exact extension exists; materialize it
    let choi = match exact_cp_extension(spec, tols)? {
        ExactExtension::Exists(c) => c,
        other => {
            return Err(Error::NumericFailure(format!(
                "extension guaranteed but the feasibility system returned {other:?}"
            )))
        }
    };
    // pinch the output side onto the common eigenbasis
    let din = spec.din();
    let dout = spec.dout();
    let mut pinched = ComplexMatrix::zeros(din * dout, din * dout);
    for k in 0..dout {
        let col: Vec<Complex64> = (0..dout).map(|r| u_out[(r, k)]).collect();
        let pk = ComplexMatrix::outer(&col, &col);
        let proj = crate::linalg::tensor(&pk, &ComplexMatrix::identity(din));
        pinched = &pinched + &(&(&proj * choi.hermitian().matrix()) * &proj);
    }
    let pinched_choi = ChoiMatrix::new(din, dout, HermitianMatrix::symmetrize(pinched))?;
    // the pinching leaves the commuting outputs invariant; re-validate
    for (x, y) in spec.pairs() {
        let img = apply_choi(&pinched_choi, x.matrix())?;
        if (&img - y.matrix()).max_abs() > 1e-6 * (1.0 + out_scale) {
            return Err(Error::NumericFailure(
                "pinched extension failed re-validation".into(),
            ));
        }
    }
    Ok(CommutingRangeExtension::Exists(pinched_choi))
}

/// Outcome of the commuting-domain extension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CommutingDomainExtension {
    Exists(ChoiMatrix),
    NotExists {
        witness: Witness,
        witness_check: WitnessCheck,
    },
    /// Outside the dimensions with a constructive guarantee and the SDP
    /// could not certify either way.
    OutOfGuaranteedRange,
}

/// Completely positive (optionally trace-preserving) extension for maps
/// with commuting inputs.
///
/// Inside the guaranteed dimensions the extension is assembled explicitly
/// as T ∘ Π ∘ D with D the pinching onto the common input eigenbasis and Π
/// a positive projection onto the state polytope; outside, the feasibility
/// SDP decides.
pub fn commuting_domain_extension(
    spec: &MapSpec,
    trace_preserving: bool,
    tols: &Tolerances,
) -> Result<CommutingDomainExtension> {
    let positivity = commuting_domain_positive(spec, tols)?;
    let polytope = match positivity {
        CommutingPositivity::Positive { polytope } => polytope,
        CommutingPositivity::NotPositive { image_min_eig, .. } => {
            return Err(Error::InvalidArgument(format!(
                "the map is not positive on its commuting domain (vertex image min eigenvalue \
                 {image_min_eig:.3e}); no positive extension can exist"
            )))
        }
    };
    let (u, vectors) = diagonalize_inputs(spec)?;
    let d = spec.din();

    // coordinates that vanish on the whole polytope can be dropped; the
    // projection sends them to zero (only relevant in the non-TP case)
    let live: Vec<usize> = (0..d)
        .filter(|&j| vectors.iter().any(|v| v[j] > 1e-12))
        .collect();
    let dim_s = {
        // affine rank + 1 = linear rank of the probability vectors
        let mut rank = 0;
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        for v in &vectors {
            let mut w = v.clone();
            for q in &ortho {
                let proj: f64 = q.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                for (wj, qj) in w.iter_mut().zip(q.iter()) {
                    *wj -= proj * qj;
                }
            }
            let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-10 {
                ortho.push(w.iter().map(|x| x / norm).collect());
                rank += 1;
            }
        }
        rank
    };
    let d_live = live.len();

    // Π in the diagonal picture: image of each live basis vector as an
    // affine combination of the rho_i (so its T-image is known); dead
    // coordinates map to zero.
    let pi_columns: Option<Vec<Option<Vec<f64>>>> = if dim_s == d_live {
        // Π = identity on live coordinates: e_j is in the span, recover
        // its coefficients by least squares over the probability vectors
        let mut cols = vec![None; d];
        for &j in &live {
            let a = nalgebra::DMatrix::<f64>::from_fn(d, vectors.len(), |r, c| vectors[c][r]);
            let b = nalgebra::DVector::<f64>::from_fn(d, |r, _| if r == j { 1.0 } else { 0.0 });
            let svd = a.clone().svd(true, true);
            let coeffs = svd
                .solve(&b, 1e-12)
                .map_err(|e| Error::NumericFailure(e.to_string()))?;
            if (&a * &coeffs - &b).amax() > 1e-9 {
                return Err(Error::NumericFailure(
                    "full-span case failed coefficient recovery".into(),
                ));
            }
            cols[j] = Some(coeffs.iter().copied().collect());
        }
        Some(cols)
    } else if dim_s == 1 {
        // Π(X) = tr[X] rho_1: every basis vector maps to rho_1
        let coeffs = {
            let mut c = vec![0.0; vectors.len()];
            c[0] = 1.0;
            c
        };
        Some((0..d).map(|_| Some(coeffs.clone())).collect())
    } else if !trace_preserving && d_live == 3 && dim_s == 2 && polytope.extremes.len() == 2 {
        // boundary-segment projection: order the live coordinates so that
        // vertex 1 = (p, 1-p, 0) and vertex 2 = (q, 0, 1-q), then
        // e_1 -> 0, e_2 -> vertex1/(1-p), e_3 -> vertex2/(1-q)
        build_segment_projection(&polytope, &live, d, vectors.len())?
    } else {
        None
    };

    if let Some(cols) = pi_columns {
        // T~(E_ij) via the pinching D then Π then T
        let y_images: Vec<&HermitianMatrix> = spec.pairs().iter().map(|(_, y)| y).collect();
        let dout = spec.dout();
        let action = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
            // coefficient of each input-basis projector in U-basis
            let udag_m_u = &(&u.dagger() * m) * &u;
            let mut out = ComplexMatrix::zeros(dout, dout);
            for (j, col) in cols.iter().enumerate() {
                let w = udag_m_u[(j, j)];
                if let Some(coeffs) = col {
                    // T(Pi(e_j)) = sum_i coeffs_i Y_i
                    for (c, y) in coeffs.iter().zip(y_images.iter()) {
                        out = &out + &y.matrix().scale(w * Complex64::new(*c, 0.0));
                    }
                }
            }
            Ok(out)
        };
        let choi = choi_of_map(d, dout, action)?;
        // hard validation: pairs reproduced, CP, and TP when requested
        for (x, y) in spec.pairs() {
            let img = apply_choi(&choi, x.matrix())?;
            if (&img - y.matrix()).max_abs() > 1e-9 * (1.0 + y.op_norm()) {
                return Err(Error::NumericFailure(
                    "constructed extension failed pair re-validation".into(),
                ));
            }
        }
        if choi.hermitian().min_eig() < -tols.psd_tol {
            return Err(Error::NumericFailure(
                "constructed extension is not completely positive".into(),
            ));
        }
        if trace_preserving {
            let defect = choi
                .input_marginal()
                .sub(&HermitianMatrix::identity(d))
                .op_norm();
            if defect > 1e-9 * (1.0 + d as f64) {
                return Err(Error::NumericFailure(format!(
                    "constructed extension is not trace-preserving (defect {defect:.3e})"
                )));
            }
        }
        return Ok(CommutingDomainExtension::Exists(choi));
    }

    // outside the constructive range: the SDP decides
    if trace_preserving {
        match channel_extension(spec, tols)? {
            ChannelExtension::Exists(c) => Ok(CommutingDomainExtension::Exists(c)),
            ChannelExtension::NotExists {
                witness,
                witness_check,
            } => Ok(CommutingDomainExtension::NotExists {
                witness,
                witness_check,
            }),
        }
    } else {
        match exact_cp_extension(spec, tols)? {
            ExactExtension::Exists(c) => Ok(CommutingDomainExtension::Exists(c)),
            ExactExtension::NotExists {
                witness: Some(witness),
                witness_check: Some(witness_check),
                ..
            } if witness_check.valid => Ok(CommutingDomainExtension::NotExists {
                witness,
                witness_check,
            }),
            _ => Ok(CommutingDomainExtension::OutOfGuaranteedRange),
        }
    }
}

/// The two-vertex boundary projection: returns per-coordinate images as
/// affine coefficient vectors over the input states.
fn build_segment_projection(
    polytope: &ClassicalPolytope,
    live: &[usize],
    d: usize,
    n_states: usize,
) -> Result<Option<Vec<Option<Vec<f64>>>>> {
    let v1 = &polytope.extremes[0];
    let v2 = &polytope.extremes[1];
    // search the vertex orders and live-coordinate roles: slot1 carries
    // both vertices, slot2 only vertex A, slot3 only vertex B
    for (a, bv) in [(v1, v2), (v2, v1)] {
        for &s1 in live {
            for &s2 in live {
                if s2 == s1 {
                    continue;
                }
                for &s3 in live {
                    if s3 == s1 || s3 == s2 {
                        continue;
                    }
                    let p = a.point[s1];
                    let q = bv.point[s1];
                    let ok = (a.point[s3].abs() < 1e-10)
                        && (bv.point[s2].abs() < 1e-10)
                        && (a.point[s2] > 1e-10)
                        && (bv.point[s3] > 1e-10)
                        && ((a.point[s2] - (1.0 - p)).abs() < 1e-9)
                        && ((bv.point[s3] - (1.0 - q)).abs() < 1e-9);
                    if !ok {
                        continue;
                    }
                    let mut cols: Vec<Option<Vec<f64>>> = vec![None; d];
                    cols[s1] = Some(vec![0.0; n_states]);
                    cols[s2] = Some(a.coeffs.iter().map(|c| c / (1.0 - p)).collect());
                    cols[s3] = Some(bv.coeffs.iter().map(|c| c / (1.0 - q)).collect());
                    return Ok(Some(cols));
                }
            }
        }
    }
    Ok(None)
}
