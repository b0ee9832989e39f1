//! Named problem instances shipped with the toolkit.
//!
//! These are the worked examples exercised by the acceptance suite and
//! exposed through the CLI for reproduction scripts: maps that are
//! completely positive yet admit no exact extension, conjugations that
//! expand a spin observable past channel reach, Pauli permutations with
//! known minimal unital scales, classical rescaling tasks, Abelian-domain
//! fixtures, and the transpose instances with their infeasibility
//! witnesses.

use crate::aucrit::{AuInstance, AuWitnessPackage};
use crate::linalg::{pauli, Complex64, ComplexMatrix, HermitianMatrix};
use crate::Result;

/// CP on span{|0><0|, sigma_x} but with no completely positive extension:
/// |0><0| -> |0><0|, sigma_x -> sigma_z.
pub fn cp_no_extension_pairs() -> Vec<(HermitianMatrix, HermitianMatrix)> {
    vec![
        (pauli::psi0(), pauli::psi0()),
        (pauli::sigma_x(), pauli::sigma_z()),
    ]
}

/// Kraus pair of the approximating family T_eps: K1 = [[1,1/2],[0,0]],
/// K2 = [[0,0],[eps,-1/(2 eps)]]. As eps -> 0 the family converges on the
/// span above while its dual unit image diverges.
pub fn kraus_family(eps: f64) -> (ComplexMatrix, ComplexMatrix) {
    let k1 = ComplexMatrix::from_real_rows(&[vec![1.0, 0.5], vec![0.0, 0.0]]).unwrap();
    let k2 = ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![eps, -0.5 / eps]]).unwrap();
    (k1, k2)
}

/// The positive conjugation parameter of the expanding-conjugation
/// fixture.
pub fn expanding_conjugation_k() -> HermitianMatrix {
    HermitianMatrix::new(
        ComplexMatrix::from_real_rows(&[vec![0.9, 1.0], vec![1.0, 2.4]]).unwrap(),
    )
    .unwrap()
}

/// Trace-preserving completely positive map on a span of strictly positive
/// operators which nevertheless has no channel extension: rho ->
/// K^{1/2} rho K^{1/2} and sigma_y -> sqrt(det K) sigma_y at
/// rho = diag(14/15, 1/15).
pub fn expanding_conjugation_pairs() -> Result<Vec<(HermitianMatrix, HermitianMatrix)>> {
    let rho = HermitianMatrix::diag(&[14.0 / 15.0, 1.0 / 15.0]);
    let k = expanding_conjugation_k();
    let k_sqrt = k.sqrt_psd(1e-12)?;
    let conj_rho =
        HermitianMatrix::symmetrize(&(k_sqrt.matrix() * rho.matrix()) * k_sqrt.matrix());
    // det K = 1.16; the conjugation scales sigma_y by sqrt(det K)
    let det_k: f64 = 0.9 * 2.4 - 1.0;
    Ok(vec![
        (rho, conj_rho),
        (pauli::sigma_y(), pauli::sigma_y().scale(det_k.sqrt())),
    ])
}

/// Expansion factor ||T(sigma_y)||_1 / ||sigma_y||_1 of the fixture above.
pub fn expanding_conjugation_factor() -> f64 {
    (1044.0f64 / 900.0).sqrt()
}

/// Pauli swap x <-> y (z fixed): extendable, but no unital extension below
/// scale 3.
pub fn pauli_swap_pairs() -> Vec<(HermitianMatrix, HermitianMatrix)> {
    vec![
        (pauli::sigma_x(), pauli::sigma_y()),
        (pauli::sigma_y(), pauli::sigma_x()),
        (pauli::sigma_z(), pauli::sigma_z()),
    ]
}

/// Cyclic Pauli permutation x -> y -> z -> x: implemented by a unitary
/// conjugation, minimal unital scale 1.
pub fn pauli_cycle_pairs() -> Vec<(HermitianMatrix, HermitianMatrix)> {
    vec![
        (pauli::sigma_x(), pauli::sigma_y()),
        (pauli::sigma_y(), pauli::sigma_z()),
        (pauli::sigma_z(), pauli::sigma_x()),
    ]
}

/// Classical rescaling task with unequal optimal success probabilities
/// (2/3, 3/5): diag(1/3,2/3) -> diag(1/2,1/2), diag(1/5,4/5) ->
/// diag(1/3,2/3).
pub fn classical_rescale_pairs() -> Vec<(HermitianMatrix, HermitianMatrix)> {
    vec![
        (
            HermitianMatrix::diag(&[1.0 / 3.0, 2.0 / 3.0]),
            HermitianMatrix::diag(&[0.5, 0.5]),
        ),
        (
            HermitianMatrix::diag(&[1.0 / 5.0, 4.0 / 5.0]),
            HermitianMatrix::diag(&[1.0 / 3.0, 2.0 / 3.0]),
        ),
    ]
}

/// Abelian operator system in dimension 4 mapped to non-commuting pure
/// states; positive on the polytope (the fourth vertex lands on |-><-|)
/// yet not completely positive.
pub fn abelian_three_state_pairs() -> Vec<(HermitianMatrix, HermitianMatrix)> {
    let plus = HermitianMatrix::new(
        ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(),
    )
    .unwrap();
    vec![
        (HermitianMatrix::diag(&[0.5, 0.5, 0.0, 0.0]), pauli::psi0()),
        (HermitianMatrix::diag(&[0.0, 0.5, 0.5, 0.0]), plus),
        (HermitianMatrix::diag(&[0.0, 0.0, 0.5, 0.5]), pauli::psi1()),
    ]
}

/// The fourth polytope vertex image of the fixture above: |-><-|.
pub fn abelian_three_state_fourth_image() -> HermitianMatrix {
    HermitianMatrix::new(
        ComplexMatrix::from_real_rows(&[vec![0.5, -0.5], vec![-0.5, 0.5]]).unwrap(),
    )
    .unwrap()
}

/// Two commuting half-mixtures sent to orthogonal pure states: positive
/// and trace-preserving on the span, but with no positive trace-preserving
/// extension.
pub fn abelian_two_state_pairs() -> Vec<(HermitianMatrix, HermitianMatrix)> {
    vec![
        (HermitianMatrix::diag(&[0.5, 0.5, 0.0]), pauli::psi0()),
        (HermitianMatrix::diag(&[0.5, 0.0, 0.5]), pauli::psi1()),
    ]
}

/// Qutrit pair whose transposes satisfy the trace-norm condition while no
/// channel maps one pair to the other.
pub fn transpose_pair_qutrit() -> Result<AuInstance> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let s = 1.0 / 6.0;
    let rho1 = HermitianMatrix::new(
        ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)],
        ])?
        .scale_re(s),
    )?;
    let rho2 = HermitianMatrix::new(
        ComplexMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)],
        ])?
        .scale_re(s),
    )?;
    AuInstance::new(
        rho1.clone(),
        rho2.clone(),
        rho1.transpose(),
        rho2.transpose(),
    )
}

/// The shipped infeasibility witness for the transpose instance: the
/// starred lower triangles are the Hermitian completions of the recorded
/// upper triangles, the objective is bounded by -2.2, and the package
/// stays valid under H0 -> H0 + eps*1 for eps in (0, 0.7).
pub fn transpose_witness_package() -> Result<AuWitnessPackage> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let h0 = HermitianMatrix::new(ComplexMatrix::from_rows(&[
        vec![c(2.4, 0.0), c(-5.3, 0.0), c(0.0, 0.0)],
        vec![c(-5.3, 0.0), c(26.7, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(28.8, 0.0)],
    ])?)?;
    let h1 = HermitianMatrix::new(ComplexMatrix::from_rows(&[
        vec![c(10.6, 0.0), c(-25.0, 3.2), c(44.0, 33.4)],
        vec![c(-25.0, -3.2), c(54.6, 0.0), c(-174.4, -146.2)],
        vec![c(44.0, -33.4), c(-174.4, 146.2), c(44.0, 0.0)],
    ])?)?;
    let h2 = HermitianMatrix::new(ComplexMatrix::from_rows(&[
        vec![c(10.6, 0.0), c(-25.0, -3.2), c(-33.4, -44.0)],
        vec![c(-25.0, 3.2), c(54.6, 0.0), c(146.2, 174.4)],
        vec![c(-33.4, 44.0), c(146.2, -174.4), c(44.0, 0.0)],
    ])?)?;
    Ok(AuWitnessPackage {
        h0,
        h1,
        h2,
        objective_bound: -2.2,
        eps_range: Some((0.0, 0.7)),
    })
}

/// Every fixture name known to `emit`.
pub fn fixture_names() -> Vec<&'static str> {
    vec![
        "cp-no-extension",
        "kraus-family",
        "expanding-conjugation",
        "pauli-swap",
        "pauli-cycle",
        "classical-rescale",
        "abelian-three-state",
        "abelian-two-state",
        "transpose-pair-qutrit",
        "transpose-witness",
    ]
}

/// Emit a fixture as a JSON value (bit-exact across runs).
pub fn emit(name: &str) -> Result<serde_json::Value> {
    use serde_json::json;
    let pairs_json = |pairs: &[(HermitianMatrix, HermitianMatrix)]| {
        json!(pairs
            .iter()
            .map(|(x, y)| json!({"x": x, "y": y}))
            .collect::<Vec<_>>())
    };
    Ok(match name {
        "cp-no-extension" => json!({
            "name": name,
            "din": 2, "dout": 2,
            "pairs": pairs_json(&cp_no_extension_pairs()),
        }),
        "kraus-family" => {
            let (k1, k2) = kraus_family(0.1);
            json!({
                "name": name,
                "epsilon": 0.1,
                "kraus": [k1, k2],
            })
        }
        "expanding-conjugation" => json!({
            "name": name,
            "din": 2, "dout": 2,
            "pairs": pairs_json(&expanding_conjugation_pairs()?),
            "conjugation": expanding_conjugation_k(),
            "expansion_factor": expanding_conjugation_factor(),
        }),
        "pauli-swap" => json!({
            "name": name,
            "din": 2, "dout": 2,
            "pairs": pairs_json(&pauli_swap_pairs()),
            "minimal_unital_scale": 3.0,
        }),
        "pauli-cycle" => json!({
            "name": name,
            "din": 2, "dout": 2,
            "pairs": pairs_json(&pauli_cycle_pairs()),
            "minimal_unital_scale": 1.0,
        }),
        "classical-rescale" => json!({
            "name": name,
            "din": 2, "dout": 2,
            "pairs": pairs_json(&classical_rescale_pairs()),
            "maximin_value": 0.6,
        }),
        "abelian-three-state" => json!({
            "name": name,
            "din": 4, "dout": 2,
            "pairs": pairs_json(&abelian_three_state_pairs()),
            "fourth_vertex_image": abelian_three_state_fourth_image(),
        }),
        "abelian-two-state" => json!({
            "name": name,
            "din": 3, "dout": 2,
            "pairs": pairs_json(&abelian_two_state_pairs()),
        }),
        "transpose-pair-qutrit" => {
            let inst = transpose_pair_qutrit()?;
            json!({
                "name": name,
                "instance": inst,
            })
        }
        "transpose-witness" => {
            let pkg = transpose_witness_package()?;
            json!({
                "name": name,
                "witness": pkg,
            })
        }
        other => {
            return Err(crate::error::Error::InvalidArgument(format!(
                "unknown fixture '{other}'"
            )))
        }
    })
}
