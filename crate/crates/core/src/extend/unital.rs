use crate::cpcheck::{exact_cp_extension, preprocess, ExactExtension, MapSpec};
use crate::error::Error;
use crate::linalg::HermitianMatrix;
use crate::solver::Tolerances;
use crate::Result;

/// Smallest c such that the map extended by 1 -> c*1 has a completely
/// positive extension, found by bisection. Inputs must be traceless (so
/// the identity is not in their span and the extension is a genuine added
/// constraint); feasibility is monotone in c.
pub fn minimal_unital_scale(spec: &MapSpec, tols: &Tolerances) -> Result<f64> {
    let din = spec.din();
    let dout = spec.dout();
    for (i, (x, _)) in spec.pairs().iter().enumerate() {
        if x.trace().abs() > 1e-9 * (1.0 + x.op_norm()) {
            return Err(Error::InvalidArgument(format!(
                "input {i} has trace {}; the unital-scale search requires traceless inputs",
                x.trace()
            )));
        }
    }
    let cap = 10.0
        * spec
            .pairs()
            .iter()
            .map(|(_, y)| y.op_norm())
            .sum::<f64>()
            .max(0.1);

    let feasible_at = |c: f64| -> Result<bool> {
        let mut pairs = spec.pairs().to_vec();
        pairs.push((
            HermitianMatrix::identity(din),
            HermitianMatrix::identity(dout).scale(c),
        ));
        let extended = preprocess(&pairs, spec.dual_pairs())?;
        Ok(matches!(
            exact_cp_extension(&extended, tols)?,
            ExactExtension::Exists(_)
        ))
    };

    if !feasible_at(cap)? {
        return Err(Error::Unsupported(format!(
            "no finite unital scale found up to the bracket cap {cap}"
        )));
    }
    let mut lo = 0.0;
    let mut hi = cap;
    if feasible_at(lo)? {
        return Ok(0.0);
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if feasible_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::*;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_on_spin_operators_has_scale_one() {
        let pairs = vec![
            (sigma_x(), sigma_x()),
            (sigma_y(), sigma_y()),
            (sigma_z(), sigma_z()),
        ];
        let spec = preprocess(&pairs, &[]).unwrap();
        let c = minimal_unital_scale(&spec, &tols()).unwrap();
        assert!((c - 1.0).abs() < 1e-4, "c = {c}");
    }

    #[test]
    fn traced_input_is_rejected() {
        let spec = preprocess(&[(psi0(), psi0())], &[]).unwrap();
        assert!(minimal_unital_scale(&spec, &tols()).is_err());
    }
}
