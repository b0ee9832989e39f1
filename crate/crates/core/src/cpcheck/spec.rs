use crate::error::Error;
use crate::linalg::HermitianMatrix;
use crate::Result;
use crate::solver::herm_basis;

/// A map presented as input/output pairs (X_i, Y_i), plus optional
/// dual-side (Heisenberg-picture) constraints (X'_j, Y'_j).
///
/// After `preprocess`, the inputs {X_i} are linearly independent and the
/// dual pairs have passed the compatibility conditions
/// tr[X'_j Y_i] = tr[Y'_j X_i].
#[derive(Debug, Clone)]
pub struct MapSpec {
    din: usize,
    dout: usize,
    pairs: Vec<(HermitianMatrix, HermitianMatrix)>,
    dual_pairs: Vec<(HermitianMatrix, HermitianMatrix)>,
}

impl MapSpec {
    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }

    pub fn pairs(&self) -> &[(HermitianMatrix, HermitianMatrix)] {
        &self.pairs
    }

    pub fn dual_pairs(&self) -> &[(HermitianMatrix, HermitianMatrix)] {
        &self.dual_pairs
    }

    pub fn inputs(&self) -> impl Iterator<Item = &HermitianMatrix> {
        self.pairs.iter().map(|(x, _)| x)
    }

    /// True when the only dual constraint is trace preservation
    /// (X' = 1_dout, Y' = 1_din).
    pub fn dual_is_trace_preservation(&self) -> bool {
        self.dual_pairs.len() == 1 && {
            let (xp, yp) = &self.dual_pairs[0];
            (xp.matrix() - HermitianMatrix::identity(self.dout).matrix()).max_abs() < 1e-12
                && (yp.matrix() - HermitianMatrix::identity(self.din).matrix()).max_abs() < 1e-12
        }
    }
}

/// Coordinates of a Hermitian matrix over the orthonormal Hermitian basis.
fn coords(h: &HermitianMatrix) -> Vec<f64> {
    herm_basis(h.dim()).iter().map(|b| h.inner(b)).collect()
}

/// Reduce a pair list to a maximal input-independent sublist, rejecting
/// dependent inputs whose outputs disagree with linearity.
fn reduce_pairs(
    pairs: &[(HermitianMatrix, HermitianMatrix)],
    label: &str,
) -> Result<Vec<(HermitianMatrix, HermitianMatrix)>> {
    let mut kept: Vec<(HermitianMatrix, HermitianMatrix)> = Vec::new();
    // orthonormalized input coords and the same transform applied to outputs
    let mut ortho_in: Vec<Vec<f64>> = Vec::new();
    let mut ortho_out: Vec<HermitianMatrix> = Vec::new();
    let scale_in = pairs
        .iter()
        .map(|(x, _)| x.matrix().frobenius_norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let scale_out = pairs
        .iter()
        .map(|(_, y)| y.matrix().frobenius_norm())
        .fold(0.0f64, f64::max)
        .max(1.0);
    for (idx, (x, y)) in pairs.iter().enumerate() {
        let mut v = coords(x);
        let mut w = y.clone();
        for (q, qy) in ortho_in.iter().zip(ortho_out.iter()) {
            let proj: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            for (vj, qj) in v.iter_mut().zip(q.iter()) {
                *vj -= proj * qj;
            }
            w = w.sub(&qy.scale(proj));
        }
        let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-10 * scale_in {
            let inv = 1.0 / norm;
            ortho_in.push(v.iter().map(|a| a * inv).collect());
            ortho_out.push(w.scale(inv));
            kept.push((x.clone(), y.clone()));
        } else {
            // dependent input: the residual output must vanish too
            let res = w.matrix().frobenius_norm();
            if res > 1e-9 * scale_out {
                return Err(Error::NotLinear(format!(
                    "{label} pair {idx} is linearly dependent on earlier inputs but its output \
                     deviates by {res:.3e}"
                )));
            }
        }
    }
    Ok(kept)
}

/// Validate and normalize raw pairs into a `MapSpec`.
///
/// Dependent inputs with consistent outputs are dropped; dependent inputs
/// with conflicting outputs are a `NotLinear` error. When dual pairs are
/// present the compatibility conditions must hold.
pub fn preprocess(
    pairs: &[(HermitianMatrix, HermitianMatrix)],
    dual_pairs: &[(HermitianMatrix, HermitianMatrix)],
) -> Result<MapSpec> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no input/output pairs".into()));
    }
    let din = pairs[0].0.dim();
    let dout = pairs[0].1.dim();
    for (i, (x, y)) in pairs.iter().enumerate() {
        if x.dim() != din || y.dim() != dout {
            return Err(Error::DimensionMismatch(format!(
                "pair {i}: expected ({din},{dout}), got ({},{})",
                x.dim(),
                y.dim()
            )));
        }
    }
    for (j, (xp, yp)) in dual_pairs.iter().enumerate() {
        if xp.dim() != dout || yp.dim() != din {
            return Err(Error::DimensionMismatch(format!(
                "dual pair {j}: expected ({dout},{din}), got ({},{})",
                xp.dim(),
                yp.dim()
            )));
        }
    }

    // compatibility: tr[X'_j Y_i] = tr[Y'_j X_i] for all i, j
    let scale = 1.0f64
        .max(
            pairs
                .iter()
                .map(|(x, y)| x.op_norm().max(y.op_norm()))
                .fold(0.0, f64::max),
        )
        .max(
            dual_pairs
                .iter()
                .map(|(x, y)| x.op_norm().max(y.op_norm()))
                .fold(0.0, f64::max),
        );
    for (j, (xp, yp)) in dual_pairs.iter().enumerate() {
        for (i, (x, y)) in pairs.iter().enumerate() {
            let lhs = xp.inner(y);
            let rhs = yp.inner(x);
            if (lhs - rhs).abs() > 1e-9 * scale * scale {
                return Err(Error::Incompatible(format!(
                    "tr[X'_{j} Y_{i}] = {lhs:.12} but tr[Y'_{j} X_{i}] = {rhs:.12}"
                )));
            }
        }
    }

    let pairs = reduce_pairs(pairs, "primal")?;
    let dual_pairs = if dual_pairs.is_empty() {
        Vec::new()
    } else {
        reduce_pairs(dual_pairs, "dual")?
    };
    Ok(MapSpec {
        din,
        dout,
        pairs,
        dual_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::*;

    #[test]
    fn redundant_pair_is_dropped() {
        let pairs = vec![
            (sigma_x(), sigma_z()),
            (sigma_x().scale(2.0), sigma_z().scale(2.0)),
        ];
        let spec = preprocess(&pairs, &[]).unwrap();
        assert_eq!(spec.pairs().len(), 1);
    }

    #[test]
    fn conflicting_pair_is_rejected() {
        let pairs = vec![(sigma_x(), sigma_z()), (sigma_x().scale(2.0), sigma_z())];
        assert!(matches!(preprocess(&pairs, &[]), Err(Error::NotLinear(_))));
    }

    #[test]
    fn trace_preservation_compatibility() {
        let one2 = HermitianMatrix::identity(2);
        // trace-preserving data: tr Y = tr X
        let ok = vec![(psi0(), psi0()), (sigma_x(), sigma_z())];
        let spec = preprocess(&ok, &[(one2.clone(), one2.clone())]).unwrap();
        assert!(spec.dual_is_trace_preservation());
        // violating data: tr Y != tr X
        let bad = vec![(psi0(), psi0().scale(2.0))];
        assert!(matches!(
            preprocess(&bad, &[(one2.clone(), one2)]),
            Err(Error::Incompatible(_))
        ));
    }
}
