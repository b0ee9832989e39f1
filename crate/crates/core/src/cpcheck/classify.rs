use serde::{Deserialize, Serialize};

use super::delta::delta_sdp;
use super::extension::{exact_cp_extension, input_basis, ExactExtension};
use super::gamma::{gamma_sdp, CpStatus, CpVerdict};
use super::spec::MapSpec;
use crate::error::Error;
use crate::linalg::HermitianMatrix;
use crate::solver::{solve_conic, Builder, Lmi, LinExpr, RawStatus, Tolerances};
use crate::Result;

/// Does a span of Hermitian matrices contain a nonzero PSD element?
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum PsdInSpan {
    No,
    Yes(HermitianMatrix),
    Marginal,
}

/// Maximize tr[P] over P in the span with P >= 0 and tr[P] <= 1; the
/// optimum is exactly 1 when a nonzero PSD element exists and 0 otherwise.
pub fn contains_nonzero_psd(basis: &[HermitianMatrix], tols: &Tolerances) -> Result<PsdInSpan> {
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    let dim = basis[0].dim();
    if basis.iter().any(|b| b.dim() != dim) {
        return Err(Error::DimensionMismatch("basis dimensions differ".into()));
    }
    let mut b = Builder::new();
    let coeffs: Vec<_> = (0..basis.len()).map(|_| b.scalar()).collect();
    // P(u) >= 0
    let mut lmi = Lmi::zero(dim);
    for (u, bm) in coeffs.iter().zip(basis.iter()) {
        lmi = lmi.scalar_term(*u, bm.clone());
    }
    b.add_lmi(lmi);
    // tr P <= 1 and objective max tr P
    let mut tr_expr = LinExpr::new();
    for (u, bm) in coeffs.iter().zip(basis.iter()) {
        tr_expr = tr_expr.plus_var(*u, bm.trace());
    }
    let neg = LinExpr {
        terms: tr_expr.terms.iter().map(|(v, c)| (*v, -*c)).collect(),
        constant: 1.0,
    };
    b.add_nonneg_expr(neg);
    b.add_objective(LinExpr {
        terms: tr_expr.terms.iter().map(|(v, c)| (*v, -*c)).collect(),
        constant: 0.0,
    });
    let problem = b.build();
    let raw = solve_conic(&problem, &tols.solve_options());
    if raw.status != RawStatus::Optimal {
        return Ok(PsdInSpan::Marginal);
    }
    let achieved = -raw.primal_obj;
    if achieved >= 0.5 {
        let mut p = HermitianMatrix::zeros(dim);
        for (u, bm) in coeffs.iter().zip(basis.iter()) {
            p = p.add(&bm.scale(raw.x[u.0]));
        }
        // the element itself must re-validate
        if p.min_eig() >= -tols.psd_tol && p.trace() > 0.5 {
            Ok(PsdInSpan::Yes(p))
        } else {
            Ok(PsdInSpan::Marginal)
        }
    } else if achieved <= 1e-6 {
        Ok(PsdInSpan::No)
    } else {
        Ok(PsdInSpan::Marginal)
    }
}

/// Search for a strictly positive element: maximize t with P(u) >= t*1 and
/// tr P = 1. Returns the element when the optimum is safely positive.
fn strictly_positive_element(
    basis: &[HermitianMatrix],
    tols: &Tolerances,
) -> Result<Option<HermitianMatrix>> {
    let dim = basis[0].dim();
    let mut b = Builder::new();
    let coeffs: Vec<_> = (0..basis.len()).map(|_| b.scalar()).collect();
    let t = b.scalar();
    b.add_objective(LinExpr::var(t, -1.0));
    let mut lmi = Lmi::zero(dim).scalar_term(t, HermitianMatrix::identity(dim).scale(-1.0));
    for (u, bm) in coeffs.iter().zip(basis.iter()) {
        lmi = lmi.scalar_term(*u, bm.clone());
    }
    b.add_lmi(lmi);
    let mut tr_expr = LinExpr::constant(-1.0);
    for (u, bm) in coeffs.iter().zip(basis.iter()) {
        tr_expr = tr_expr.plus_var(*u, bm.trace());
    }
    b.add_eq(tr_expr);
    let problem = b.build();
    let raw = solve_conic(&problem, &tols.solve_options());
    if raw.status != RawStatus::Optimal {
        return Ok(None);
    }
    let tstar = -raw.primal_obj;
    if tstar <= tols.margin_tol {
        return Ok(None);
    }
    let mut p = HermitianMatrix::zeros(dim);
    for (u, bm) in coeffs.iter().zip(basis.iter()) {
        p = p.add(&bm.scale(raw.x[u.0]));
    }
    if p.min_eig() > 0.0 {
        Ok(Some(p))
    } else {
        Ok(None)
    }
}

/// Which analytic guarantee applies to the input span.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SpanGuarantee {
    /// The span contains no nonzero PSD operator: every linear map on it is
    /// completely positive and extends.
    NoNonzeroPsdInSpan,
    /// The span contains a strictly positive operator: CP maps extend
    /// exactly.
    StrictlyPositiveElement(HermitianMatrix),
    /// The inputs themselves are PSD: CP maps extend exactly.
    SpannedByPsd,
    /// No analytic guarantee applies; the SDPs decide.
    NoGuarantee,
}

/// What the guarantee plus the CP verdict imply for exact extensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtensionImplication {
    /// Extension existence is guaranteed analytically.
    ExtensionExists,
    /// Not completely positive, hence no CP extension can exist.
    NoExtension,
    /// Left to the feasibility SDP.
    Undetermined,
}

/// Structured classification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub cp: CpVerdict,
    pub guarantee: SpanGuarantee,
    pub implication: ExtensionImplication,
    /// Feasibility verdict, populated when no guarantee decides (or to
    /// carry the constructed extension when one does).
    pub extension: Option<ExactExtension>,
    /// Best-approximation value, populated when extension existence is in
    /// doubt.
    pub delta: Option<f64>,
}

/// Run the analytic guarantees and the SDPs, and combine them.
pub fn classify(spec: &MapSpec, tols: &Tolerances) -> Result<ClassifyReport> {
    let basis = input_basis(spec);
    let cp = gamma_sdp(spec, tols)?;

    let guarantee = match contains_nonzero_psd(&basis, tols)? {
        PsdInSpan::No => SpanGuarantee::NoNonzeroPsdInSpan,
        _ => {
            if let Some(p) = strictly_positive_element(&basis, tols)? {
                SpanGuarantee::StrictlyPositiveElement(p)
            } else if basis.iter().all(|x| x.min_eig() >= -tols.psd_tol) {
                SpanGuarantee::SpannedByPsd
            } else {
                SpanGuarantee::NoGuarantee
            }
        }
    };

    let implication = match (&guarantee, cp.status) {
        (SpanGuarantee::NoNonzeroPsdInSpan, _) => ExtensionImplication::ExtensionExists,
        (_, CpStatus::NotCP) => ExtensionImplication::NoExtension,
        (SpanGuarantee::StrictlyPositiveElement(_), CpStatus::CompletelyPositive)
        | (SpanGuarantee::SpannedByPsd, CpStatus::CompletelyPositive) => {
            ExtensionImplication::ExtensionExists
        }
        _ => ExtensionImplication::Undetermined,
    };

    // run the feasibility SDP when it decides, or to materialize the
    // guaranteed extension
    let extension = match implication {
        ExtensionImplication::NoExtension => None,
        _ => Some(exact_cp_extension(spec, tols)?),
    };
    let delta = match implication {
        ExtensionImplication::Undetermined => Some(delta_sdp(spec, tols)?.delta),
        _ => None,
    };

    Ok(ClassifyReport {
        cp,
        guarantee,
        implication,
        extension,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpcheck::preprocess;
    use crate::linalg::pauli::*;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn pauli_span_has_no_nonzero_psd() {
        let basis = vec![sigma_x(), sigma_y(), sigma_z()];
        assert!(matches!(
            contains_nonzero_psd(&basis, &tols()).unwrap(),
            PsdInSpan::No
        ));
    }

    #[test]
    fn projector_span_contains_psd() {
        let basis = vec![psi0(), sigma_x()];
        match contains_nonzero_psd(&basis, &tols()).unwrap() {
            PsdInSpan::Yes(p) => {
                assert!(p.min_eig() > -1e-9);
                assert!(p.trace() > 0.5);
            }
            other => panic!("expected Yes, got {other:?}"),
        }
    }

    #[test]
    fn single_sigma_z_span_has_no_psd() {
        assert!(matches!(
            contains_nonzero_psd(&[sigma_z()], &tols()).unwrap(),
            PsdInSpan::No
        ));
    }

    #[test]
    fn classify_pauli_span_guarantees_extension() {
        let pairs = vec![
            (sigma_x(), sigma_y().scale(0.3)),
            (sigma_y(), sigma_z().scale(-0.8)),
            (sigma_z(), sigma_x().scale(1.1)),
        ];
        let spec = preprocess(&pairs, &[]).unwrap();
        let report = classify(&spec, &tols()).unwrap();
        assert!(matches!(report.guarantee, SpanGuarantee::NoNonzeroPsdInSpan));
        assert_eq!(report.implication, ExtensionImplication::ExtensionExists);
        assert_eq!(report.cp.status, CpStatus::CompletelyPositive);
        assert!(matches!(report.extension, Some(ExactExtension::Exists(_))));
    }

    #[test]
    fn classify_strictly_positive_span() {
        // span{rho, sigma_y} with rho strictly positive
        let rho = HermitianMatrix::diag(&[14.0 / 15.0, 1.0 / 15.0]);
        let pairs = vec![(rho, psi0()), (sigma_y(), sigma_y().scale(0.5))];
        let spec = preprocess(&pairs, &[]).unwrap();
        let report = classify(&spec, &tols()).unwrap();
        assert!(matches!(
            report.guarantee,
            SpanGuarantee::StrictlyPositiveElement(_)
        ));
    }
}
