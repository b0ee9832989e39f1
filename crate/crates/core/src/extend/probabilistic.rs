use serde::{Deserialize, Serialize};

use crate::cpcheck::apply_coeff;
use crate::error::Error;
use crate::linalg::{apply_choi, partial_trace, ChoiMatrix, HermitianMatrix, TraceFactor};
use crate::solver::{
    herm_basis, solve_conic, Builder, Lmi, LinExpr, RawStatus, Tolerances,
};
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ObjectiveKind {
    Maximin,
    Weighted { priors: Vec<f64> },
}

/// A probabilistic (trace-non-increasing) operation achieving
/// T(rho_i) = p_i rho'_i.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbabilisticResult {
    pub objective_kind: ObjectiveKind,
    pub value: f64,
    pub probs: Vec<f64>,
    pub choi: ChoiMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ProbabilisticOutcome {
    Solved(ProbabilisticResult),
    /// The requested probability floor is unreachable; carries the floor
    /// and the validated Farkas ray of the constraint system.
    FloorInfeasible {
        floor: f64,
        ray: crate::solver::ImprovingRay,
    },
}

fn check_density(label: &str, idx: usize, rho: &HermitianMatrix) -> Result<()> {
    let min_eig = rho.min_eig();
    if min_eig < -1e-9 {
        return Err(Error::NotPsd {
            min_eig,
            tolerance: 1e-9,
        });
    }
    if (rho.trace() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "{label} state {idx} has trace {} (must be 1)",
            rho.trace()
        )));
    }
    Ok(())
}

struct ProbProgram {
    builder: Builder,
    c: crate::solver::PsdVar,
    p_vars: Vec<crate::solver::ScalarVar>,
}

struct ProgHandles {
    c: crate::solver::PsdVar,
    p_vars: Vec<crate::solver::ScalarVar>,
}

fn common_program(
    pairs: &[(HermitianMatrix, HermitianMatrix)],
    equal_probabilities: bool,
    floor: Option<f64>,
) -> Result<ProbProgram> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no state pairs".into()));
    }
    let din = pairs[0].0.dim();
    let dout = pairs[0].1.dim();
    for (i, (rho, rhop)) in pairs.iter().enumerate() {
        if rho.dim() != din || rhop.dim() != dout {
            return Err(Error::DimensionMismatch(format!("state pair {i}")));
        }
        check_density("input", i, rho)?;
        check_density("output", i, rhop)?;
    }
    let mut b = Builder::new();
    let c = b.psd_var(din * dout);
    let p_vars: Vec<_> = (0..pairs.len()).map(|_| b.scalar()).collect();
    // apply(C, rho_i) = p_i rho'_i
    for ((rho, rhop), p) in pairs.iter().zip(p_vars.iter()) {
        for g in herm_basis(dout) {
            let expr = LinExpr::new()
                .plus_psd_trace(&apply_coeff(&g, rho), c)
                .plus_var(*p, -g.inner(rhop));
            b.add_eq(expr);
        }
        b.add_nonneg_expr(LinExpr::var(*p, 1.0));
        if let Some(p0) = floor {
            b.add_nonneg_expr(LinExpr::var(*p, 1.0).plus_const(-p0));
        }
    }
    if equal_probabilities {
        for w in p_vars.windows(2) {
            b.add_eq(LinExpr::var(w[0], 1.0).plus_var(w[1], -1.0));
        }
    }
    // trace-non-increasing: 1 - tr_1[C] >= 0
    let id_in = HermitianMatrix::identity(din);
    b.add_lmi(Lmi::new(din, id_in).psd_term(c, move |phi| {
        HermitianMatrix::symmetrize(
            partial_trace(phi.matrix(), (dout, din), TraceFactor::First)
                .expect("builder dimensions"),
        )
        .scale(-1.0)
    }));
    Ok(ProbProgram { builder: b, c, p_vars })
}

fn extract(
    pairs: &[(HermitianMatrix, HermitianMatrix)],
    c_var: crate::solver::PsdVar,
    p_vars: &[crate::solver::ScalarVar],
    x: &[f64],
    value: f64,
    kind: ObjectiveKind,
    tols: &Tolerances,
) -> Result<ProbabilisticResult> {
    let din = pairs[0].0.dim();
    let dout = pairs[0].1.dim();
    let choi = crate::cpcheck::choi_from_solution(x, c_var, din, dout);
    // probabilities re-derived from the Choi matrix itself
    let mut probs = Vec::with_capacity(pairs.len());
    for ((rho, rhop), p) in pairs.iter().zip(p_vars.iter()) {
        let img = apply_choi(&choi, rho.matrix())?;
        let p_solver = x[p.0];
        let p_trace = img.trace().re;
        // consistency between the solver variable and tr[T(rho)]
        if (p_solver - p_trace).abs() > 1e-6 {
            return Err(Error::NumericFailure(format!(
                "probability mismatch: variable {p_solver} vs trace {p_trace}"
            )));
        }
        let residual = (&img - &rhop.matrix().scale_re(p_trace)).max_abs();
        if residual > 1e-6 {
            return Err(Error::NumericFailure(format!(
                "proportionality residual {residual:.3e}"
            )));
        }
        probs.push(p_trace.clamp(0.0, 1.0 + tols.psd_tol));
    }
    Ok(ProbabilisticResult {
        objective_kind: kind,
        value,
        probs,
        choi,
    })
}

/// Maximize the minimum success probability over operations with
/// T(rho_i) = p_i rho'_i, optionally forcing all p_i equal.
pub fn probabilistic_maximin(
    pairs: &[(HermitianMatrix, HermitianMatrix)],
    equal_probabilities: bool,
    tols: &Tolerances,
) -> Result<ProbabilisticResult> {
    let mut prog = common_program(pairs, equal_probabilities, None)?;
    let q = prog.builder.scalar();
    for p in &prog.p_vars {
        prog.builder
            .add_nonneg_expr(LinExpr::var(*p, 1.0).plus_var(q, -1.0));
    }
    prog.builder.add_objective(LinExpr::var(q, -1.0));
    let ProbProgram { builder, c, p_vars } = prog;
    let problem = builder.build();
    let prog = ProgHandles { c, p_vars };
    let raw = solve_conic(&problem, &tols.solve_options());
    if !matches!(raw.status, RawStatus::Optimal | RawStatus::Marginal) {
        return Err(Error::NumericFailure(format!(
            "maximin program ended with {:?}",
            raw.status
        )));
    }
    let value = (-raw.primal_obj).clamp(0.0, 1.0);
    extract(pairs, prog.c, &prog.p_vars, &raw.x, value, ObjectiveKind::Maximin, tols)
}

/// Maximize sum_i pi_i p_i under the same constraint set, with an optional
/// per-state probability floor (whose unreachability is reported
/// distinctly).
pub fn probabilistic_weighted(
    pairs: &[(HermitianMatrix, HermitianMatrix)],
    priors: &[f64],
    floor: Option<f64>,
    equal_probabilities: bool,
    tols: &Tolerances,
) -> Result<ProbabilisticOutcome> {
    if priors.len() != pairs.len() {
        return Err(Error::InvalidArgument("one prior per state pair".into()));
    }
    if priors.iter().any(|&p| p < 0.0) || (priors.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(
            "priors must be nonnegative and sum to 1".into(),
        ));
    }
    if let Some(p0) = floor {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::InvalidArgument("floor must lie in [0,1]".into()));
        }
    }
    let mut prog = common_program(pairs, equal_probabilities, floor)?;
    let mut obj = LinExpr::new();
    for (p, pi) in prog.p_vars.iter().zip(priors.iter()) {
        obj = obj.plus_var(*p, -pi);
    }
    prog.builder.add_objective(obj);
    let ProbProgram { builder, c, p_vars } = prog;
    let problem = builder.build();
    let prog = ProgHandles { c, p_vars };
    let raw = solve_conic(&problem, &tols.solve_options());
    match raw.status {
        RawStatus::Optimal | RawStatus::Marginal => {
            let value = (-raw.primal_obj).clamp(0.0, 1.0);
            Ok(ProbabilisticOutcome::Solved(extract(
                pairs,
                prog.c,
                &prog.p_vars,
                &raw.x,
                value,
                ObjectiveKind::Weighted {
                    priors: priors.to_vec(),
                },
                tols,
            )?))
        }
        RawStatus::PrimalInfeasible if floor.is_some() => {
            let (y, z) = raw
                .cert_primal_infeasible
                .clone()
                .ok_or_else(|| Error::NumericFailure("missing certificate".into()))?;
            let check =
                crate::solver::validate_primal_ray(&problem, &y, &z, tols.feas_tol, tols.psd_tol);
            if !check.valid {
                return Err(Error::NumericFailure(
                    "floor infeasibility certificate failed validation".into(),
                ));
            }
            Ok(ProbabilisticOutcome::FloorInfeasible {
                floor: floor.unwrap(),
                ray: crate::solver::ImprovingRay::PrimalInfeasible { y, z },
            })
        }
        other => Err(Error::NumericFailure(format!(
            "weighted program ended with {other:?}"
        ))),
    }
}
