//! Self-contained semidefinite-programming engine.
//!
//! Standard-form problems (PSD blocks, free scalars, linear equality
//! constraints) are lowered to a canonical conic form and solved by a
//! primal-dual path-following interior-point method on the homogeneous
//! self-dual embedding, so feasible and infeasible instances both terminate
//! with certificates. Certificates are re-validated with plain eigenvalue
//! arithmetic before being surfaced; the solver's own word is never the
//! final authority.

pub mod conic;
mod ipm;
mod presolve;
mod spec_form;
pub mod svec;
mod validate;

pub use conic::{herm_basis, herm_from_coords, Builder, ConeKind, ConicProblem, GForm, HermVar, Lmi, LinExpr, PsdVar, ScalarVar};
pub use ipm::{solve_conic, IterStat, RawSolution, RawStatus, SolveOptions};
pub use presolve::presolve_equalities;
pub use spec_form::{
    cone_slacks, eq_residual, feasibility, feasibility_conic, min_cone_margin, solve, Assignment,
    ConicFeasibility, FeasibilityOutcome, LinearFunctional, SdpProblem, SdpSolution, SdpStatus,
};
pub use validate::{
    validate_dual_ray, validate_primal_ray, CertificateCheck, ImprovingRay,
};

/// Solver tolerance bundle; every entry point takes one of these.
#[derive(Debug, Clone)]
pub struct Tolerances {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub psd_tol: f64,
    pub margin_tol: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            psd_tol: 1e-9,
            margin_tol: 1e-7,
            max_iter: 200,
        }
    }
}

impl Tolerances {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            feas_tol: self.feas_tol,
            gap_tol: self.gap_tol,
            max_iter: self.max_iter,
            ..SolveOptions::default()
        }
    }
}
