//! Internal conic form consumed by the interior-point engine:
//!
//!   minimize    c'x
//!   subject to  A x = b
//!               s_k = h_k - G_k x  in  K_k   for every cone block k
//!
//! with K_k a nonnegative orthant or a PSD cone over svec-packed real
//! symmetric matrices. Hermitian data is carried on embedded blocks of
//! doubled dimension (see `svec`).

use serde::Serialize;

use super::svec::{svec_len, trace_pair_coeff};
use crate::linalg::HermitianMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConeKind {
    /// Componentwise nonnegative block of the given length.
    Nonneg(usize),
    /// PSD cone over real symmetric matrices of the given side length,
    /// svec-packed.
    Psd(usize),
}

impl ConeKind {
    pub fn vec_len(&self) -> usize {
        match *self {
            ConeKind::Nonneg(l) => l,
            ConeKind::Psd(k) => svec_len(k),
        }
    }

    /// Barrier degree (number of eigenvalues).
    pub fn degree(&self) -> usize {
        match *self {
            ConeKind::Nonneg(l) => l,
            ConeKind::Psd(k) => k,
        }
    }
}

/// Rows of G for one cone block.
#[derive(Debug, Clone, Serialize)]
pub enum GForm {
    /// s = h + x[offset .. offset+len]: the block is (a shifted copy of) a
    /// contiguous variable slice. Stored as G = -I on that slice.
    NegIdentity { offset: usize },
    /// Dense rows, one per svec coordinate of the block.
    Dense(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub g: GForm,
    pub h: Vec<f64>,
}

/// The canonical problem. Everything is dense; problems here are desk-scale.
#[derive(Debug, Clone, Serialize)]
pub struct ConicProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub cones: Vec<ConeBlock>,
}

impl ConicProblem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            cones: Vec::new(),
        }
    }

    pub fn cone_dim(&self) -> usize {
        self.cones.iter().map(|c| c.kind.vec_len()).sum()
    }

    pub fn total_degree(&self) -> usize {
        self.cones.iter().map(|c| c.kind.degree()).sum()
    }

    pub fn add_eq_row(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.num_vars);
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_cone(&mut self, kind: ConeKind, g: GForm, h: Vec<f64>) {
        debug_assert_eq!(h.len(), kind.vec_len());
        if let GForm::Dense(rows) = &g {
            debug_assert_eq!(rows.len(), kind.vec_len());
            debug_assert!(rows.iter().all(|r| r.len() == self.num_vars));
        }
        self.cones.push(ConeBlock { kind, g, h });
    }

    /// Documented JSON dump of the canonical data for cross-checking
    /// against external solvers.
    pub fn to_debug_json(&self) -> serde_json::Value {
        serde_json::json!({
            "format": "conic-v1",
            "description": "minimize c.x subject to A x = b and h - G x in cone product",
            "num_vars": self.num_vars,
            "c": self.objective,
            "A": self.eq_rows,
            "b": self.eq_rhs,
            "cones": self.cones.iter().map(|blk| {
                let g_rows: Vec<Vec<f64>> = match &blk.g {
                    GForm::Dense(rows) => rows.clone(),
                    GForm::NegIdentity { offset } => {
                        let len = blk.kind.vec_len();
                        (0..len).map(|r| {
                            let mut row = vec![0.0; self.num_vars];
                            row[offset + r] = -1.0;
                            row
                        }).collect()
                    }
                };
                serde_json::json!({
                    "kind": match blk.kind {
                        ConeKind::Nonneg(l) => serde_json::json!({"nonneg": l}),
                        ConeKind::Psd(k) => serde_json::json!({"psd_side": k}),
                    },
                    "G": g_rows,
                    "h": blk.h,
                })
            }).collect::<Vec<_>>(),
        })
    }
}

/// Incremental builder used by the problem constructors in `cpcheck`,
/// `extend`, and `classical`.
///
/// Variables are allocated in three flavors: scalar, Hermitian-matrix
/// coordinate blocks (k^2 reals over an orthonormal Hermitian basis), and
/// embedded PSD matrix variables (svec coordinates constrained to the cone
/// through a NegIdentity block).
#[derive(Debug, Default)]
pub struct Builder {
    num_vars: usize,
    pending_cones: Vec<(ConeKind, GForm, Vec<f64>)>,
    objective: Vec<(usize, f64)>,
    eq: Vec<(Vec<(usize, f64)>, f64)>,
}

/// Handle to a Hermitian free-variable block: k^2 real coordinates over the
/// orthonormal basis {E_ii} + {(E_ij+E_ji)/sqrt2} + {i(E_ij-E_ji)/sqrt2}.
#[derive(Debug, Clone, Copy)]
pub struct HermVar {
    pub dim: usize,
    pub offset: usize,
}

/// Handle to a PSD matrix variable (embedded Hermitian of complex side k,
/// i.e. a real symmetric 2k x 2k svec slice).
#[derive(Debug, Clone, Copy)]
pub struct PsdVar {
    pub cdim: usize,
    pub offset: usize,
    pub cone_index: usize,
}

/// Handle to a scalar variable.
#[derive(Debug, Clone, Copy)]
pub struct ScalarVar(pub usize);

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar(&mut self) -> ScalarVar {
        let v = ScalarVar(self.num_vars);
        self.num_vars += 1;
        v
    }

    /// Nonnegative scalar: allocates a variable plus a 1-dim orthant block.
    pub fn nonneg_scalar(&mut self) -> ScalarVar {
        let v = self.scalar();
        self.pending_cones
            .push((ConeKind::Nonneg(1), GForm::NegIdentity { offset: v.0 }, vec![0.0]));
        v
    }

    /// Free Hermitian matrix variable of complex dimension `dim`.
    pub fn herm_var(&mut self, dim: usize) -> HermVar {
        let offset = self.num_vars;
        self.num_vars += dim * dim;
        HermVar { dim, offset }
    }

    /// PSD Hermitian matrix variable of complex dimension `cdim`, stored as
    /// an embedded real symmetric svec slice constrained to the cone.
    pub fn psd_var(&mut self, cdim: usize) -> PsdVar {
        let offset = self.num_vars;
        let len = svec_len(2 * cdim);
        self.num_vars += len;
        let cone_index = self.pending_cones.len();
        self.pending_cones.push((
            ConeKind::Psd(2 * cdim),
            GForm::NegIdentity { offset },
            vec![0.0; len],
        ));
        PsdVar {
            cdim,
            offset,
            cone_index,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn add_objective(&mut self, terms: LinExpr) {
        self.objective.extend(terms.terms);
        // constant offsets in the objective are not representable; callers
        // track them separately
        debug_assert_eq!(terms.constant, 0.0);
    }

    /// Equality constraint expr = 0 (the constant goes to the rhs).
    pub fn add_eq(&mut self, expr: LinExpr) {
        self.eq.push((expr.terms, -expr.constant));
    }

    /// Affine Hermitian LMI block: value = const + sum(column coefficients
    /// times variables) must be PSD. Columns come from `Lmi`.
    pub fn add_lmi(&mut self, lmi: Lmi) {
        let len = svec_len(2 * lmi.dim);
        let h = super::svec::svec_embed(&lmi.konst);
        let mut rows = vec![vec![0.0; self.num_vars]; len];
        for (var, coeff) in &lmi.cols {
            debug_assert_eq!(coeff.dim(), lmi.dim);
            let col = super::svec::svec_embed(coeff);
            for (r, &val) in col.iter().enumerate() {
                if val != 0.0 {
                    // s = h - G x must equal const + sum coeff*var
                    rows[r][*var] -= val;
                }
            }
        }
        self.pending_cones
            .push((ConeKind::Psd(2 * lmi.dim), GForm::Dense(rows), h));
    }

    /// Nonnegativity of an affine expression: expr >= 0 as a 1-dim orthant
    /// block s = expr.
    pub fn add_nonneg_expr(&mut self, expr: LinExpr) {
        let mut row = vec![0.0; self.num_vars];
        for (v, cf) in &expr.terms {
            row[*v] -= cf;
        }
        self.pending_cones
            .push((ConeKind::Nonneg(1), GForm::Dense(vec![row]), vec![expr.constant]));
    }

    pub fn build(self) -> ConicProblem {
        let mut p = ConicProblem::new(self.num_vars);
        for (var, cf) in self.objective {
            p.objective[var] += cf;
        }
        for (terms, rhs) in self.eq {
            let mut row = vec![0.0; self.num_vars];
            for (v, cf) in terms {
                row[v] += cf;
            }
            p.add_eq_row(row, rhs);
        }
        for (kind, g, h) in self.pending_cones {
            // Dense rows were sized against an intermediate num_vars; pad.
            let g = match g {
                GForm::Dense(rows) => GForm::Dense(
                    rows.into_iter()
                        .map(|mut r| {
                            r.resize(self.num_vars, 0.0);
                            r
                        })
                        .collect(),
                ),
                other => other,
            };
            p.add_cone(kind, g, h);
        }
        p
    }
}

/// Sparse linear expression over variables plus a constant.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: ScalarVar, coeff: f64) -> Self {
        Self {
            terms: vec![(v.0, coeff)],
            constant: 0.0,
        }
    }

    pub fn plus_var(mut self, v: ScalarVar, coeff: f64) -> Self {
        self.terms.push((v.0, coeff));
        self
    }

    pub fn plus_const(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    /// tr[G * H] for a Hermitian free-variable block.
    pub fn plus_herm_trace(mut self, g: &HermitianMatrix, h: HermVar) -> Self {
        debug_assert_eq!(g.dim(), h.dim);
        for (k, basis) in herm_basis(h.dim).iter().enumerate() {
            let cf = g.inner(basis);
            if cf.abs() > 0.0 {
                self.terms.push((h.offset + k, cf));
            }
        }
        self
    }

    /// tr[G * P] for an embedded PSD matrix variable.
    pub fn plus_psd_trace(mut self, g: &HermitianMatrix, p: PsdVar) -> Self {
        debug_assert_eq!(g.dim(), p.cdim);
        for (k, cf) in trace_pair_coeff(g).into_iter().enumerate() {
            if cf != 0.0 {
                self.terms.push((p.offset + k, cf));
            }
        }
        self
    }
}

/// Affine Hermitian matrix expression under construction: a constant part
/// plus one Hermitian coefficient per scalar solver variable. Hermitian
/// free-variable blocks and PSD matrix variables contribute through their
/// coordinate expansions.
#[derive(Debug, Clone)]
pub struct Lmi {
    dim: usize,
    konst: HermitianMatrix,
    cols: Vec<(usize, HermitianMatrix)>,
}

impl Lmi {
    pub fn new(dim: usize, konst: HermitianMatrix) -> Self {
        debug_assert_eq!(konst.dim(), dim);
        Self {
            dim,
            konst,
            cols: Vec::new(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, HermitianMatrix::zeros(dim))
    }

    /// coeff * (scalar variable)
    pub fn scalar_term(mut self, v: ScalarVar, coeff: HermitianMatrix) -> Self {
        self.cols.push((v.0, coeff));
        self
    }

    /// map(H) for a Hermitian free-variable block, expanded over the
    /// orthonormal Hermitian basis.
    pub fn herm_term(
        mut self,
        h: HermVar,
        map: impl Fn(&HermitianMatrix) -> HermitianMatrix,
    ) -> Self {
        for (k, basis) in herm_basis(h.dim).iter().enumerate() {
            let coeff = map(basis);
            if coeff.matrix().max_abs() > 0.0 {
                self.cols.push((h.offset + k, coeff));
            }
        }
        self
    }

    /// map(P) for a PSD matrix variable; the map sees only the Hermitian
    /// part of the embedded block, which is exactly the operator the
    /// variable represents.
    pub fn psd_term(
        mut self,
        p: PsdVar,
        map: impl Fn(&HermitianMatrix) -> HermitianMatrix,
    ) -> Self {
        let len = svec_len(2 * p.cdim);
        for t in 0..len {
            let mut unit = vec![0.0; len];
            unit[t] = 1.0;
            let phi = super::svec::herm_from_embedded_svec(&unit, p.cdim);
            let coeff = map(&phi);
            if coeff.matrix().max_abs() > 1e-300 {
                self.cols.push((p.offset + t, coeff));
            }
        }
        self
    }
}

/// Orthonormal real basis of the Hermitian k x k matrices (w.r.t. tr[AB]):
/// diagonal units, then for i<j the symmetric and antisymmetric pairs.
pub fn herm_basis(k: usize) -> Vec<HermitianMatrix> {
    use crate::linalg::{Complex64, ComplexMatrix};
    let inv = 1.0 / std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        let mut m = ComplexMatrix::zeros(k, k);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        out.push(HermitianMatrix::symmetrize(m));
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let mut m = ComplexMatrix::zeros(k, k);
            m[(i, j)] = Complex64::new(inv, 0.0);
            m[(j, i)] = Complex64::new(inv, 0.0);
            out.push(HermitianMatrix::symmetrize(m));
            let mut m = ComplexMatrix::zeros(k, k);
            m[(i, j)] = Complex64::new(0.0, inv);
            m[(j, i)] = Complex64::new(0.0, -inv);
            out.push(HermitianMatrix::symmetrize(m));
        }
    }
    out
}

/// Reassemble a Hermitian matrix from its coordinates over `herm_basis`.
pub fn herm_from_coords(coords: &[f64], k: usize) -> HermitianMatrix {
    let basis = herm_basis(k);
    debug_assert_eq!(coords.len(), basis.len());
    let mut acc = HermitianMatrix::zeros(k);
    for (c, b) in coords.iter().zip(basis.iter()) {
        if *c != 0.0 {
            acc = acc.add(&b.scale(*c));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    #[test]
    fn herm_basis_is_orthonormal() {
        let basis = herm_basis(3);
        assert_eq!(basis.len(), 9);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let dot = a.inner(b);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn debug_dump_round_trips_the_canonical_data() {
        let mut b = Builder::new();
        let x = b.psd_var(2);
        b.add_objective(LinExpr::new().plus_psd_trace(&crate::linalg::HermitianMatrix::identity(2), x));
        b.add_eq(
            LinExpr::new()
                .plus_psd_trace(&crate::linalg::pauli::sigma_z(), x)
                .plus_const(-0.25),
        );
        let p = b.build();
        let dump = p.to_debug_json();
        assert_eq!(dump["format"], "conic-v1");
        assert_eq!(dump["num_vars"], p.num_vars);
        assert_eq!(dump["A"].as_array().unwrap().len(), 1);
        // NegIdentity blocks are expanded to explicit rows in the dump
        let g0 = &dump["cones"][0]["G"];
        assert_eq!(g0.as_array().unwrap().len(), p.cones[0].kind.vec_len());
    }

    #[test]
    fn herm_coords_round_trip() {
        let g = pauli::sigma_y().add(&pauli::psi0().scale(0.3));
        let coords: Vec<f64> = herm_basis(2).iter().map(|b| g.inner(b)).collect();
        let back = herm_from_coords(&coords, 2);
        assert!((back.matrix() - g.matrix()).max_abs() < 1e-14);
    }
}
