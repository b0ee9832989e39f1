//! Primal-dual path-following interior-point method on the homogeneous
//! self-dual embedding, with Nesterov-Todd scaling and a Mehrotra
//! predictor-corrector step.
//!
//! Solves the canonical form of `ConicProblem`:
//!
//!   min c'x   s.t.   A x = b,   s = h - G x in K,
//!
//! returning either an optimal primal/dual pair or a certified improving
//! ray. The embedding makes infeasibility detection a first-class outcome
//! rather than an iteration-limit failure. Everything is dense f64 and
//! strictly deterministic.

use nalgebra::{DMatrix, DVector};

use super::conic::{ConeKind, ConicProblem, GForm};
use super::svec::{smat, svec, svec_len};

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
    pub step_frac: f64,
    /// Record per-iteration objective/residual statistics.
    pub keep_trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 200,
            step_frac: 0.99,
            keep_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    Marginal,
    NumericFailure,
}

/// Per-iteration statistics (primal/dual objective of the de-homogenized
/// iterate, residual norms, complementarity gap).
#[derive(Debug, Clone, Copy)]
pub struct IterStat {
    pub pcost: f64,
    pub dcost: f64,
    pub pres: f64,
    pub dres: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct RawSolution {
    pub status: RawStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub s: Vec<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub gap: f64,
    pub pres: f64,
    pub dres: f64,
    pub iterations: usize,
    /// Primal-infeasibility certificate (y, z): A'y + G'z = 0, z in K*,
    /// normalized to b'y + h'z = -1.
    pub cert_primal_infeasible: Option<(Vec<f64>, Vec<f64>)>,
    /// Dual-infeasibility certificate x: A x = 0, -G x in K, normalized to
    /// c'x = -1.
    pub cert_dual_infeasible: Option<Vec<f64>>,
    pub trace: Vec<IterStat>,
    pub message: String,
}

struct Layout {
    offsets: Vec<usize>,
    total: usize,
}

fn layout(p: &ConicProblem) -> Layout {
    let mut offsets = Vec::with_capacity(p.cones.len());
    let mut total = 0;
    for c in &p.cones {
        offsets.push(total);
        total += c.kind.vec_len();
    }
    Layout { offsets, total }
}

// ---------------------------------------------------------------------------
// Per-block cone operations

enum Scaling {
    Nonneg {
        w: Vec<f64>,
        lambda: Vec<f64>,
    },
    Psd {
        k: usize,
        r: DMatrix<f64>,
        rinv: DMatrix<f64>,
        /// Scaled-point eigenvalues (diagonal of Lambda).
        lambda: Vec<f64>,
        chol_s: DMatrix<f64>,
        chol_z: DMatrix<f64>,
    },
}

fn factor_psd(mat: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if let Some(ch) = mat.clone().cholesky() {
        return Some(ch.l());
    }
    // Boundary-adjacent iterate: fall back to an eigenvalue square root,
    // clamping tiny negatives.
    let eig = mat.clone().symmetric_eigen();
    let mut any_bad = false;
    let vals: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            if l < -1e-12 {
                any_bad = true;
            }
            l.max(1e-300).sqrt()
        })
        .collect();
    if any_bad {
        return None;
    }
    let mut out = eig.eigenvectors.clone();
    for (j, v) in vals.iter().enumerate() {
        for i in 0..out.nrows() {
            out[(i, j)] *= v;
        }
    }
    Some(out)
}

fn dmat_from_svec(v: &[f64], k: usize) -> DMatrix<f64> {
    let rows = smat(v, k);
    DMatrix::from_fn(k, k, |i, j| rows[i][j])
}

fn svec_from_dmat(m: &DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows();
    let rows: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| m[(i, j)]).collect()).collect();
    svec(&rows)
}

impl Scaling {
    fn compute(kind: ConeKind, s: &[f64], z: &[f64]) -> Option<Scaling> {
        match kind {
            ConeKind::Nonneg(_) => {
                let mut w = Vec::with_capacity(s.len());
                let mut lambda = Vec::with_capacity(s.len());
                for (&si, &zi) in s.iter().zip(z.iter()) {
                    if si <= 0.0 || zi <= 0.0 {
                        return None;
                    }
                    w.push((si / zi).sqrt());
                    lambda.push((si * zi).sqrt());
                }
                Some(Scaling::Nonneg { w, lambda })
            }
            ConeKind::Psd(k) => {
                let sm = dmat_from_svec(s, k);
                let zm = dmat_from_svec(z, k);
                let l1 = factor_psd(&sm)?;
                let l2 = factor_psd(&zm)?;
                let m = l2.transpose() * &l1;
                let svd = m.svd(true, true);
                let u = svd.u?;
                let vt = svd.v_t?;
                let sing = svd.singular_values;
                if sing.iter().any(|&x| x <= 0.0) {
                    return None;
                }
                // R = L1 V Sigma^{-1/2},  R^{-1} = Sigma^{-1/2} U' L2'
                let mut v = vt.transpose();
                for j in 0..k {
                    let f = 1.0 / sing[j].sqrt();
                    for i in 0..k {
                        v[(i, j)] *= f;
                    }
                }
                let r = &l1 * v;
                let mut ut = u.transpose();
                for i in 0..k {
                    let f = 1.0 / sing[i].sqrt();
                    for j in 0..k {
                        ut[(i, j)] *= f;
                    }
                }
                let rinv = ut * l2.transpose();
                Some(Scaling::Psd {
                    k,
                    r,
                    rinv,
                    lambda: sing.iter().copied().collect(),
                    chol_s: l1,
                    chol_z: l2,
                })
            }
        }
    }

    /// lambda as a cone vector.
    fn lambda_vec(&self) -> Vec<f64> {
        match self {
            Scaling::Nonneg { lambda, .. } => lambda.clone(),
            Scaling::Psd { k, lambda, .. } => {
                let mut m = DMatrix::zeros(*k, *k);
                for i in 0..*k {
                    m[(i, i)] = lambda[i];
                }
                svec_from_dmat(&m)
            }
        }
    }

    fn lambda_sq_vec(&self) -> Vec<f64> {
        match self {
            Scaling::Nonneg { lambda, .. } => lambda.iter().map(|l| l * l).collect(),
            Scaling::Psd { k, lambda, .. } => {
                let mut m = DMatrix::zeros(*k, *k);
                for i in 0..*k {
                    m[(i, i)] = lambda[i] * lambda[i];
                }
                svec_from_dmat(&m)
            }
        }
    }

    /// W applied to a cone vector: svec(R' V R).
    fn w_apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Nonneg { w, .. } => v.iter().zip(w).map(|(x, wi)| x * wi).collect(),
            Scaling::Psd { k, r, .. } => {
                let vm = dmat_from_svec(v, *k);
                svec_from_dmat(&(r.transpose() * vm * r))
            }
        }
    }

    /// W^{-T} applied to a cone vector: svec(R^{-1} V R^{-T}).
    fn w_inv_t_apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Nonneg { w, .. } => v.iter().zip(w).map(|(x, wi)| x / wi).collect(),
            Scaling::Psd { k, rinv, .. } => {
                let vm = dmat_from_svec(v, *k);
                svec_from_dmat(&(rinv * vm * rinv.transpose()))
            }
        }
    }

    /// W' applied to a cone vector: svec(R V R').
    fn w_t_apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Nonneg { w, .. } => v.iter().zip(w).map(|(x, wi)| x * wi).collect(),
            Scaling::Psd { k, r, .. } => {
                let vm = dmat_from_svec(v, *k);
                svec_from_dmat(&(r * vm * r.transpose()))
            }
        }
    }

    /// H^{-1} = (W'W)^{-1} applied to a cone vector: congruence by
    /// Q^{-1} = R^{-T} R^{-1} ... i.e. svec(Qi V Qi) with Qi = (R R')^{-1}.
    fn h_inv_apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Nonneg { w, .. } => v.iter().zip(w).map(|(x, wi)| x / (wi * wi)).collect(),
            Scaling::Psd { k, rinv, .. } => {
                let qi = rinv.transpose() * rinv;
                let vm = dmat_from_svec(v, *k);
                svec_from_dmat(&(&qi * vm * &qi))
            }
        }
    }

    /// Dense matrix of H^{-1} as an operator on svec coordinates.
    fn h_inv_matrix(&self) -> DMatrix<f64> {
        match self {
            Scaling::Nonneg { w, .. } => {
                let n = w.len();
                DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / (w[i] * w[i]) } else { 0.0 })
            }
            Scaling::Psd { k, rinv, .. } => {
                let qi = rinv.transpose() * rinv;
                let len = svec_len(*k);
                let mut out = DMatrix::zeros(len, len);
                let mut basis_idx = 0;
                for i in 0..*k {
                    for j in 0..=i {
                        // image of basis element under congruence by qi
                        let mut e = DMatrix::zeros(*k, *k);
                        if i == j {
                            e[(i, i)] = 1.0;
                        } else {
                            let v = std::f64::consts::FRAC_1_SQRT_2;
                            e[(i, j)] = v;
                            e[(j, i)] = v;
                        }
                        let img = &qi * e * &qi;
                        let col = svec_from_dmat(&img);
                        for (r, val) in col.iter().enumerate() {
                            out[(r, basis_idx)] = *val;
                        }
                        basis_idx += 1;
                    }
                }
                // symmetrize roundoff
                let outt = out.transpose();
                (out + outt) * 0.5
            }
        }
    }

    /// Jordan product in the scaled space.
    fn jordan(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Nonneg { .. } => a.iter().zip(b).map(|(x, y)| x * y).collect(),
            Scaling::Psd { k, .. } => {
                let am = dmat_from_svec(a, *k);
                let bm = dmat_from_svec(b, *k);
                let prod = (&am * &bm + &bm * &am) * 0.5;
                svec_from_dmat(&prod)
            }
        }
    }

    /// Solve L_lambda u = rhs where lambda is the scaled point.
    fn jordan_solve_lambda(&self, rhs: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Nonneg { lambda, .. } => rhs.iter().zip(lambda).map(|(r, l)| r / l).collect(),
            Scaling::Psd { k, lambda, .. } => {
                let rm = dmat_from_svec(rhs, *k);
                let out = DMatrix::from_fn(*k, *k, |i, j| 2.0 * rm[(i, j)] / (lambda[i] + lambda[j]));
                svec_from_dmat(&out)
            }
        }
    }

    /// Largest step alpha with value + alpha * delta remaining in the cone,
    /// given the cached factor of the current value.
    fn max_step(&self, which: StepVar, delta: &[f64]) -> f64 {
        match self {
            Scaling::Nonneg { .. } => f64::INFINITY, // handled by caller with raw slices
            Scaling::Psd { k, chol_s, chol_z, .. } => {
                let l = match which {
                    StepVar::S => chol_s,
                    StepVar::Z => chol_z,
                };
                let dm = dmat_from_svec(delta, *k);
                // min eig of L^{-1} D L^{-T}
                let linv = l
                    .clone()
                    .try_inverse()
                    .unwrap_or_else(|| DMatrix::identity(*k, *k));
                let m = &linv * dm * linv.transpose();
                let sym = (&m + &m.transpose()) * 0.5;
                let eig = sym.symmetric_eigen();
                let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
                if min >= 0.0 {
                    f64::INFINITY
                } else {
                    -1.0 / min
                }
            }
        }
    }

    fn identity(&self) -> Vec<f64> {
        match self {
            Scaling::Nonneg { w, .. } => vec![1.0; w.len()],
            Scaling::Psd { k, .. } => {
                let m = DMatrix::identity(*k, *k);
                svec_from_dmat(&m)
            }
        }
    }
}

#[derive(Clone, Copy)]
enum StepVar {
    S,
    Z,
}

fn orthant_max_step(value: &[f64], delta: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (&v, &d) in value.iter().zip(delta.iter()) {
        if d < 0.0 {
            alpha = alpha.min(-v / d);
        }
    }
    alpha
}

// ---------------------------------------------------------------------------
// G application helpers

fn g_apply(p: &ConicProblem, lay: &Layout, x: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (bi, blk) in p.cones.iter().enumerate() {
        let off = lay.offsets[bi];
        let len = blk.kind.vec_len();
        match &blk.g {
            GForm::NegIdentity { offset } => {
                for r in 0..len {
                    out[off + r] = -x[offset + r];
                }
            }
            GForm::Dense(rows) => {
                for (r, row) in rows.iter().enumerate() {
                    let mut acc = 0.0;
                    for (j, &c) in row.iter().enumerate() {
                        if c != 0.0 {
                            acc += c * x[j];
                        }
                    }
                    out[off + r] = acc;
                }
            }
        }
    }
}

fn g_t_accum(p: &ConicProblem, lay: &Layout, w: &[f64], out: &mut [f64]) {
    for (bi, blk) in p.cones.iter().enumerate() {
        let off = lay.offsets[bi];
        let len = blk.kind.vec_len();
        match &blk.g {
            GForm::NegIdentity { offset } => {
                for r in 0..len {
                    out[offset + r] -= w[off + r];
                }
            }
            GForm::Dense(rows) => {
                for (r, row) in rows.iter().enumerate() {
                    let wv = w[off + r];
                    if wv == 0.0 {
                        continue;
                    }
                    for (j, &c) in row.iter().enumerate() {
                        if c != 0.0 {
                            out[j] += c * wv;
                        }
                    }
                }
            }
        }
    }
}

/// Columns of G that are not identically zero in a dense block.
fn nonzero_columns(rows: &[Vec<f64>], n: usize) -> Vec<usize> {
    let mut seen = vec![false; n];
    for row in rows {
        for (j, &c) in row.iter().enumerate() {
            if c != 0.0 {
                seen[j] = true;
            }
        }
    }
    seen.iter()
        .enumerate()
        .filter_map(|(j, &s)| if s { Some(j) } else { None })
        .collect()
}

// ---------------------------------------------------------------------------
// Engine

pub fn solve_conic(p: &ConicProblem, opts: &SolveOptions) -> RawSolution {
    let n = p.num_vars;
    let m = p.eq_rows.len();
    let lay = layout(p);
    let kdim = lay.total;
    let deg = p.total_degree();

    let norm_b = p.eq_rhs.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
    let norm_h = p
        .cones
        .iter()
        .flat_map(|c| c.h.iter())
        .fold(0.0f64, |a, &v| a.max(v.abs()))
        .max(1.0);
    let norm_c = p.objective.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);

    // state
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; m];
    let mut s = Vec::with_capacity(kdim);
    let mut z = Vec::with_capacity(kdim);
    for blk in &p.cones {
        match blk.kind {
            ConeKind::Nonneg(l) => {
                s.extend(std::iter::repeat(1.0).take(l));
                z.extend(std::iter::repeat(1.0).take(l));
            }
            ConeKind::Psd(k) => {
                let id = svec_from_dmat(&DMatrix::identity(k, k));
                s.extend_from_slice(&id);
                z.extend_from_slice(&id);
            }
        }
    }
    let mut tau = 1.0f64;
    let mut kappa = 1.0f64;

    let mut trace = Vec::new();
    let mut best_marginal: Option<RawSolution> = None;

    // Dense A and a factorization of A A' + reg, reused by the polish step
    // that projects iterates onto the equality manifold.
    let a_mat = DMatrix::<f64>::from_fn(m, n, |i, j| p.eq_rows[i][j]);
    let aat_lu = if m > 0 {
        let mut aat = &a_mat * a_mat.transpose();
        for i in 0..m {
            aat[(i, i)] += 1e-12 * (1.0 + aat[(i, i)].abs());
        }
        Some(aat.lu())
    } else {
        None
    };
    // exact slack of the de-homogenized point
    let exact_slacks = |xhat: &[f64]| -> Vec<f64> {
        let mut gx = vec![0.0; kdim];
        g_apply(p, &lay, xhat, &mut gx);
        let mut out = vec![0.0; kdim];
        let mut off = 0;
        for blk in &p.cones {
            for r in 0..blk.kind.vec_len() {
                out[off + r] = blk.h[r] - gx[off + r];
            }
            off += blk.kind.vec_len();
        }
        out
    };
    let cone_violation = |slacks: &[f64]| -> f64 {
        let mut worst: f64 = 0.0;
        let mut off = 0;
        for blk in &p.cones {
            let len = blk.kind.vec_len();
            let sl = &slacks[off..off + len];
            let min = match blk.kind {
                ConeKind::Nonneg(_) => sl.iter().cloned().fold(f64::INFINITY, f64::min),
                ConeKind::Psd(k) => {
                    let mmat = dmat_from_svec(sl, k);
                    mmat.symmetric_eigen()
                        .eigenvalues
                        .iter()
                        .cloned()
                        .fold(f64::INFINITY, f64::min)
                }
            };
            worst = worst.max(-min);
            off += len;
        }
        worst
    };
    // project x onto {A x = b}; no-op when there are no equalities
    let eq_polish = |xhat: &[f64]| -> Vec<f64> {
        match &aat_lu {
            None => xhat.to_vec(),
            Some(lu) => {
                let xv = DVector::from_column_slice(xhat);
                let r = DVector::from_fn(m, |i, _| {
                    p.eq_rhs[i] - p.eq_rows[i].iter().zip(xhat.iter()).map(|(a, x)| a * x).sum::<f64>()
                });
                match lu.solve(&r) {
                    Some(w) => {
                        let dx = a_mat.transpose() * w;
                        (xv + dx).iter().cloned().collect()
                    }
                    None => xhat.to_vec(),
                }
            }
        }
    };
    // least-squares improvement of the dual residual over y
    let dual_polish = |yhat: &[f64], resid: &[f64]| -> Vec<f64> {
        match &aat_lu {
            None => yhat.to_vec(),
            Some(lu) => {
                let av = &a_mat * DVector::from_column_slice(resid);
                match lu.solve(&av) {
                    Some(dy) => yhat.iter().zip(dy.iter()).map(|(y, d)| y - d).collect(),
                    None => yhat.to_vec(),
                }
            }
        }
    };

    let fail = |msg: &str, iters: usize, trace: &[IterStat]| RawSolution {
        status: RawStatus::NumericFailure,
        x: vec![0.0; n],
        y: vec![0.0; m],
        z: vec![0.0; kdim],
        s: vec![0.0; kdim],
        primal_obj: f64::NAN,
        dual_obj: f64::NAN,
        gap: f64::NAN,
        pres: f64::NAN,
        dres: f64::NAN,
        iterations: iters,
        cert_primal_infeasible: None,
        cert_dual_infeasible: None,
        trace: trace.to_vec(),
        message: msg.to_string(),
    };

    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    for iter in 0..opts.max_iter {
        // residuals
        // rx = A'y + G'z + c tau
        let mut rx = vec![0.0; n];
        for (row, &yi) in p.eq_rows.iter().zip(y.iter()) {
            if yi != 0.0 {
                for (j, &a) in row.iter().enumerate() {
                    rx[j] += a * yi;
                }
            }
        }
        g_t_accum(p, &lay, &z, &mut rx);
        for j in 0..n {
            rx[j] += p.objective[j] * tau;
        }
        // ry = -A x + b tau
        let mut ry = vec![0.0; m];
        for (i, row) in p.eq_rows.iter().enumerate() {
            ry[i] = p.eq_rhs[i] * tau - dot(row, &x);
        }
        // rz = -G x + h tau - s
        let mut gx = vec![0.0; kdim];
        g_apply(p, &lay, &x, &mut gx);
        let mut rz = vec![0.0; kdim];
        {
            let mut off = 0;
            for blk in &p.cones {
                for r in 0..blk.kind.vec_len() {
                    rz[off + r] = -gx[off + r] + blk.h[r] * tau - s[off + r];
                }
                off += blk.kind.vec_len();
            }
        }
        // rtau = -c'x - b'y - h'z - kappa
        let cx = dot(&p.objective, &x);
        let by = dot(&p.eq_rhs, &y);
        let hz = {
            let mut acc = 0.0;
            let mut off = 0;
            for blk in &p.cones {
                for r in 0..blk.kind.vec_len() {
                    acc += blk.h[r] * z[off + r];
                }
                off += blk.kind.vec_len();
            }
            acc
        };
        let rtau = -cx - by - hz - kappa;

        let sz: f64 = dot(&s, &z);
        let mu = (sz + tau * kappa) / (deg as f64 + 1.0);

        // Exact convergence metrics of the de-homogenized, equality-polished
        // iterate: slacks are recomputed from x so the internal s drift
        // cannot mask or fake feasibility, and the dual residual gets a
        // least-squares correction over y.
        let xhat = eq_polish(&x.iter().map(|v| v / tau).collect::<Vec<f64>>());
        let shat = exact_slacks(&xhat);
        let zhat: Vec<f64> = z.iter().map(|v| v / tau).collect();
        let pcost: f64 = dot(&p.objective, &xhat);
        let eqres = p
            .eq_rows
            .iter()
            .zip(p.eq_rhs.iter())
            .map(|(row, &b)| (dot(row, &xhat) - b).abs())
            .fold(0.0f64, f64::max);
        let coneviol = cone_violation(&shat);
        let pres = (eqres / (1.0 + norm_b)).max(coneviol / (1.0 + norm_h));
        let yhat: Vec<f64> = {
            let y0: Vec<f64> = y.iter().map(|v| v / tau).collect();
            let mut resid = vec![0.0; n];
            for (row, &yi) in p.eq_rows.iter().zip(y0.iter()) {
                if yi != 0.0 {
                    for (j, &a) in row.iter().enumerate() {
                        resid[j] += a * yi;
                    }
                }
            }
            g_t_accum(p, &lay, &zhat, &mut resid);
            for j in 0..n {
                resid[j] += p.objective[j];
            }
            dual_polish(&y0, &resid)
        };
        let dres = {
            let mut resid = vec![0.0; n];
            for (row, &yi) in p.eq_rows.iter().zip(yhat.iter()) {
                if yi != 0.0 {
                    for (j, &a) in row.iter().enumerate() {
                        resid[j] += a * yi;
                    }
                }
            }
            g_t_accum(p, &lay, &zhat, &mut resid);
            for j in 0..n {
                resid[j] += p.objective[j];
            }
            resid.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + norm_c)
        };
        let dcost = {
            let byh: f64 = dot(&p.eq_rhs, &yhat);
            let hzh: f64 = {
                let mut acc = 0.0;
                let mut off = 0;
                for blk in &p.cones {
                    for r in 0..blk.kind.vec_len() {
                        acc += blk.h[r] * zhat[off + r];
                    }
                    off += blk.kind.vec_len();
                }
                acc
            };
            -(byh + hzh)
        };
        let gap_abs = (pcost - dcost).abs();
        let relgap = gap_abs / (1.0 + pcost.abs().max(dcost.abs()));

        if opts.keep_trace {
            trace.push(IterStat {
                pcost,
                dcost,
                pres,
                dres,
                gap: gap_abs,
            });
        }

        let make_solution = |status: RawStatus, message: String| RawSolution {
            status,
            x: xhat.clone(),
            y: yhat.clone(),
            z: zhat.clone(),
            s: shat.clone(),
            primal_obj: pcost,
            dual_obj: dcost,
            gap: gap_abs,
            pres,
            dres,
            iterations: iter,
            cert_primal_infeasible: None,
            cert_dual_infeasible: None,
            trace: trace.clone(),
            message,
        };

        // optimality
        if pres <= opts.feas_tol && dres <= opts.feas_tol && relgap <= opts.gap_tol {
            return make_solution(RawStatus::Optimal, "converged".into());
        }

        // primal infeasibility: A'y + G'z ~ 0 with b'y + h'z < 0
        let iota = -(by + hz);
        if iota > 1e-12 * norm_c.max(1.0) {
            let mut aty_gtz = vec![0.0; n];
            for (row, &yi) in p.eq_rows.iter().zip(y.iter()) {
                if yi != 0.0 {
                    for (j, &a) in row.iter().enumerate() {
                        aty_gtz[j] += a * yi;
                    }
                }
            }
            g_t_accum(p, &lay, &z, &mut aty_gtz);
            let res = aty_gtz.iter().map(|v| v * v).sum::<f64>().sqrt();
            if res <= opts.feas_tol * iota {
                let cy: Vec<f64> = y.iter().map(|v| v / iota).collect();
                let cz: Vec<f64> = z.iter().map(|v| v / iota).collect();
                let mut sol = make_solution(RawStatus::PrimalInfeasible, "primal infeasible".into());
                sol.cert_primal_infeasible = Some((cy, cz));
                return sol;
            }
        }
        // dual infeasibility: A x ~ 0, G x + s ~ 0 with c'x < 0
        if cx < -1e-12 * norm_b.max(norm_h) {
            let nax = p
                .eq_rows
                .iter()
                .map(|row| dot(row, &x))
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            let ngxs = gx
                .iter()
                .zip(s.iter())
                .map(|(g, si)| (g + si) * (g + si))
                .sum::<f64>()
                .sqrt();
            if nax.max(ngxs) <= opts.feas_tol * (-cx) {
                let cxv: Vec<f64> = x.iter().map(|v| v / (-cx)).collect();
                let mut sol = make_solution(RawStatus::DualInfeasible, "dual infeasible".into());
                sol.cert_dual_infeasible = Some(cxv);
                return sol;
            }
        }

        // keep a relaxed-tolerance snapshot for Marginal classification
        if pres <= 1e4 * opts.feas_tol && dres <= 1e4 * opts.feas_tol && relgap <= 1e4 * opts.gap_tol
        {
            let better = match &best_marginal {
                None => true,
                Some(b) => gap_abs < b.gap,
            };
            if better {
                best_marginal = Some(make_solution(
                    RawStatus::Marginal,
                    "within relaxed tolerances only".into(),
                ));
            }
        }

        // scalings
        let mut scalings = Vec::with_capacity(p.cones.len());
        {
            let mut off = 0;
            for blk in &p.cones {
                let len = blk.kind.vec_len();
                match Scaling::compute(blk.kind, &s[off..off + len], &z[off..off + len]) {
                    Some(sc) => scalings.push(sc),
                    None => {
                        return best_marginal.unwrap_or_else(|| {
                            fail("iterate left the cone interior", iter, &trace)
                        })
                    }
                }
                off += len;
            }
        }

        // KKT matrix [[ G' H^{-1} G, A'], [A, 0]]
        let dim = n + m;
        let mut kkt = DMatrix::<f64>::zeros(dim, dim);
        {
            let mut off = 0;
            for (bi, blk) in p.cones.iter().enumerate() {
                let len = blk.kind.vec_len();
                match &blk.g {
                    GForm::NegIdentity { offset } => {
                        let hinv = scalings[bi].h_inv_matrix();
                        for a in 0..len {
                            for b2 in 0..len {
                                kkt[(offset + a, offset + b2)] += hinv[(a, b2)];
                            }
                        }
                    }
                    GForm::Dense(rows) => {
                        let cols = nonzero_columns(rows, n);
                        // hcols[j] = H^{-1} (G e_j) for j in cols
                        let mut hcols: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
                        for &j in &cols {
                            let gcol: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                            hcols.push(scalings[bi].h_inv_apply(&gcol));
                        }
                        for &j in cols.iter() {
                            let gcol_j: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                            for (ak, &k2) in cols.iter().enumerate() {
                                if k2 < j {
                                    continue;
                                }
                                let v = dot(&gcol_j, &hcols[ak]);
                                kkt[(j, k2)] += v;
                                if k2 != j {
                                    kkt[(k2, j)] += v;
                                }
                            }
                        }
                    }
                }
                off += len;
            }
            let _ = off;
            for (i, row) in p.eq_rows.iter().enumerate() {
                for (j, &a) in row.iter().enumerate() {
                    kkt[(n + i, j)] = a;
                    kkt[(j, n + i)] = a;
                }
            }
            // tiny static regularization keeps the factorization stable when
            // the scaling matrix collapses near convergence
            for j in 0..n {
                kkt[(j, j)] += 1e-13;
            }
            for i in 0..m {
                kkt[(n + i, n + i)] -= 1e-13;
            }
        }
        let lu = kkt.clone().lu();

        // solve [[K11,A'],[A,0]] [p;q] = [u;v] with one round of iterative
        // refinement
        let solve_kkt = |u: &[f64], v: &[f64]| -> Option<(Vec<f64>, Vec<f64>)> {
            let mut rhs = DVector::<f64>::zeros(dim);
            for j in 0..n {
                rhs[j] = u[j];
            }
            for i in 0..m {
                rhs[n + i] = v[i];
            }
            let mut sol = lu.solve(&rhs)?;
            for _ in 0..2 {
                let resid = &rhs - &kkt * &sol;
                let corr = lu.solve(&resid)?;
                sol += corr;
            }
            let px: Vec<f64> = (0..n).map(|j| sol[j]).collect();
            let qy: Vec<f64> = (0..m).map(|i| sol[n + i]).collect();
            Some((px, qy))
        };

        // common: solve with (c,b,h) for the tau elimination
        let gthinvh = |ds_like: &[f64]| -> Vec<f64> {
            // G' H^{-1} applied to a cone vector
            let mut tmp = vec![0.0; kdim];
            let mut off = 0;
            for (bi, blk) in p.cones.iter().enumerate() {
                let len = blk.kind.vec_len();
                let hv = scalings[bi].h_inv_apply(&ds_like[off..off + len]);
                tmp[off..off + len].copy_from_slice(&hv);
                off += len;
            }
            let mut out = vec![0.0; n];
            g_t_accum(p, &lay, &tmp, &mut out);
            out
        };
        let h_vec: Vec<f64> = {
            let mut hv = vec![0.0; kdim];
            let mut off = 0;
            for blk in &p.cones {
                for r in 0..blk.kind.vec_len() {
                    hv[off + r] = blk.h[r];
                }
                off += blk.kind.vec_len();
            }
            hv
        };
        let u_t: Vec<f64> = {
            let ghh = gthinvh(&h_vec);
            (0..n).map(|j| ghh[j] - p.objective[j]).collect()
        };
        let sol_t = match solve_kkt(&u_t, &p.eq_rhs) {
            Some(s) => s,
            None => {
                return best_marginal
                    .unwrap_or_else(|| fail("singular KKT system", iter, &trace))
            }
        };
        // zeta2 = H^{-1}(G p2 - h)
        let zeta_of = |px: &[f64], d3p: Option<&[f64]>| -> Vec<f64> {
            let mut gpx = vec![0.0; kdim];
            g_apply(p, &lay, px, &mut gpx);
            let mut vecin = vec![0.0; kdim];
            for i in 0..kdim {
                vecin[i] = gpx[i]
                    + match d3p {
                        Some(d) => d[i],
                        None => -h_vec[i],
                    };
            }
            let mut out = vec![0.0; kdim];
            let mut off = 0;
            for (bi, blk) in p.cones.iter().enumerate() {
                let len = blk.kind.vec_len();
                let hv = scalings[bi].h_inv_apply(&vecin[off..off + len]);
                out[off..off + len].copy_from_slice(&hv);
                off += len;
            }
            out
        };
        let zeta_t = zeta_of(&sol_t.0, None);
        let q_t = dot(&p.objective, &sol_t.0) + dot(&p.eq_rhs, &sol_t.1) + dot(&h_vec, &zeta_t);

        // one Newton direction for given targets
        let direction = |gamma: f64,
                             eta: Option<(&[f64], f64)>|
         -> Option<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64, f64)> {
            // linear residual targets
            let lin = 1.0 - gamma;
            let d1: Vec<f64> = rx.iter().map(|v| -lin * v).collect();
            let d2: Vec<f64> = ry.iter().map(|v| -lin * v).collect();
            let d3: Vec<f64> = rz.iter().map(|v| -lin * v).collect();
            let d4 = -lin * rtau;
            // complementarity targets
            let mut ds_scaled = vec![0.0; kdim];
            {
                let mut off = 0;
                for (bi, blk) in p.cones.iter().enumerate() {
                    let len = blk.kind.vec_len();
                    let lam = scalings[bi].lambda_vec();
                    let lam_sq = scalings[bi].lambda_sq_vec();
                    let e = scalings[bi].identity();
                    let mut target = vec![0.0; len];
                    for r in 0..len {
                        target[r] = gamma * mu * e[r] - lam_sq[r];
                    }
                    if let Some((eta_vec, _)) = eta {
                        for r in 0..len {
                            target[r] -= eta_vec[off + r];
                        }
                    }
                    let dsb = scalings[bi].jordan_solve_lambda(&target);
                    ds_scaled[off..off + len].copy_from_slice(&dsb);
                    let _ = lam;
                    off += len;
                }
            }
            let dkt = gamma * mu - tau * kappa - eta.map(|e| e.1).unwrap_or(0.0);

            // d3' = d3 + W' ds_scaled
            let mut d3p = vec![0.0; kdim];
            {
                let mut off = 0;
                for (bi, blk) in p.cones.iter().enumerate() {
                    let len = blk.kind.vec_len();
                    let wtds = scalings[bi].w_t_apply(&ds_scaled[off..off + len]);
                    for r in 0..len {
                        d3p[off + r] = d3[off + r] + wtds[r];
                    }
                    off += len;
                }
            }
            let u1: Vec<f64> = {
                let gd = gthinvh(&d3p);
                (0..n).map(|j| d1[j] - gd[j]).collect()
            };
            let v1: Vec<f64> = d2.iter().map(|v| -v).collect();
            let (p1, q1) = solve_kkt(&u1, &v1)?;
            let zeta1 = zeta_of(&p1, Some(&d3p));
            let q1v = dot(&p.objective, &p1) + dot(&p.eq_rhs, &q1) + dot(&h_vec, &zeta1);
            let denom = kappa - tau * q_t;
            if denom.abs() < 1e-300 {
                return None;
            }
            let dtau = (dkt + tau * (d4 + q1v)) / denom;
            let dx: Vec<f64> = (0..n).map(|j| p1[j] + dtau * sol_t.0[j]).collect();
            let dy: Vec<f64> = (0..m).map(|i| q1[i] + dtau * sol_t.1[i]).collect();
            let dz: Vec<f64> = (0..kdim).map(|i| zeta1[i] + dtau * zeta_t[i]).collect();
            // ds = W'(ds_scaled - W dz)
            let mut ds = vec![0.0; kdim];
            {
                let mut off = 0;
                for (bi, blk) in p.cones.iter().enumerate() {
                    let len = blk.kind.vec_len();
                    let wdz = scalings[bi].w_apply(&dz[off..off + len]);
                    let inner: Vec<f64> = (0..len).map(|r| ds_scaled[off + r] - wdz[r]).collect();
                    let wt = scalings[bi].w_t_apply(&inner);
                    ds[off..off + len].copy_from_slice(&wt);
                    off += len;
                }
            }
            let dkappa = -d4 - dot(&p.objective, &dx) - dot(&p.eq_rhs, &dy) - dot(&h_vec, &dz);
            Some((dx, dy, dz, ds, dtau, dkappa))
        };

        // step length over all cones and scalars
        let max_alpha = |ds: &[f64], dz: &[f64], dtau: f64, dkappa: f64| -> f64 {
            let mut alpha = f64::INFINITY;
            let mut off = 0;
            for (bi, blk) in p.cones.iter().enumerate() {
                let len = blk.kind.vec_len();
                match blk.kind {
                    ConeKind::Nonneg(_) => {
                        alpha = alpha.min(orthant_max_step(
                            &s[off..off + len],
                            &ds[off..off + len],
                        ));
                        alpha = alpha.min(orthant_max_step(
                            &z[off..off + len],
                            &dz[off..off + len],
                        ));
                    }
                    ConeKind::Psd(_) => {
                        alpha = alpha.min(scalings[bi].max_step(StepVar::S, &ds[off..off + len]));
                        alpha = alpha.min(scalings[bi].max_step(StepVar::Z, &dz[off..off + len]));
                    }
                }
                off += len;
            }
            if dtau < 0.0 {
                alpha = alpha.min(-tau / dtau);
            }
            if dkappa < 0.0 {
                alpha = alpha.min(-kappa / dkappa);
            }
            alpha
        };

        // predictor
        let aff = match direction(0.0, None) {
            Some(d) => d,
            None => {
                return best_marginal
                    .unwrap_or_else(|| fail("Newton system unsolvable", iter, &trace))
            }
        };
        let alpha_aff = max_alpha(&aff.3, &aff.2, aff.4, aff.5).min(1.0);
        // mu after a full affine step
        let mu_aff = {
            let mut acc = 0.0;
            for i in 0..kdim {
                acc += (s[i] + alpha_aff * aff.3[i]) * (z[i] + alpha_aff * aff.2[i]);
            }
            acc += (tau + alpha_aff * aff.4) * (kappa + alpha_aff * aff.5);
            acc / (deg as f64 + 1.0)
        };
        let sigma = ((mu_aff / mu).max(0.0)).powi(3).clamp(1e-8, 0.999);

        // Mehrotra correction in scaled space
        let mut eta = vec![0.0; kdim];
        {
            let mut off = 0;
            for (bi, blk) in p.cones.iter().enumerate() {
                let len = blk.kind.vec_len();
                let a = scalings[bi].w_inv_t_apply(&aff.3[off..off + len]);
                let b2 = scalings[bi].w_apply(&aff.2[off..off + len]);
                let prod = scalings[bi].jordan(&a, &b2);
                eta[off..off + len].copy_from_slice(&prod);
                off += len;
            }
        }
        let eta_kt = aff.4 * aff.5;

        let comb = match direction(sigma, Some((&eta, eta_kt))) {
            Some(d) => d,
            None => {
                return best_marginal
                    .unwrap_or_else(|| fail("Newton system unsolvable", iter, &trace))
            }
        };
        let alpha = (opts.step_frac * max_alpha(&comb.3, &comb.2, comb.4, comb.5)).min(1.0);
        if !alpha.is_finite() || alpha <= 1e-13 {
            return best_marginal.unwrap_or_else(|| fail("step length collapsed", iter, &trace));
        }

        for j in 0..n {
            x[j] += alpha * comb.0[j];
        }
        for i in 0..m {
            y[i] += alpha * comb.1[i];
        }
        for i in 0..kdim {
            z[i] += alpha * comb.2[i];
            s[i] += alpha * comb.3[i];
        }
        tau += alpha * comb.4;
        kappa += alpha * comb.5;

        if !(tau.is_finite() && kappa.is_finite() && tau > 0.0) {
            return best_marginal.unwrap_or_else(|| fail("tau collapsed", iter, &trace));
        }
    }

    best_marginal.unwrap_or_else(|| fail("iteration limit reached", opts.max_iter, &trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::conic::{Builder, LinExpr};
    use crate::linalg::HermitianMatrix;

    /// minimize x subject to x >= 1 (1-dim orthant via LMI-style row)
    #[test]
    fn scalar_lower_bound() {
        let mut b = Builder::new();
        let xv = b.scalar();
        b.add_objective(LinExpr::var(xv, 1.0));
        b.add_nonneg_expr(LinExpr::var(xv, 1.0).plus_const(-1.0));
        let p = b.build();
        let sol = solve_conic(&p, &SolveOptions::default());
        assert_eq!(sol.status, RawStatus::Optimal);
        assert!((sol.primal_obj - 1.0).abs() < 1e-7, "{}", sol.primal_obj);
        assert!((sol.x[0] - 1.0).abs() < 1e-6);
    }

    /// maximize tr X s.t. 0 <= X <= I (2x2 Hermitian) -> 2
    #[test]
    fn trace_box() {
        let mut b = Builder::new();
        let xv = b.psd_var(2);
        let id = HermitianMatrix::identity(2);
        // maximize tr X == minimize -tr X
        b.add_objective(LinExpr::new().plus_psd_trace(&id.scale(-1.0), xv));
        // I - X >= 0
        b.add_lmi(crate::solver::conic::Lmi::new(2, id).psd_term(xv, |h| h.scale(-1.0)));
        let p = b.build();
        let sol = solve_conic(&p, &SolveOptions::default());
        assert_eq!(sol.status, RawStatus::Optimal);
        assert!((sol.primal_obj + 2.0).abs() < 1e-6, "{}", sol.primal_obj);
        // recovered X should be the identity
        let xm = crate::solver::svec::herm_from_embedded_svec(
            &sol.x[xv.offset..xv.offset + crate::solver::svec::svec_len(4)],
            2,
        );
        assert!((xm.matrix() - HermitianMatrix::identity(2).matrix()).max_abs() < 1e-5);
    }

    /// Hermitian LMI with an off-diagonal objective: minimize 2*Re X_01
    /// over density-matrix-like X (X >= 0, tr X = 1) gives -1.
    #[test]
    fn hermitian_offdiagonal_objective() {
        let mut b = Builder::new();
        let xv = b.psd_var(2);
        let sx = crate::linalg::pauli::sigma_x();
        b.add_objective(LinExpr::new().plus_psd_trace(&sx, xv));
        b.add_eq(
            LinExpr::new()
                .plus_psd_trace(&HermitianMatrix::identity(2), xv)
                .plus_const(-1.0),
        );
        let p = b.build();
        let sol = solve_conic(&p, &SolveOptions::default());
        assert_eq!(sol.status, RawStatus::Optimal);
        assert!((sol.primal_obj + 1.0).abs() < 1e-6, "{}", sol.primal_obj);
    }

    /// Infeasible: x >= 1 and x <= 0.
    #[test]
    fn detects_primal_infeasible() {
        let mut b = Builder::new();
        let xv = b.scalar();
        b.add_nonneg_expr(LinExpr::var(xv, 1.0).plus_const(-1.0));
        b.add_nonneg_expr(LinExpr::var(xv, -1.0));
        let p = b.build();
        let sol = solve_conic(&p, &SolveOptions::default());
        assert_eq!(sol.status, RawStatus::PrimalInfeasible);
        assert!(sol.cert_primal_infeasible.is_some());
    }

    /// Unbounded: minimize x with x <= 0 only.
    #[test]
    fn detects_dual_infeasible() {
        let mut b = Builder::new();
        let xv = b.scalar();
        b.add_objective(LinExpr::var(xv, 1.0));
        b.add_nonneg_expr(LinExpr::var(xv, -1.0));
        let p = b.build();
        let sol = solve_conic(&p, &SolveOptions::default());
        assert_eq!(sol.status, RawStatus::DualInfeasible);
        assert!(sol.cert_dual_infeasible.is_some());
    }
}
