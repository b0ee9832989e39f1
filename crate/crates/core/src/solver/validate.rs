//! Independent certificate validation.
//!
//! Every infeasibility verdict surfaced by the library is backed by an
//! improving ray that is re-checked here from the raw problem data with
//! plain eigenvalue arithmetic. Nothing in this module looks at solver
//! state.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::conic::{ConeKind, ConicProblem, GForm};
use super::svec::smat;

/// Farkas-type improving ray.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ImprovingRay {
    /// Proof of primal infeasibility: A'y + G'z = 0, z in K*, b'y + h'z < 0.
    PrimalInfeasible { y: Vec<f64>, z: Vec<f64> },
    /// Proof of dual infeasibility (primal unboundedness): A x = 0,
    /// -G x in K, c'x < 0.
    DualInfeasible { x: Vec<f64> },
}

/// Result of re-checking a certificate against the problem data.
#[derive(Debug, Clone)]
pub struct CertificateCheck {
    pub valid: bool,
    /// Residual of the linear (adjoint or kernel) condition, relative.
    pub residual: f64,
    /// Most negative cone eigenvalue of the ray, relative.
    pub min_cone_eig: f64,
    /// The strictly-signed objective quantity, after normalization.
    pub improvement: f64,
}

fn min_eig_of_block(kind: ConeKind, v: &[f64]) -> f64 {
    match kind {
        ConeKind::Nonneg(_) => v.iter().cloned().fold(f64::INFINITY, f64::min),
        ConeKind::Psd(k) => {
            let rows = smat(v, k);
            let m = DMatrix::from_fn(k, k, |i, j| rows[i][j]);
            m.symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min)
        }
    }
}

fn block_slices<'a>(p: &ConicProblem, v: &'a [f64]) -> Vec<(ConeKind, &'a [f64])> {
    let mut out = Vec::with_capacity(p.cones.len());
    let mut off = 0;
    for blk in &p.cones {
        let len = blk.kind.vec_len();
        out.push((blk.kind, &v[off..off + len]));
        off += len;
    }
    out
}

/// Check a primal-infeasibility ray: A'y + G'z ~ 0 with z in the dual cone
/// and b'y + h'z <= -margin after normalizing the ray to unit max norm.
pub fn validate_primal_ray(
    p: &ConicProblem,
    y: &[f64],
    z: &[f64],
    feas_tol: f64,
    psd_tol: f64,
) -> CertificateCheck {
    let n = p.num_vars;
    let scale = y
        .iter()
        .chain(z.iter())
        .fold(0.0f64, |a, &v| a.max(v.abs()))
        .max(1e-300);
    let ys: Vec<f64> = y.iter().map(|v| v / scale).collect();
    let zs: Vec<f64> = z.iter().map(|v| v / scale).collect();

    let mut adj = vec![0.0; n];
    for (row, &yi) in p.eq_rows.iter().zip(ys.iter()) {
        if yi != 0.0 {
            for (j, &a) in row.iter().enumerate() {
                adj[j] += a * yi;
            }
        }
    }
    {
        let mut off = 0;
        for blk in &p.cones {
            let len = blk.kind.vec_len();
            match &blk.g {
                GForm::NegIdentity { offset } => {
                    for r in 0..len {
                        adj[offset + r] -= zs[off + r];
                    }
                }
                GForm::Dense(rows) => {
                    for (r, row) in rows.iter().enumerate() {
                        let w = zs[off + r];
                        if w != 0.0 {
                            for (j, &c) in row.iter().enumerate() {
                                if c != 0.0 {
                                    adj[j] += c * w;
                                }
                            }
                        }
                    }
                }
            }
            off += len;
        }
    }
    let residual = adj.iter().map(|v| v * v).sum::<f64>().sqrt();
    let min_cone_eig = block_slices(p, &zs)
        .into_iter()
        .map(|(kind, sl)| min_eig_of_block(kind, sl))
        .fold(f64::INFINITY, f64::min);
    let by: f64 = p.eq_rhs.iter().zip(ys.iter()).map(|(b, y)| b * y).sum();
    let hz: f64 = {
        let mut acc = 0.0;
        let mut off = 0;
        for blk in &p.cones {
            for r in 0..blk.kind.vec_len() {
                acc += blk.h[r] * zs[off + r];
            }
            off += blk.kind.vec_len();
        }
        acc
    };
    let improvement = -(by + hz);
    CertificateCheck {
        valid: residual <= feas_tol.max(1e-7) && min_cone_eig >= -psd_tol && improvement > 0.0,
        residual,
        min_cone_eig,
        improvement,
    }
}

/// Check a dual-infeasibility ray: A x ~ 0, -G x in K, c'x <= -margin after
/// normalization.
pub fn validate_dual_ray(
    p: &ConicProblem,
    x: &[f64],
    feas_tol: f64,
    psd_tol: f64,
) -> CertificateCheck {
    let scale = x.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-300);
    let xs: Vec<f64> = x.iter().map(|v| v / scale).collect();
    let ax_res = p
        .eq_rows
        .iter()
        .map(|row| row.iter().zip(xs.iter()).map(|(a, x)| a * x).sum::<f64>())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    // -G x must be in the cone
    let mut gx = vec![0.0; p.cone_dim()];
    {
        let mut off = 0;
        for blk in &p.cones {
            let len = blk.kind.vec_len();
            match &blk.g {
                GForm::NegIdentity { offset } => {
                    for r in 0..len {
                        gx[off + r] = -xs[offset + r];
                    }
                }
                GForm::Dense(rows) => {
                    for (r, row) in rows.iter().enumerate() {
                        gx[off + r] = row.iter().zip(xs.iter()).map(|(c, x)| c * x).sum();
                    }
                }
            }
            off += len;
        }
    }
    let neg_gx: Vec<f64> = gx.iter().map(|v| -v).collect();
    let min_cone_eig = block_slices(p, &neg_gx)
        .into_iter()
        .map(|(kind, sl)| min_eig_of_block(kind, sl))
        .fold(f64::INFINITY, f64::min);
    let cx: f64 = p.objective.iter().zip(xs.iter()).map(|(c, x)| c * x).sum();
    CertificateCheck {
        valid: ax_res <= feas_tol.max(1e-7) && min_cone_eig >= -psd_tol && cx < 0.0,
        residual: ax_res,
        min_cone_eig,
        improvement: -cx,
    }
}
