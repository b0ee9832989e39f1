use super::CLUSTER_TOL;
use crate::error::Error;
use crate::linalg::{Complex64, ComplexMatrix, HermitianMatrix};
use crate::Result;

/// Common eigenbasis of a family of commuting Hermitian matrices.
///
/// Diagonalizes the first matrix, then refines the basis inside every
/// degenerate eigenvalue cluster with the next matrix, and so on; clusters
/// are split at gaps above `CLUSTER_TOL` (relative to the operator norm).
/// Returns the unitary whose columns are the common eigenvectors.
pub fn simultaneous_diagonalize(
    mats: &[HermitianMatrix],
    commute_tol: f64,
) -> Result<ComplexMatrix> {
    if mats.is_empty() {
        return Err(Error::InvalidArgument("no matrices".into()));
    }
    let d = mats[0].dim();
    if mats.iter().any(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch("dimensions differ".into()));
    }
    let scale = mats.iter().map(|m| m.op_norm()).fold(0.0f64, f64::max).max(1e-300);
    // commutators first: fail fast with the measured violation
    let mut worst: f64 = 0.0;
    for i in 0..mats.len() {
        for j in (i + 1)..mats.len() {
            let ab = mats[i].matrix() * mats[j].matrix();
            let ba = mats[j].matrix() * mats[i].matrix();
            worst = worst.max((&ab - &ba).max_abs() / (scale * scale));
        }
    }
    if worst > commute_tol {
        return Err(Error::NonCommuting(worst));
    }

    let mut u = ComplexMatrix::identity(d);
    // clusters of column indices on which all processed matrices are scalar
    let mut clusters: Vec<Vec<usize>> = vec![(0..d).collect()];
    for m in mats {
        let mut next_clusters = Vec::new();
        for cluster in &clusters {
            if cluster.len() == 1 {
                next_clusters.push(cluster.clone());
                continue;
            }
            // restriction of m to the cluster subspace
            let k = cluster.len();
            let mut block = ComplexMatrix::zeros(k, k);
            for (a, &ca) in cluster.iter().enumerate() {
                for (b, &cb) in cluster.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for r in 0..d {
                        for s in 0..d {
                            acc += u[(r, ca)].conj() * m.matrix()[(r, s)] * u[(s, cb)];
                        }
                    }
                    block[(a, b)] = acc;
                }
            }
            let eig = HermitianMatrix::symmetrize(block).eig()?;
            // rotate the cluster columns of u
            let mut new_cols = vec![vec![Complex64::new(0.0, 0.0); d]; k];
            for (b, col) in new_cols.iter_mut().enumerate() {
                for (a, &ca) in cluster.iter().enumerate() {
                    for (r, val) in col.iter_mut().enumerate() {
                        *val += u[(r, ca)] * eig.vectors[(a, b)];
                    }
                }
            }
            for (b, col) in new_cols.iter().enumerate() {
                for r in 0..d {
                    u[(r, cluster[b])] = col[r];
                }
            }
            // split by eigenvalue gaps
            let mut group = vec![cluster[0]];
            for b in 1..k {
                if (eig.values[b] - eig.values[b - 1]).abs() > CLUSTER_TOL * scale {
                    next_clusters.push(group);
                    group = Vec::new();
                }
                group.push(cluster[b]);
            }
            next_clusters.push(group);
        }
        clusters = next_clusters;
    }

    // verification: all matrices diagonal in the constructed basis
    let udag = u.dagger();
    for m in mats {
        let rotated = &(&udag * m.matrix()) * &u;
        let mut offdiag: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    offdiag = offdiag.max(rotated[(i, j)].norm());
                }
            }
        }
        if offdiag > 1e-8 * scale {
            return Err(Error::NonCommuting(offdiag / scale));
        }
    }
    Ok(u)
}
