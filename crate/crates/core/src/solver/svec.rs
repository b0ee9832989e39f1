//! Symmetric-vector packing and the Hermitian-to-real bridge.
//!
//! Real symmetric k x k matrices are packed into vectors of length
//! k(k+1)/2 with off-diagonal entries scaled by sqrt(2), so that the
//! Euclidean inner product of packed vectors equals tr[AB]. Complex
//! Hermitian data enters the solver through the real symmetric embedding
//! [[Re, -Im], [Im, Re]]; a factor 1/2 on coefficient matrices keeps
//! trace pairings exact.

use crate::linalg::{real_embedding, ComplexMatrix, Complex64, HermitianMatrix};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

pub fn svec_len(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Pack a dense symmetric matrix (given as full rows) into svec order:
/// (0,0), (1,0), (1,1), (2,0), ... row-major lower triangle.
pub fn svec(mat: &[Vec<f64>]) -> Vec<f64> {
    let k = mat.len();
    let mut out = Vec::with_capacity(svec_len(k));
    for i in 0..k {
        for j in 0..=i {
            if i == j {
                out.push(mat[i][i]);
            } else {
                out.push(SQRT2 * 0.5 * (mat[i][j] + mat[j][i]));
            }
        }
    }
    out
}

/// Unpack svec into a dense symmetric matrix.
pub fn smat(v: &[f64], k: usize) -> Vec<Vec<f64>> {
    debug_assert_eq!(v.len(), svec_len(k));
    let mut out = vec![vec![0.0; k]; k];
    let mut idx = 0;
    for i in 0..k {
        for j in 0..=i {
            if i == j {
                out[i][i] = v[idx];
            } else {
                let x = v[idx] / SQRT2;
                out[i][j] = x;
                out[j][i] = x;
            }
            idx += 1;
        }
    }
    out
}

/// svec of the real embedding of a Hermitian matrix.
pub fn svec_embed(h: &HermitianMatrix) -> Vec<f64> {
    svec(&real_embedding(h.matrix()))
}

/// Coefficient vector such that dot(coeff, svec(M)) = tr[G * herm(M)] for
/// any real symmetric M living on the embedded block of dimension 2k.
pub fn trace_pair_coeff(g: &HermitianMatrix) -> Vec<f64> {
    svec_embed(g).iter().map(|x| 0.5 * x).collect()
}

/// Extract the Hermitian matrix represented by an embedded-block svec
/// vector: for M = [[A, B], [B', D]] the represented operator is
/// (A + D)/2 + i (B' - B)/2.
pub fn herm_from_embedded_svec(v: &[f64], k: usize) -> HermitianMatrix {
    let m = smat(v, 2 * k);
    let mut out = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let re = 0.5 * (m[i][j] + m[i + k][j + k]);
            // top-right block of the embedding carries -Im H, so the
            // imaginary part is the antisymmetric part of B transposed
            let im = 0.5 * (m[j][i + k] - m[i][j + k]);
            out[(i, j)] = Complex64::new(re, im);
        }
    }
    HermitianMatrix::symmetrize(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    #[test]
    fn svec_inner_product_is_trace() {
        let a = vec![vec![1.0, 2.0, 0.5], vec![2.0, -1.0, 0.0], vec![0.5, 0.0, 3.0]];
        let b = vec![vec![0.3, -1.0, 0.2], vec![-1.0, 2.0, 1.5], vec![0.2, 1.5, -0.7]];
        let dot: f64 = svec(&a).iter().zip(svec(&b)).map(|(x, y)| x * y).sum();
        let mut tr = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                tr += a[i][j] * b[j][i];
            }
        }
        assert!((dot - tr).abs() < 1e-13);
        let back = smat(&svec(&a), 3);
        for i in 0..3 {
            for j in 0..3 {
                assert!((back[i][j] - a[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn trace_pairing_through_embedding() {
        let g = pauli::sigma_y();
        let h = pauli::sigma_y();
        let coeff = trace_pair_coeff(&g);
        let v = svec_embed(&h);
        let dot: f64 = coeff.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
        // tr[sigma_y sigma_y] = 2
        assert!((dot - 2.0).abs() < 1e-13);
    }

    #[test]
    fn herm_round_trip_through_embedding() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = Complex64::new(0.3, 0.0);
        m[(0, 1)] = Complex64::new(0.1, -0.8);
        m[(1, 0)] = Complex64::new(0.1, 0.8);
        m[(1, 1)] = Complex64::new(-1.2, 0.0);
        let h = HermitianMatrix::new(m).unwrap();
        let back = herm_from_embedded_svec(&svec_embed(&h), 2);
        assert!((back.matrix() - h.matrix()).max_abs() < 1e-13);
    }
}
