use super::matrix::{Complex64, ComplexMatrix, HermitianMatrix};
use crate::error::Error;
use crate::Result;

/// Kronecker product A ⊗ B: entry ((i1,i2),(j1,j2)) = A[i1][j1] * B[i2][j2],
/// row-major on the composite index i1*rowsB + i2.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i1 in 0..a.rows() {
        for j1 in 0..a.cols() {
            let av = a[(i1, j1)];
            if av.norm_sqr() == 0.0 {
                continue;
            }
            for i2 in 0..b.rows() {
                for j2 in 0..b.cols() {
                    out[(i1 * b.rows() + i2, j1 * b.cols() + j2)] = av * b[(i2, j2)];
                }
            }
        }
    }
    out
}

/// Which tensor factor to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFactor {
    First,
    Second,
}

/// Partial trace of a square matrix on C^{d1} ⊗ C^{d2}.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: (usize, usize),
    which: TraceFactor,
) -> Result<ComplexMatrix> {
    let (d1, d2) = dims;
    if !m.is_square() || m.rows() != d1 * d2 {
        return Err(Error::DimensionMismatch(format!(
            "partial trace of {}x{} with factor dims ({d1},{d2})",
            m.rows(),
            m.cols()
        )));
    }
    match which {
        TraceFactor::Second => {
            let mut out = ComplexMatrix::zeros(d1, d1);
            for i in 0..d1 {
                for j in 0..d1 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..d2 {
                        acc += m[(i * d2 + k, j * d2 + k)];
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(out)
        }
        TraceFactor::First => {
            let mut out = ComplexMatrix::zeros(d2, d2);
            for i in 0..d2 {
                for j in 0..d2 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..d1 {
                        acc += m[(k * d2 + i, k * d2 + j)];
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(out)
        }
    }
}

/// Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a square
/// complex matrix. H is PSD iff the embedding is PSD; each eigenvalue of H
/// appears twice.
pub fn real_embedding(h: &ComplexMatrix) -> Vec<Vec<f64>> {
    assert!(h.is_square());
    let d = h.rows();
    let mut out = vec![vec![0.0; 2 * d]; 2 * d];
    for i in 0..d {
        for j in 0..d {
            let z = h[(i, j)];
            out[i][j] = z.re;
            out[i][j + d] = -z.im;
            out[i + d][j] = z.im;
            out[i + d][j + d] = z.re;
        }
    }
    out
}

/// Hermitian basis extraction for span{mats, mats^dag}.
///
/// Splits every input into Hermitian and anti-Hermitian parts and selects a
/// linearly independent subset by pivoted Gram-Schmidt. The flag reports
/// whether span{mats} was already closed under dagger.
pub fn hermitian_basis_of_span(
    mats: &[ComplexMatrix],
) -> Result<(Vec<HermitianMatrix>, bool)> {
    if mats.is_empty() {
        return Err(Error::InvalidArgument("empty matrix list".into()));
    }
    let dim = mats[0].rows();
    if mats.iter().any(|m| !m.is_square() || m.rows() != dim) {
        return Err(Error::DimensionMismatch(
            "all matrices must be square of equal dimension".into(),
        ));
    }
    let scale = mats.iter().map(|m| m.max_abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::InvalidArgument("all-zero matrix list".into()));
    }

    let mut candidates: Vec<HermitianMatrix> = Vec::with_capacity(2 * mats.len());
    for m in mats {
        candidates.push(HermitianMatrix::symmetrize(m.clone()));
        candidates.push(HermitianMatrix::symmetrize(
            m.anti_hermitian_part().scale_re(1.0),
        ));
    }
    let basis = independent_subset(&candidates, 1e-10);

    // span{mats} is Hermitian iff each dagger lies back in the complex span.
    let was_hermitian = span_contains_daggers(mats);
    Ok((basis, was_hermitian))
}

/// Pivoted Gram-Schmidt over vectorized Hermitian matrices; returns the
/// selected original (un-orthogonalized) matrices.
pub fn independent_subset(cands: &[HermitianMatrix], rel_tol: f64) -> Vec<HermitianMatrix> {
    let mut ortho: Vec<HermitianMatrix> = Vec::new();
    let mut picked: Vec<HermitianMatrix> = Vec::new();
    let scale = cands
        .iter()
        .map(|c| c.matrix().frobenius_norm())
        .fold(0.0, f64::max)
        .max(1.0);
    for cand in cands {
        let mut residual = cand.clone();
        for q in &ortho {
            let coeff = q.inner(&residual);
            residual = residual.sub(&q.scale(coeff));
        }
        let norm = residual.matrix().frobenius_norm();
        if norm > rel_tol * scale {
            ortho.push(residual.scale(1.0 / norm));
            picked.push(cand.clone());
        }
    }
    picked
}

fn span_contains_daggers(mats: &[ComplexMatrix]) -> bool {
    // Complex-linear least squares via normal equations on the vectorized
    // matrices; dimensions here are tiny.
    let n = mats.len();
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            gram[i][j] = mats[i].inner(&mats[j]);
        }
    }
    let scale = mats.iter().map(|m| m.frobenius_norm()).fold(0.0, f64::max);
    for m in mats {
        let target = m.dagger();
        let rhs: Vec<Complex64> = mats.iter().map(|b| b.inner(&target)).collect();
        match solve_complex(&gram, &rhs) {
            Some(coeffs) => {
                let mut recon = ComplexMatrix::zeros(m.rows(), m.cols());
                for (c, b) in coeffs.iter().zip(mats.iter()) {
                    recon = &recon + &b.scale(*c);
                }
                if (&recon - &target).frobenius_norm() > 1e-9 * scale.max(1.0) {
                    return false;
                }
            }
            None => return false,
        }
    }
    true
}

/// Gaussian elimination with partial pivoting for small complex systems.
/// Returns None when the matrix is numerically singular; callers treat that
/// as "no solution within the span".
fn solve_complex(a: &[Vec<Complex64>], b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = b.len();
    let mut m: Vec<Vec<Complex64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    for col in 0..n {
        let (pivot, pnorm) = (col..n)
            .map(|r| (r, m[r][col].norm()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())?;
        if pnorm < 1e-13 * scale {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                let sub = f * m[col][c];
                m[r][c] -= sub;
            }
            let sub = f * rhs[col];
            rhs[r] -= sub;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in (row + 1)..n {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Pauli matrices, used pervasively by fixtures and tests.
pub mod pauli {
    use super::{Complex64, ComplexMatrix, HermitianMatrix};

    pub fn sigma_x() -> HermitianMatrix {
        HermitianMatrix::symmetrize(
            ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
        )
    }

    pub fn sigma_y() -> HermitianMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(0.0, -1.0);
        m[(1, 0)] = Complex64::new(0.0, 1.0);
        HermitianMatrix::symmetrize(m)
    }

    pub fn sigma_z() -> HermitianMatrix {
        HermitianMatrix::diag(&[1.0, -1.0])
    }

    /// |0><0|
    pub fn psi0() -> HermitianMatrix {
        HermitianMatrix::diag(&[1.0, 0.0])
    }

    /// |1><1|
    pub fn psi1() -> HermitianMatrix {
        HermitianMatrix::diag(&[0.0, 1.0])
    }
}
