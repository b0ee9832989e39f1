use nalgebra::{Complex, DMatrix};

use super::matrix::{Complex64, ComplexMatrix, HermitianMatrix};
use crate::error::Error;
use crate::Result;

/// Eigendecomposition of a Hermitian matrix: real eigenvalues ascending,
/// eigenvectors as the columns of a unitary.
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigendecomposition {
    /// Rebuild sum_k f(lambda_k) |v_k><v_k| as a Hermitian matrix.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let dim = self.values.len();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (k, &lam) in self.values.iter().enumerate() {
            let flam = f(lam);
            if flam == 0.0 {
                continue;
            }
            for i in 0..dim {
                let vi = self.vectors[(i, k)];
                for j in 0..dim {
                    out[(i, j)] += vi * self.vectors[(j, k)].conj() * Complex64::new(flam, 0.0);
                }
            }
        }
        HermitianMatrix::symmetrize(out)
    }
}

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn from_nalgebra(m: &DMatrix<Complex<f64>>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

impl HermitianMatrix {
    /// Full Hermitian eigendecomposition, eigenvalues ascending.
    pub fn eig(&self) -> Result<Eigendecomposition> {
        let n = self.dim();
        let na = to_nalgebra(self.matrix());
        let decomp = na
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(Error::EigFailure)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            decomp.eigenvalues[a]
                .partial_cmp(&decomp.eigenvalues[b])
                .expect("eigenvalues are finite")
        });
        let values: Vec<f64> = order.iter().map(|&k| decomp.eigenvalues[k]).collect();
        let vectors = ComplexMatrix::from_fn(n, n, |i, j| decomp.eigenvectors[(i, order[j])]);
        Ok(Eigendecomposition { values, vectors })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eig()?.values)
    }

    /// Sum of |eigenvalues|.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues()
            .expect("eigendecomposition of finite Hermitian matrix")
            .iter()
            .map(|l| l.abs())
            .sum()
    }

    /// Largest |eigenvalue|.
    pub fn op_norm(&self) -> f64 {
        self.eigenvalues()
            .expect("eigendecomposition of finite Hermitian matrix")
            .iter()
            .map(|l| l.abs())
            .fold(0.0, f64::max)
    }

    pub fn min_eig(&self) -> f64 {
        self.eigenvalues()
            .expect("eigendecomposition of finite Hermitian matrix")[0]
    }

    pub fn max_eig(&self) -> f64 {
        *self
            .eigenvalues()
            .expect("eigendecomposition of finite Hermitian matrix")
            .last()
            .unwrap()
    }

    /// PSD square root; eigenvalues in [-psd_tol, 0) are clamped to 0,
    /// anything below -psd_tol is an error.
    pub fn sqrt_psd(&self, psd_tol: f64) -> Result<HermitianMatrix> {
        let eig = self.eig()?;
        let min_eig = eig.values[0];
        if min_eig < -psd_tol {
            return Err(Error::NotPsd {
                min_eig,
                tolerance: psd_tol,
            });
        }
        Ok(eig.apply_spectral(|l| l.max(0.0).sqrt()))
    }

    /// Moore-Penrose pseudo-inverse square root on the support.
    pub fn pinv_sqrt(&self, cut: f64) -> Result<HermitianMatrix> {
        let eig = self.eig()?;
        Ok(eig.apply_spectral(|l| if l > cut { 1.0 / l.sqrt() } else { 0.0 }))
    }

    /// Orthogonal projector onto the span of eigenvectors with
    /// eigenvalue > cut.
    pub fn support_projector_with(&self, cut: f64) -> Result<HermitianMatrix> {
        let eig = self.eig()?;
        Ok(eig.apply_spectral(|l| if l > cut { 1.0 } else { 0.0 }))
    }

    /// Support projector at the standard numerical-rank tolerance,
    /// rejecting non-PSD inputs.
    pub fn support_projector(&self, psd_tol: f64) -> Result<HermitianMatrix> {
        let min_eig = self.min_eig();
        if min_eig < -psd_tol {
            return Err(Error::NotPsd {
                min_eig,
                tolerance: psd_tol,
            });
        }
        let cut = super::rank_tol(self.dim(), self.op_norm());
        self.support_projector_with(cut)
    }

    /// Numerical rank: eigenvalues above rank_tol.
    pub fn numerical_rank(&self) -> usize {
        let eig = self.eig().expect("eigendecomposition");
        let cut = super::rank_tol(self.dim(), self.op_norm());
        eig.values.iter().filter(|l| l.abs() > cut).count()
    }

    /// Generalized fidelity F(A,B) = tr sqrt(A^{1/2} B A^{1/2}) for PSD
    /// arguments.
    pub fn fidelity(&self, other: &Self, psd_tol: f64) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "fidelity of {}x{} vs {}x{}",
                self.dim(),
                self.dim(),
                other.dim(),
                other.dim()
            )));
        }
        let a_sqrt = self.sqrt_psd(psd_tol)?;
        let other_min = other.min_eig();
        if other_min < -psd_tol {
            return Err(Error::NotPsd {
                min_eig: other_min,
                tolerance: psd_tol,
            });
        }
        let sandwich =
            HermitianMatrix::symmetrize(&(a_sqrt.matrix() * other.matrix()) * a_sqrt.matrix());
        // Tiny negative eigenvalues from roundoff are clamped here; the
        // sandwich is PSD in exact arithmetic.
        let eig = sandwich.eig()?;
        Ok(eig.values.iter().map(|l| l.max(0.0).sqrt()).sum())
    }

    /// inf(A/B) = sup { lambda | A - lambda B >= 0 }.
    ///
    /// Returns 0 when supp(B) is not contained in supp(A) (the 0^{-1/2} :=
    /// infinity, 0 * infinity := 0 convention); errors on B = 0.
    pub fn inf_ratio(&self, other: &Self, psd_tol: f64) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("inf_ratio dims".into()));
        }
        if other.matrix().max_abs() == 0.0 {
            return Err(Error::InvalidArgument("inf_ratio with B = 0".into()));
        }
        for (h, name) in [(self, "A"), (other, "B")] {
            let min_eig = h.min_eig();
            if min_eig < -psd_tol {
                return Err(Error::NotPsd {
                    min_eig,
                    tolerance: psd_tol,
                })
                .map_err(|e| {
                    Error::InvalidArgument(format!("inf_ratio argument {name} not PSD: {e}"))
                });
            }
        }
        let cut = super::rank_tol(self.dim(), self.op_norm());
        let proj = self.support_projector_with(cut)?;
        // supp(B) ⊆ supp(A) iff (1-P) B (1-P) = 0 for PSD B.
        let one = ComplexMatrix::identity(self.dim());
        let q = &one - proj.matrix();
        let off = HermitianMatrix::symmetrize(&(&q * other.matrix()) * &q);
        if off.op_norm() > 10.0 * super::rank_tol(self.dim(), other.op_norm()) {
            return Ok(0.0);
        }
        let a_pinv_sqrt = self.pinv_sqrt(cut)?;
        let sandwich = HermitianMatrix::symmetrize(
            &(a_pinv_sqrt.matrix() * other.matrix()) * a_pinv_sqrt.matrix(),
        );
        let norm = sandwich.max_eig();
        if norm <= 0.0 {
            return Ok(0.0);
        }
        Ok(1.0 / norm)
    }
}

/// Complex singular value decomposition M = U diag(s) V^dag.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v_dagger: ComplexMatrix,
}

impl ComplexMatrix {
    pub fn svd(&self) -> Result<Svd> {
        let na = to_nalgebra(self);
        let svd = na
            .try_svd(true, true, f64::EPSILON, 10_000)
            .ok_or(Error::EigFailure)?;
        Ok(Svd {
            u: from_nalgebra(&svd.u.ok_or(Error::EigFailure)?),
            singular_values: svd.singular_values.iter().copied().collect(),
            v_dagger: from_nalgebra(&svd.v_t.ok_or(Error::EigFailure)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_z() -> HermitianMatrix {
        HermitianMatrix::diag(&[1.0, -1.0])
    }

    #[test]
    fn norms_of_sigma_z() {
        assert!((sigma_z().trace_norm() - 2.0).abs() < 1e-14);
        assert!((sigma_z().op_norm() - 1.0).abs() < 1e-14);
        assert!((sigma_z().min_eig() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_of_diagonal_difference() {
        // rho1 = diag(1/3,2/3), rho2 = diag(1/5,4/5): |1/3-1/5| + |2/3-4/5| = 4/15
        let d = HermitianMatrix::diag(&[1.0 / 3.0 - 1.0 / 5.0, 2.0 / 3.0 - 4.0 / 5.0]);
        assert!((d.trace_norm() - 4.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_psd_identity_and_diag() {
        let id = HermitianMatrix::identity(3);
        let r = id.sqrt_psd(1e-9).unwrap();
        assert!((r.matrix() - &ComplexMatrix::identity(3)).max_abs() < 1e-14);
        let d = HermitianMatrix::diag(&[4.0, 9.0]);
        let r = d.sqrt_psd(1e-9).unwrap();
        assert!((r.matrix() - HermitianMatrix::diag(&[2.0, 3.0]).matrix()).max_abs() < 1e-13);
    }

    #[test]
    fn sqrt_psd_rejects_indefinite() {
        assert!(matches!(sigma_z().sqrt_psd(1e-9), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn fidelity_examples() {
        let psi0 = HermitianMatrix::diag(&[1.0, 0.0]);
        let psi1 = HermitianMatrix::diag(&[0.0, 1.0]);
        let mixed = HermitianMatrix::diag(&[0.5, 0.5]);
        // F(rho, rho) = tr rho = 1
        assert!((psi0.fidelity(&psi0, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        // orthogonal supports
        assert!(psi0.fidelity(&psi1, 1e-9).unwrap().abs() < 1e-12);
        // pure vs maximally mixed: 1/sqrt(2)
        let f = psi0.fidelity(&mixed, 1e-9).unwrap();
        assert!((f - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn inf_ratio_examples() {
        let a = HermitianMatrix::diag(&[1.0 / 3.0, 2.0 / 3.0]);
        assert!((a.inf_ratio(&a, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        // support not contained
        let psi0 = HermitianMatrix::diag(&[1.0, 0.0]);
        let mixed = HermitianMatrix::diag(&[0.5, 0.5]);
        assert_eq!(psi0.inf_ratio(&mixed, 1e-9).unwrap(), 0.0);
        // diagonal ratio: min(5/3, 5/6) = 5/6
        let b = HermitianMatrix::diag(&[1.0 / 5.0, 4.0 / 5.0]);
        assert!((a.inf_ratio(&b, 1e-9).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        // residual A - inf_ratio*B has min eigenvalue 0
        let r = a.sub(&b.scale(5.0 / 6.0));
        assert!(r.min_eig().abs() < 1e-12);
        assert!(matches!(
            a.inf_ratio(&HermitianMatrix::zeros(2), 1e-9),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn support_projector_examples() {
        let id = HermitianMatrix::identity(2);
        assert!((id.support_projector(1e-9).unwrap().matrix() - &ComplexMatrix::identity(2))
            .max_abs()
            < 1e-14);
        let p = HermitianMatrix::diag(&[1.0, 0.0]);
        assert!((p.support_projector(1e-9).unwrap().matrix() - p.matrix()).max_abs() < 1e-14);
        // full-rank sum of two states
        let sum = HermitianMatrix::diag(&[1.5, 0.5]);
        assert_eq!(sum.support_projector(1e-9).unwrap().numerical_rank(), 2);
    }

    #[test]
    fn complex_svd_round_trip() {
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(1.0, 0.2), Complex64::new(0.3, -0.4)],
            vec![Complex64::new(0.0, 1.0), Complex64::new(0.5, 0.0)],
        ])
        .unwrap();
        let svd = m.svd().unwrap();
        let s = ComplexMatrix::diag(&svd.singular_values);
        let recon = &(&svd.u * &s) * &svd.v_dagger;
        assert!((&recon - &m).max_abs() < 1e-12);
    }
}
