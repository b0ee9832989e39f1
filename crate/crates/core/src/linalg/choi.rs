use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, HermitianMatrix};
use super::ops::{partial_trace, tensor, TraceFactor};
use crate::error::Error;
use crate::Result;

/// Choi matrix of a linear map M_d -> M_{d'}: a Hermitian operator on the
/// (output ⊗ input) tensor space, C = (T ⊗ id)(|Omega><Omega|).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiMatrix {
    din: usize,
    dout: usize,
    matrix: HermitianMatrix,
}

impl ChoiMatrix {
    pub fn new(din: usize, dout: usize, matrix: HermitianMatrix) -> Result<Self> {
        if matrix.dim() != din * dout {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix for ({dout} ⊗ {din}) must have dimension {}, got {}",
                din * dout,
                matrix.dim()
            )));
        }
        Ok(Self { din, dout, matrix })
    }

    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// tr_1[C]: the input-side marginal, equal to the identity exactly for
    /// trace-preserving maps.
    pub fn input_marginal(&self) -> HermitianMatrix {
        let m = partial_trace(self.matrix.matrix(), (self.dout, self.din), TraceFactor::First)
            .expect("Choi dimensions are consistent");
        HermitianMatrix::symmetrize(m)
    }
}

/// Schroedinger-picture action T(X) = tr_2[C (1 ⊗ X^T)].
pub fn apply_choi(c: &ChoiMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !x.is_square() || x.rows() != c.din() {
        return Err(Error::DimensionMismatch(format!(
            "apply_choi: input must be {0}x{0}, got {1}x{2}",
            c.din(),
            x.rows(),
            x.cols()
        )));
    }
    let one = ComplexMatrix::identity(c.dout());
    let rhs = tensor(&one, &x.transpose());
    let prod = c.hermitian().matrix() * &rhs;
    partial_trace(&prod, (c.dout(), c.din()), TraceFactor::Second)
}

/// Heisenberg-picture (dual) action T*(Y) = tr_1[C^dag (Y ⊗ 1)]^T.
pub fn dual_apply(c: &ChoiMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !y.is_square() || y.rows() != c.dout() {
        return Err(Error::DimensionMismatch(format!(
            "dual_apply: input must be {0}x{0}, got {1}x{2}",
            c.dout(),
            y.rows(),
            y.cols()
        )));
    }
    let one = ComplexMatrix::identity(c.din());
    let rhs = tensor(y, &one);
    let prod = c.hermitian().matrix().dagger().matmul(&rhs);
    Ok(partial_trace(&prod, (c.dout(), c.din()), TraceFactor::First)?.transpose())
}

/// Build the Choi matrix of a map from its action on the matrix units,
/// C = sum_ij T(E_ij) ⊗ E_ij.
pub fn choi_of_map(
    din: usize,
    dout: usize,
    mut action: impl FnMut(&ComplexMatrix) -> Result<ComplexMatrix>,
) -> Result<ChoiMatrix> {
    let mut acc = ComplexMatrix::zeros(din * dout, din * dout);
    for i in 0..din {
        for j in 0..din {
            let image = action(&ComplexMatrix::matrix_unit(din, i, j))?;
            if image.rows() != dout || image.cols() != dout {
                return Err(Error::DimensionMismatch(
                    "map image has wrong output dimension".into(),
                ));
            }
            acc = &acc + &tensor(&image, &ComplexMatrix::matrix_unit(din, i, j));
        }
    }
    ChoiMatrix::new(din, dout, HermitianMatrix::symmetrize(acc))
}
