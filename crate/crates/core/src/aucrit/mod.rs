//! Two-state channel-extension criteria and counterexample machinery.
//!
//! For a pair of input states and a pair of output states, the
//! trace-norm monotonicity condition ||rho1 - t rho2||_1 >= ||rho1' -
//! t rho2'||_1 (for all t > 0) is necessary for a channel mapping one pair
//! to the other, and sufficient only at qubit size. The fidelity
//! criterion replaces it at d = 2 with three checkable conditions and a
//! constructive Stinespring synthesis of the channel. For d >= 3 the
//! transpose trick produces instances that satisfy the condition yet admit
//! no channel, certified by dual witnesses.

mod condition;
mod fidelity;
mod search;
mod witness;

pub use condition::{au_condition, AuOutcome, AuVerdict};
pub use fidelity::{
    construct_qubit_channel, fidelity_criterion, FailedCondition, FidelityCriterion,
};
pub use search::{embed_counterexample, transpose_counterexample_search, CounterexampleHit, SearchReport};
pub use witness::{verify_au_witness, AuWitnessPackage, AuWitnessVerdict};

use crate::error::Error;
use crate::linalg::HermitianMatrix;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Default tolerance band for the condition's minimum.
pub const AU_TOL: f64 = 1e-8;

/// A two-state extension instance: inputs of dimension d, outputs of
/// dimension d'.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuInstance {
    pub rho1: HermitianMatrix,
    pub rho2: HermitianMatrix,
    pub rho1p: HermitianMatrix,
    pub rho2p: HermitianMatrix,
}

impl AuInstance {
    pub fn new(
        rho1: HermitianMatrix,
        rho2: HermitianMatrix,
        rho1p: HermitianMatrix,
        rho2p: HermitianMatrix,
    ) -> Result<Self> {
        if rho1.dim() != rho2.dim() || rho1p.dim() != rho2p.dim() {
            return Err(Error::DimensionMismatch(
                "input and output pairs must have matching dimensions".into(),
            ));
        }
        for (label, r) in [
            ("rho1", &rho1),
            ("rho2", &rho2),
            ("rho1'", &rho1p),
            ("rho2'", &rho2p),
        ] {
            let min_eig = r.min_eig();
            if min_eig < -1e-9 {
                return Err(Error::NotPsd {
                    min_eig,
                    tolerance: 1e-9,
                });
            }
            if (r.trace() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "{label} has trace {}, expected 1",
                    r.trace()
                )));
            }
        }
        Ok(Self {
            rho1,
            rho2,
            rho1p,
            rho2p,
        })
    }

    pub fn din(&self) -> usize {
        self.rho1.dim()
    }

    pub fn dout(&self) -> usize {
        self.rho1p.dim()
    }

    /// The instance as an input/output pair list for the SDP machinery.
    pub fn pairs(&self) -> Vec<(HermitianMatrix, HermitianMatrix)> {
        vec![
            (self.rho1.clone(), self.rho1p.clone()),
            (self.rho2.clone(), self.rho2p.clone()),
        ]
    }
}
