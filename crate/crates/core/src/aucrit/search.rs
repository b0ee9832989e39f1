use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::condition::{au_condition, AuVerdict};
use super::witness::{verify_au_witness, AuWitnessPackage};
use super::AuInstance;
use crate::cpcheck::{preprocess, WITNESS_MARGIN};
use crate::error::Error;
use crate::extend::cptp_delta;
use crate::linalg::{Complex64, ComplexMatrix, HermitianMatrix};
use crate::solver::Tolerances;
use crate::Result;

/// A random instance on which the trace-norm condition holds while the
/// channel program certifies infeasibility.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleHit {
    pub trial: usize,
    pub instance: AuInstance,
    pub delta_tp: f64,
    pub package: AuWitnessPackage,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub dimension: usize,
    pub trials: usize,
    pub seed: u64,
    pub hits: Vec<CounterexampleHit>,
    pub hit_fraction: f64,
}

fn sample_state(rng: &mut ChaCha8Rng, d: usize) -> HermitianMatrix {
    // entries of A uniform on the unit square of the complex plane
    let a = ComplexMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen(), rng.gen()));
    let aa = HermitianMatrix::symmetrize(&a * &a.dagger());
    aa.scale(1.0 / aa.trace())
}

/// Sample transpose-image instances rho_i -> rho_i^T and collect the ones
/// whose channel program is infeasible, with validated dual witnesses.
///
/// The condition holds analytically for every sample (transposition
/// preserves each pencil spectrum); it is re-asserted anyway. Trials are
/// seeded individually from (seed, trial), so runs are reproducible and
/// order-independent.
pub fn transpose_counterexample_search(
    d: usize,
    trials: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<SearchReport> {
    if d < 2 {
        return Err(Error::InvalidArgument("dimension must be at least 2".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial".into()));
    }
    let mut hits = Vec::new();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64 + 1);
        let rho1 = sample_state(&mut rng, d);
        let rho2 = sample_state(&mut rng, d);
        let inst = AuInstance::new(
            rho1.clone(),
            rho2.clone(),
            rho1.transpose(),
            rho2.transpose(),
        )?;
        let au = au_condition(&inst)?;
        if au.verdict != AuVerdict::Holds {
            return Err(Error::NumericFailure(format!(
                "trial {trial}: the condition must hold for transpose images, got {:?} \
                 (min_f {:.3e})",
                au.verdict, au.min_f
            )));
        }
        let spec = preprocess(&inst.pairs(), &[])?;
        let res = cptp_delta(&spec, 1.0, tols)?;
        if res.delta_tp <= WITNESS_MARGIN {
            continue;
        }
        let Some(w) = res.witness else { continue };
        let Some(check) = res.witness_check else { continue };
        if !check.valid || w.h.len() != 2 {
            continue;
        }
        let package = AuWitnessPackage {
            h0: w.h0.clone().expect("trace-side witness carries H0"),
            h1: w.h[0].clone(),
            h2: w.h[1].clone(),
            objective_bound: check.objective + 1e-9,
            eps_range: None,
        };
        let verdict = verify_au_witness(&inst, &package, &[], tols.psd_tol)?;
        if !verdict.is_valid() {
            return Err(Error::NumericFailure(format!(
                "trial {trial}: extracted witness failed re-verification: {verdict:?}"
            )));
        }
        hits.push(CounterexampleHit {
            trial,
            instance: inst,
            delta_tp: res.delta_tp,
            package,
        });
    }
    let hit_fraction = hits.len() as f64 / trials as f64;
    Ok(SearchReport {
        dimension: d,
        trials,
        seed,
        hits,
        hit_fraction,
    })
}

/// Zero-pad an instance into larger dimensions; pencil spectra and hence
/// the trace-norm condition are unchanged, while the channel obstruction
/// survives the embedding.
pub fn embed_counterexample(base: &AuInstance, d: usize, dp: usize) -> Result<AuInstance> {
    if d < base.din() || dp < base.dout() {
        return Err(Error::InvalidArgument(
            "target dimensions must not shrink the instance".into(),
        ));
    }
    if d < 3 || dp < 3 {
        return Err(Error::InvalidArgument(
            "embeddings below dimension 3 cannot carry a counterexample".into(),
        ));
    }
    let pad = |h: &HermitianMatrix, dim: usize| {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                m[(i, j)] = h.matrix()[(i, j)];
            }
        }
        HermitianMatrix::symmetrize(m)
    };
    let embedded = AuInstance::new(
        pad(&base.rho1, d),
        pad(&base.rho2, d),
        pad(&base.rho1p, dp),
        pad(&base.rho2p, dp),
    )?;
    let au = au_condition(&embedded)?;
    if au.verdict != AuVerdict::Holds {
        return Err(Error::NumericFailure(format!(
            "embedding unexpectedly broke the condition (min_f {:.3e})",
            au.min_f
        )));
    }
    Ok(embedded)
}
