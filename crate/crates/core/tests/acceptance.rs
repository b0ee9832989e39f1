//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured quantities (run with `--nocapture` to see them).
//!
//! Every tolerance here is pinned in code; nothing is deferred to later
//! calibration. Negative verdicts are accepted only when their
//! certificates re-validate with independent eigenvalue arithmetic.

use cpmap::aucrit::{
    au_condition, construct_qubit_channel, embed_counterexample, fidelity_criterion,
    transpose_counterexample_search, verify_au_witness, AuInstance, AuVerdict,
    FidelityCriterion,
};
use cpmap::classical::{
    commuting_domain_extension, commuting_domain_positive, polytope_extremes,
    CommutingDomainExtension, CommutingPositivity,
};
use cpmap::cpcheck::{
    delta_sdp, exact_cp_extension, gamma_sdp, preprocess, unboundedness_diagnostic, CpStatus,
    ExactExtension, MapSpec,
};
use cpmap::extend::{
    channel_extension, cptp_delta, hilbert_metric_check, minimal_unital_scale,
    probabilistic_maximin, ChannelExtension, HilbertVerdict,
};
use cpmap::fixtures;
use cpmap::linalg::{
    apply_choi, pauli, Complex64, ComplexMatrix, HermitianMatrix,
};
use cpmap::solver::Tolerances;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tols() -> Tolerances {
    Tolerances::default()
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> HermitianMatrix {
    let m = ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
    });
    HermitianMatrix::symmetrize(m)
}

/// Full-rank random density matrix (Ginibre-style construction).
fn random_state(rng: &mut ChaCha8Rng, d: usize) -> HermitianMatrix {
    let a = ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
    });
    let mut aa = HermitianMatrix::symmetrize(&a * &a.dagger());
    // a small identity component keeps the spectrum bounded away from zero
    aa = aa.add(&HermitianMatrix::identity(d).scale(0.05));
    aa.scale(1.0 / aa.trace())
}

fn no_extension_spec() -> MapSpec {
    preprocess(&fixtures::cp_no_extension_pairs(), &[]).unwrap()
}

/// Criterion 1: strong duality |delta + gamma| <= 1e-6 (1 + |delta|) on
/// 100 random specs with d, d' in {2,3} and up to 4 pairs.
#[test]
fn criterion_01_duality_on_random_specs() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let t = tols();
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let d = 2 + trial % 2;
        let dp = 2 + (trial / 2) % 2;
        let n = 1 + trial % 4;
        let pairs: Vec<_> = (0..n)
            .map(|_| (random_hermitian(&mut rng, d), random_hermitian(&mut rng, dp)))
            .collect();
        let spec = preprocess(&pairs, &[]).unwrap();
        let g = gamma_sdp(&spec, &t).unwrap();
        let de = delta_sdp(&spec, &t).unwrap();
        let err = (de.delta + g.gamma).abs() / (1.0 + de.delta.abs());
        worst = worst.max(err);
        assert!(
            err <= 1e-6,
            "criterion 1: FAIL at trial {trial}: delta {} gamma {} err {err:.3e}",
            de.delta,
            g.gamma
        );
    }
    println!("criterion 1: PASS - worst relative duality defect {worst:.3e} over 100 specs");
}

/// Criterion 2: the map |0><0| -> |0><0|, sigma_x -> sigma_z is CP with
/// gamma in [-1e-7, 0], approximable to <= 1e-6, never exactly
/// extendable, and not a channel restriction.
#[test]
fn criterion_02_cp_without_extension() {
    let t = tols();
    let spec = no_extension_spec();
    let g = gamma_sdp(&spec, &t).unwrap();
    assert_eq!(g.status, CpStatus::CompletelyPositive, "criterion 2: FAIL (status)");
    assert!(
        (-1e-7..=0.0).contains(&g.gamma),
        "criterion 2: FAIL (gamma = {})",
        g.gamma
    );
    let de = delta_sdp(&spec, &t).unwrap();
    assert!(de.delta <= 1e-6, "criterion 2: FAIL (delta = {})", de.delta);
    match exact_cp_extension(&spec, &t).unwrap() {
        ExactExtension::Exists(_) => panic!("criterion 2: FAIL (extension reported)"),
        _ => {}
    }
    let tp = cptp_delta(&spec, 1.0, &t).unwrap();
    assert!(
        tp.delta_tp > 1e-6,
        "criterion 2: FAIL (delta_tp = {})",
        tp.delta_tp
    );
    assert!(tp.witness_check.as_ref().map(|c| c.valid).unwrap_or(false));
    println!(
        "criterion 2: PASS - gamma {:.2e}, delta {:.2e}, delta_tp {:.4}",
        g.gamma, de.delta, tp.delta_tp
    );
}

/// Criterion 3: the approximating maps of the no-extension spec diverge:
/// ||T~*(1)|| grows at least tenfold from tolerance 1e-1 to 1e-3.
#[test]
fn criterion_03_unboundedness_series() {
    let t = tols();
    let spec = no_extension_spec();
    let series = unboundedness_diagnostic(&spec, &[1e-1, 1e-2, 1e-3], &t).unwrap();
    let first = series[0].dual_unit_norm;
    let last = series[2].dual_unit_norm;
    assert!(
        last >= 10.0 * first,
        "criterion 3: FAIL (series {:?})",
        series.iter().map(|p| p.dual_unit_norm).collect::<Vec<_>>()
    );
    println!(
        "criterion 3: PASS - dual unit norms {:.3} -> {:.3} -> {:.3}",
        series[0].dual_unit_norm, series[1].dual_unit_norm, series[2].dual_unit_norm
    );
}

/// Criterion 4: minimal unital scales of the Pauli permutations, and the
/// channel verdicts of their unital extensions.
#[test]
fn criterion_04_pauli_permutation_scales() {
    let t = tols();
    let swap = preprocess(&fixtures::pauli_swap_pairs(), &[]).unwrap();
    let cycle = preprocess(&fixtures::pauli_cycle_pairs(), &[]).unwrap();
    let c_swap = minimal_unital_scale(&swap, &t).unwrap();
    let c_cycle = minimal_unital_scale(&cycle, &t).unwrap();
    assert!(
        (c_swap - 3.0).abs() <= 1e-4,
        "criterion 4: FAIL (swap scale {c_swap})"
    );
    assert!(
        (c_cycle - 1.0).abs() <= 1e-4,
        "criterion 4: FAIL (cycle scale {c_cycle})"
    );

    let one = HermitianMatrix::identity(2);
    let mut cycle_unital = fixtures::pauli_cycle_pairs();
    cycle_unital.push((one.clone(), one.clone()));
    let spec = preprocess(&cycle_unital, &[]).unwrap();
    match channel_extension(&spec, &t).unwrap() {
        ChannelExtension::Exists(choi) => {
            let eigs = choi.hermitian().eigenvalues().unwrap();
            let second = eigs[eigs.len() - 2];
            assert!(
                second <= 1e-6,
                "criterion 4: FAIL (second Choi eigenvalue {second:.3e})"
            );
        }
        other => panic!("criterion 4: FAIL (cycle not a channel: {other:?})"),
    }
    let mut swap_unital = fixtures::pauli_swap_pairs();
    swap_unital.push((one.clone(), one));
    let spec = preprocess(&swap_unital, &[]).unwrap();
    match channel_extension(&spec, &t).unwrap() {
        ChannelExtension::NotExists { witness_check, .. } => {
            assert!(witness_check.valid, "criterion 4: FAIL (witness invalid)");
        }
        other => panic!("criterion 4: FAIL (swap unexpectedly a channel: {other:?})"),
    }
    println!("criterion 4: PASS - scales {c_swap:.6} and {c_cycle:.6}, channel verdicts certified");
}

/// Criterion 5: the expanding conjugation at p = 14/15 is CP with an exact
/// CP extension but no channel extension, and expands sigma_y by
/// sqrt(1044/900).
#[test]
fn criterion_05_expanding_conjugation() {
    let t = tols();
    let pairs = fixtures::expanding_conjugation_pairs().unwrap();
    let spec = preprocess(&pairs, &[]).unwrap();
    let g = gamma_sdp(&spec, &t).unwrap();
    assert_eq!(g.status, CpStatus::CompletelyPositive, "criterion 5: FAIL (gamma)");
    match exact_cp_extension(&spec, &t).unwrap() {
        ExactExtension::Exists(choi) => {
            for (x, y) in spec.pairs() {
                let img = apply_choi(&choi, x.matrix()).unwrap();
                assert!((&img - y.matrix()).max_abs() < 1e-6);
            }
        }
        other => panic!("criterion 5: FAIL (no exact extension: {other:?})"),
    }
    match channel_extension(&spec, &t).unwrap() {
        ChannelExtension::NotExists { witness_check, .. } => {
            assert!(witness_check.valid, "criterion 5: FAIL (witness invalid)");
        }
        other => panic!("criterion 5: FAIL (channel reported: {other:?})"),
    }
    let measured = pairs[1].1.trace_norm() / pauli::sigma_y().trace_norm();
    let expected = fixtures::expanding_conjugation_factor();
    assert!(
        (measured - expected).abs() <= 1e-9,
        "criterion 5: FAIL (factor {measured} vs {expected})"
    );
    println!("criterion 5: PASS - expansion factor {measured:.12}");
}

/// Criterion 6: the classical rescaling task: maximin 3/5, equal
/// probabilities impossible, Hilbert-metric check passes with both sides
/// exactly 2.
#[test]
fn criterion_06_classical_rescale() {
    let t = tols();
    let pairs = fixtures::classical_rescale_pairs();
    let res = probabilistic_maximin(&pairs, false, &t).unwrap();
    assert!(
        res.value >= 0.6 - 1e-6,
        "criterion 6: FAIL (maximin {})",
        res.value
    );
    let eq = probabilistic_maximin(&pairs, true, &t).unwrap();
    assert!(
        eq.value <= 1e-6,
        "criterion 6: FAIL (equal-probability value {})",
        eq.value
    );
    let check = hilbert_metric_check(&pairs[0].0, &pairs[1].0, &pairs[0].1, &pairs[1].1).unwrap();
    assert_eq!(check.verdict, HilbertVerdict::Exists, "criterion 6: FAIL");
    assert!(
        (check.lhs - 2.0).abs() <= 1e-9 && (check.rhs - 2.0).abs() <= 1e-9,
        "criterion 6: FAIL (lhs {} rhs {})",
        check.lhs,
        check.rhs
    );
    println!(
        "criterion 6: PASS - maximin {:.9}, equal-prob {:.2e}, lhs = rhs = {:.9}",
        res.value, eq.value, check.lhs
    );
}

/// Criterion 7: Hilbert-metric criterion agrees with the probabilistic
/// program on 200 random full-rank qubit instances.
#[test]
fn criterion_07_hilbert_oracle_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let t = tols();
    let mut marginal = 0;
    for trial in 0..200 {
        let r1 = random_state(&mut rng, 2);
        let r2 = random_state(&mut rng, 2);
        let o1 = random_state(&mut rng, 2);
        let o2 = random_state(&mut rng, 2);
        let check = hilbert_metric_check(&r1, &r2, &o1, &o2).unwrap();
        let pairs = vec![(r1, o1), (r2, o2)];
        let res = probabilistic_maximin(&pairs, false, &t).unwrap();
        let both_positive = res.value > 1e-6;
        let _ = &both_positive;
        // full-rank states always have comparable supports, so the verdict
        // is Exists or NotExists; exclude only knife-edge instances
        let predicted = match check.verdict {
            HilbertVerdict::Exists => true,
            HilbertVerdict::NotExists => false,
            HilbertVerdict::SupportIncompatible => {
                panic!("criterion 7: full-rank states reported incompatible supports")
            }
        };
        let near_boundary =
            (check.lhs - check.rhs).abs() <= 1e-6 || (res.value > 1e-7 && res.value <= 1e-5);
        if near_boundary {
            marginal += 1;
            continue;
        }
        assert_eq!(
            predicted, both_positive,
            "criterion 7: FAIL at trial {trial} (lhs {} rhs {} value {})",
            check.lhs, check.rhs, res.value
        );
    }
    assert!(
        marginal <= 4,
        "criterion 7: FAIL (marginal exclusions {marginal} > 2%)"
    );
    println!("criterion 7: PASS - 200 instances, {marginal} marginal exclusions");
}

/// Criterion 8: Abelian-domain fixtures: vertex enumeration, positivity,
/// constructive extensions in the guaranteed range, certified
/// impossibility beyond it.
#[test]
fn criterion_08_abelian_fixtures() {
    let t = tols();
    // guaranteed constructive cases must produce validated channels
    let prep = preprocess(
        &[(
            HermitianMatrix::diag(&[0.5, 0.25, 0.25]),
            HermitianMatrix::diag(&[0.4, 0.6]),
        )],
        &[],
    )
    .unwrap();
    match commuting_domain_extension(&prep, true, &t).unwrap() {
        CommutingDomainExtension::Exists(choi) => {
            assert!(choi.hermitian().min_eig() >= -1e-9);
            let tp = choi
                .input_marginal()
                .sub(&HermitianMatrix::identity(3))
                .op_norm();
            assert!(tp <= 1e-9, "criterion 8: FAIL (TP defect {tp:.3e})");
        }
        other => panic!("criterion 8: FAIL (guaranteed case: {other:?})"),
    }

    // the four-vertex fixture: vertices {rho1, rho2, rho3, rho4}
    let three = fixtures::abelian_three_state_pairs();
    let vectors: Vec<Vec<f64>> = three
        .iter()
        .map(|(x, _)| (0..4).map(|i| x.matrix()[(i, i)].re).collect())
        .collect();
    let poly = polytope_extremes(&vectors).unwrap();
    assert_eq!(poly.extremes.len(), 4, "criterion 8: FAIL (vertex count)");
    let rho4 = vec![0.5, 0.0, 0.0, 0.5];
    assert!(
        poly.extremes.iter().any(|v| v
            .point
            .iter()
            .zip(rho4.iter())
            .all(|(a, b)| (a - b).abs() < 1e-9)),
        "criterion 8: FAIL (rho4 missing)"
    );
    let spec3 = preprocess(&three, &[]).unwrap();
    match commuting_domain_positive(&spec3, &t).unwrap() {
        CommutingPositivity::Positive { .. } => {}
        other => panic!("criterion 8: FAIL (positivity: {other:?})"),
    }
    // the positive-extension surrogate: the map is not even CP
    let g = gamma_sdp(&spec3, &t).unwrap();
    assert_eq!(g.status, CpStatus::NotCP, "criterion 8: FAIL (gamma status)");
    assert!(g.witness_check.unwrap().valid);

    // the two-vertex fixture: vertices {rho1, rho2}, positive, no channel
    let two = fixtures::abelian_two_state_pairs();
    let vecs2: Vec<Vec<f64>> = two
        .iter()
        .map(|(x, _)| (0..3).map(|i| x.matrix()[(i, i)].re).collect())
        .collect();
    let poly2 = polytope_extremes(&vecs2).unwrap();
    assert_eq!(poly2.extremes.len(), 2, "criterion 8: FAIL (two-state vertices)");
    let spec2 = preprocess(&two, &[]).unwrap();
    match commuting_domain_positive(&spec2, &t).unwrap() {
        CommutingPositivity::Positive { .. } => {}
        other => panic!("criterion 8: FAIL (two-state positivity: {other:?})"),
    }
    let tp = cptp_delta(&spec2, 1.0, &t).unwrap();
    assert!(
        tp.delta_tp > 1e-6,
        "criterion 8: FAIL (two-state delta_tp {})",
        tp.delta_tp
    );
    println!(
        "criterion 8: PASS - 4 vertices found, surrogates certified (delta_tp {:.4})",
        tp.delta_tp
    );
}

/// Criterion 9: the trace-norm condition is equivalent to channel
/// existence on 500 random qubit instances.
#[test]
fn criterion_09_qubit_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let t = tols();
    let mut marginal = 0;
    for trial in 0..500 {
        let inst = AuInstance::new(
            random_state(&mut rng, 2),
            random_state(&mut rng, 2),
            random_state(&mut rng, 2),
            random_state(&mut rng, 2),
        )
        .unwrap();
        let au = au_condition(&inst).unwrap();
        let spec = preprocess(&inst.pairs(), &[]).unwrap();
        let score = cptp_delta(&spec, 1.0, &t).unwrap();
        let exists = match channel_extension(&spec, &t).unwrap() {
            ChannelExtension::Exists(_) => true,
            ChannelExtension::NotExists { witness_check, .. } => {
                assert!(witness_check.valid, "criterion 9: invalid witness at {trial}");
                false
            }
        };
        let au_holds = match au.verdict {
            AuVerdict::Holds => true,
            AuVerdict::Fails => false,
            AuVerdict::Marginal => {
                marginal += 1;
                continue;
            }
        };
        // knife-edge exclusions: a marginally failing condition (the
        // minimum is 0 at the endpoints for every instance, so only the
        // negative side signals a boundary) or a score near its threshold
        if (au.min_f < -1e-11 && au.min_f > -1e-6)
            || (score.delta_tp > 5e-7 && score.delta_tp <= 1e-5)
        {
            marginal += 1;
            continue;
        }
        assert_eq!(
            au_holds, exists,
            "criterion 9: FAIL at trial {trial} (min_f {:.3e}, delta_tp {:.3e})",
            au.min_f, score.delta_tp
        );
    }
    assert!(
        marginal < 10,
        "criterion 9: FAIL (marginal rate {marginal}/500 >= 2%)"
    );
    println!("criterion 9: PASS - 500 instances, {marginal} marginal exclusions");
}

/// Criterion 10: the fidelity criterion is equivalent to channel existence
/// for qubit inputs with outputs of dimension 2 and 3, and every Exists
/// comes with a validated constructed channel.
#[test]
fn criterion_10_fidelity_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let t = tols();
    let mut marginal = 0;
    let mut constructed = 0;
    for trial in 0..500 {
        let dp = 2 + trial % 2;
        let inst = AuInstance::new(
            random_state(&mut rng, 2),
            random_state(&mut rng, 2),
            random_state(&mut rng, dp),
            random_state(&mut rng, dp),
        )
        .unwrap();
        let crit = fidelity_criterion(&inst).unwrap();
        let spec = preprocess(&inst.pairs(), &[]).unwrap();
        let score = cptp_delta(&spec, 1.0, &t).unwrap();
        let exists = match channel_extension(&spec, &t).unwrap() {
            ChannelExtension::Exists(_) => true,
            ChannelExtension::NotExists { witness_check, .. } => {
                assert!(witness_check.valid, "criterion 10: invalid witness at {trial}");
                false
            }
        };
        let crit_exists = match &crit {
            FidelityCriterion::Exists {
                fidelity_out,
                fidelity_in,
                ..
            } => {
                if (fidelity_out - fidelity_in).abs() <= 1e-7 {
                    marginal += 1;
                    continue;
                }
                true
            }
            FidelityCriterion::NotExists { .. } => false,
        };
        let a_est = inst.rho1.inf_ratio(&inst.rho2, 1e-9).unwrap();
        let b_est = inst.rho2.inf_ratio(&inst.rho1, 1e-9).unwrap();
        let d1 = inst.rho1p.sub(&inst.rho2p.scale(a_est));
        let d2 = inst.rho2p.sub(&inst.rho1p.scale(b_est));
        let psd_boundary =
            d1.min_eig().abs() <= 1e-7 || d2.min_eig().abs() <= 1e-7;
        if psd_boundary || (score.delta_tp > 5e-7 && score.delta_tp <= 1e-5) {
            marginal += 1;
            continue;
        }
        assert_eq!(
            crit_exists, exists,
            "criterion 10: FAIL at trial {trial} ({crit:?}, delta_tp {:.3e})",
            score.delta_tp
        );
        if crit_exists {
            let choi = construct_qubit_channel(&inst).unwrap();
            for (x, y) in [(&inst.rho1, &inst.rho1p), (&inst.rho2, &inst.rho2p)] {
                let img = apply_choi(&choi, x.matrix()).unwrap();
                assert!(
                    (&img - y.matrix()).max_abs() <= 1e-8,
                    "criterion 10: constructed channel misses a pair at {trial}"
                );
            }
            assert!(choi.hermitian().min_eig() >= -1e-9);
            let tp = choi
                .input_marginal()
                .sub(&HermitianMatrix::identity(2))
                .op_norm();
            assert!(tp <= 1e-8);
            constructed += 1;
        }
    }
    assert!(
        marginal < 10,
        "criterion 10: FAIL (marginal rate {marginal}/500 >= 2%)"
    );
    println!(
        "criterion 10: PASS - 500 instances, {constructed} channels constructed, \
         {marginal} marginal exclusions"
    );
}

/// Criterion 11: the transpose-pair instance satisfies the condition, its
/// shipped witness verifies (including shifted variants), and the channel
/// program certifies infeasibility.
#[test]
fn criterion_11_transpose_instance_and_witness() {
    let t = tols();
    let inst = fixtures::transpose_pair_qutrit().unwrap();
    let au = au_condition(&inst).unwrap();
    assert_eq!(au.verdict, AuVerdict::Holds, "criterion 11: FAIL (condition)");

    let pkg = fixtures::transpose_witness_package().unwrap();
    let verdict = verify_au_witness(&inst, &pkg, &[0.1, 0.35, 0.69], t.psd_tol).unwrap();
    match &verdict {
        cpmap::aucrit::AuWitnessVerdict::Valid {
            min_eig_m,
            objective,
        } => {
            assert!(
                *objective <= -2.2 + 1e-6,
                "criterion 11: FAIL (objective {objective})"
            );
            assert!(
                *min_eig_m >= -1e-9,
                "criterion 11: FAIL (min eig {min_eig_m:.3e})"
            );
        }
        other => panic!("criterion 11: FAIL (witness verdict {other:?})"),
    }
    let spec = preprocess(&inst.pairs(), &[]).unwrap();
    let score = cptp_delta(&spec, 1.0, &t).unwrap();
    assert!(
        score.delta_tp > 1e-6,
        "criterion 11: FAIL (delta_tp {})",
        score.delta_tp
    );
    // the embedded variant keeps both properties
    let embedded = embed_counterexample(&inst, 4, 4).unwrap();
    let espec = preprocess(&embedded.pairs(), &[]).unwrap();
    let escore = cptp_delta(&espec, 1.0, &t).unwrap();
    assert!(escore.delta_tp > 1e-6, "criterion 11: FAIL (embedded delta_tp)");
    println!(
        "criterion 11: PASS - condition holds, witness valid at eps {{0.1, 0.35, 0.69}}, \
         delta_tp {:.4} (embedded {:.4})",
        score.delta_tp, escore.delta_tp
    );
}

/// Criterion 12: the random transpose search at d = 3 hits on at least 95%
/// of 100 trials with re-verified witnesses; at d = 2 it returns nothing.
#[test]
fn criterion_12_random_search() {
    let t = tols();
    let report = transpose_counterexample_search(3, 100, 20240901, &t).unwrap();
    assert!(
        report.hit_fraction >= 0.95,
        "criterion 12: FAIL (hit fraction {})",
        report.hit_fraction
    );
    for hit in &report.hits {
        let verdict =
            verify_au_witness(&hit.instance, &hit.package, &[], t.psd_tol).unwrap();
        assert!(verdict.is_valid(), "criterion 12: FAIL (witness at trial {})", hit.trial);
    }
    let qubit = transpose_counterexample_search(2, 100, 20240901, &t).unwrap();
    assert!(
        qubit.hits.is_empty(),
        "criterion 12: FAIL ({} qubit hits)",
        qubit.hits.len()
    );
    println!(
        "criterion 12: PASS - hit fraction {:.2} at d=3, 0 hits at d=2",
        report.hit_fraction
    );
}

/// Criterion 13: negative verdicts carry certificates that re-validate
/// with independent arithmetic. The other criteria assert this inline
/// wherever a negative verdict appears; this test re-checks a
/// representative of each certificate family end to end.
#[test]
fn criterion_13_certificates_revalidate() {
    let t = tols();
    // NotCP witness: re-check by hand, no library validator
    let spec = preprocess(&[(pauli::psi0(), pauli::psi0().scale(-1.0))], &[]).unwrap();
    let g = gamma_sdp(&spec, &t).unwrap();
    let w = g.witness.expect("witness");
    let lmi = HermitianMatrix::symmetrize(cpmap::linalg::tensor(
        spec.pairs()[0].0.matrix(),
        w.h[0].matrix(),
    ));
    assert!(lmi.min_eig() >= -1e-9, "criterion 13: FAIL (NotCP LMI)");
    let obj = spec.pairs()[0].1.transpose().inner(&w.h[0]);
    assert!(obj < -1e-7, "criterion 13: FAIL (NotCP objective)");

    // channel witness: hand-checked LMI and pairing
    let swap_spec = {
        let mut pairs = fixtures::pauli_swap_pairs();
        let one = HermitianMatrix::identity(2);
        pairs.push((one.clone(), one));
        preprocess(&pairs, &[]).unwrap()
    };
    match channel_extension(&swap_spec, &t).unwrap() {
        ChannelExtension::NotExists { witness, .. } => {
            let mut lmi = cpmap::linalg::tensor(
                witness.h0.as_ref().unwrap().matrix(),
                &ComplexMatrix::identity(2),
            );
            for ((x, _), h) in swap_spec.pairs().iter().zip(witness.h.iter()) {
                lmi = &lmi + &cpmap::linalg::tensor(x.matrix(), h.matrix());
            }
            assert!(
                HermitianMatrix::symmetrize(lmi).min_eig() >= -1e-9,
                "criterion 13: FAIL (channel witness LMI)"
            );
            let mut obj = witness.h0.as_ref().unwrap().trace();
            for ((_, y), h) in swap_spec.pairs().iter().zip(witness.h.iter()) {
                obj += y.transpose().inner(h);
            }
            assert!(obj < -1e-7, "criterion 13: FAIL (channel witness objective)");
        }
        other => panic!("criterion 13: FAIL (expected NotExists, got {other:?})"),
    }

    // Farkas ray of an infeasible exact-extension system
    match exact_cp_extension(&spec, &t).unwrap() {
        ExactExtension::NotExists { witness_check, .. } => {
            assert!(witness_check.unwrap().valid, "criterion 13: FAIL (ray witness)");
        }
        other => panic!("criterion 13: FAIL (expected NotExists, got {other:?})"),
    }
    println!("criterion 13: PASS - all certificate families re-validate independently");
}
