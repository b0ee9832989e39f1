//! Mode dispatch: one function per problem mode, each producing a report
//! with the verdict, the quantities computed, and any certificates.

use cpmap::aucrit::{
    au_condition, construct_qubit_channel, fidelity_criterion, transpose_counterexample_search,
    verify_au_witness, AuVerdict, FidelityCriterion,
};
use cpmap::classical::{
    commuting_domain_extension, commuting_domain_positive, commuting_range_cp_extension,
    polytope_extremes, CommutingDomainExtension, CommutingPositivity, CommutingRangeExtension,
};
use cpmap::cpcheck::{
    classify, delta_sdp, exact_cp_extension, gamma_sdp, preprocess, unboundedness_diagnostic,
    CpStatus, ExactExtension,
};
use cpmap::extend::{
    channel_extension, cptp_delta, hilbert_metric_check, minimal_unital_scale,
    probabilistic_maximin, probabilistic_weighted, ChannelExtension, HilbertVerdict,
    ProbabilisticOutcome,
};
use cpmap::report::{Report, VerdictClass};
use cpmap::{Error, Result};
use serde_json::json;

use crate::schema::{ClassicalTask, Mode, ProblemFile};

pub fn run(p: &ProblemFile) -> Result<Report> {
    match p.mode {
        Mode::CpCheck => cp_check(p),
        Mode::CpExtend => cp_extend(p),
        Mode::Approx => approx(p),
        Mode::Channel => channel(p),
        Mode::Probabilistic => probabilistic(p),
        Mode::Hilbert => hilbert(p),
        Mode::Au => au(p),
        Mode::Fidelity => fidelity(p),
        Mode::Classical => classical(p),
        Mode::WitnessVerify => witness_verify(p),
        Mode::CounterexampleSearch => search(p),
        Mode::UnitalScale => unital(p),
    }
}

fn need_pairs(p: &ProblemFile) -> Result<cpmap::cpcheck::MapSpec> {
    if p.pairs.is_empty() {
        return Err(Error::InvalidArgument(
            "this mode requires a nonempty 'pairs' field".into(),
        ));
    }
    preprocess(&p.pairs, &p.dual_pairs)
}

fn need_instance(p: &ProblemFile) -> Result<&cpmap::aucrit::AuInstance> {
    p.instance.as_ref().ok_or_else(|| {
        Error::InvalidArgument("this mode requires the 'states' field".into())
    })
}

fn cp_check(p: &ProblemFile) -> Result<Report> {
    let spec = need_pairs(p)?;
    let verdict = gamma_sdp(&spec, &p.tolerances)?;
    let full = classify(&spec, &p.tolerances)?;
    let (name, class) = match verdict.status {
        CpStatus::CompletelyPositive => ("completely-positive", VerdictClass::Affirmative),
        CpStatus::NotCP => ("not-completely-positive", VerdictClass::Negative),
        CpStatus::Marginal => ("marginal", VerdictClass::Undecided),
    };
    Ok(Report::new(
        "cp-check",
        name,
        class,
        &p.tolerances,
        json!({
            "gamma": verdict.gamma,
            "witness": verdict.witness,
            "witness_check": verdict.witness_check,
            "classification": full,
        }),
    ))
}

fn cp_extend(p: &ProblemFile) -> Result<Report> {
    let spec = need_pairs(p)?;
    let outcome = exact_cp_extension(&spec, &p.tolerances)?;
    let (name, class, data) = match &outcome {
        ExactExtension::Exists(choi) => (
            "exists",
            VerdictClass::Affirmative,
            json!({"choi": choi}),
        ),
        ExactExtension::NotExists {
            witness,
            witness_check,
            ray,
        } => (
            "not-exists",
            VerdictClass::Negative,
            json!({"witness": witness, "witness_check": witness_check, "ray": ray}),
        ),
        ExactExtension::ApproxOnlyOrUndecided { message } => (
            "approx-only-or-undecided",
            VerdictClass::Undecided,
            json!({"message": message}),
        ),
    };
    Ok(Report::new("cp-extend", name, class, &p.tolerances, data))
}

fn approx(p: &ProblemFile) -> Result<Report> {
    let spec = need_pairs(p)?;
    let res = delta_sdp(&spec, &p.tolerances)?;
    let gamma = gamma_sdp(&spec, &p.tolerances)?;
    let diagnostic = if p.epsilon_schedule.is_empty() {
        None
    } else {
        Some(unboundedness_diagnostic(
            &spec,
            &p.epsilon_schedule,
            &p.tolerances,
        )?)
    };
    // approximability is equivalent to complete positivity on the span,
    // so the certified gamma verdict decides
    let (name, class) = match gamma.status {
        CpStatus::CompletelyPositive => ("approximable", VerdictClass::Affirmative),
        CpStatus::NotCP => ("not-approximable", VerdictClass::Negative),
        CpStatus::Marginal => ("marginal", VerdictClass::Undecided),
    };
    Ok(Report::new(
        "approx",
        name,
        class,
        &p.tolerances,
        json!({
            "delta": res.delta,
            "gamma": gamma.gamma,
            "best_choi": res.best_choi,
            "witness": gamma.witness,
            "witness_check": gamma.witness_check,
            "diagnostic_series": diagnostic,
        }),
    ))
}

fn channel(p: &ProblemFile) -> Result<Report> {
    let spec = need_pairs(p)?;
    let score = cptp_delta(&spec, p.weight_w, &p.tolerances)?;
    let outcome = channel_extension(&spec, &p.tolerances)?;
    let (name, class, data) = match &outcome {
        ChannelExtension::Exists(choi) => (
            "exists",
            VerdictClass::Affirmative,
            json!({"choi": choi, "delta_tp": score.delta_tp, "lambda": score.lambda,
                   "weight_w": score.weight_w}),
        ),
        ChannelExtension::NotExists {
            witness,
            witness_check,
        } => (
            "not-exists",
            VerdictClass::Negative,
            json!({"witness": witness, "witness_check": witness_check,
                   "delta_tp": score.delta_tp, "lambda": score.lambda,
                   "weight_w": score.weight_w}),
        ),
    };
    Ok(Report::new("channel", name, class, &p.tolerances, data))
}

fn probabilistic(p: &ProblemFile) -> Result<Report> {
    if p.pairs.is_empty() {
        return Err(Error::InvalidArgument(
            "probabilistic mode requires 'pairs' of density matrices".into(),
        ));
    }
    match &p.priors {
        Some(priors) => {
            match probabilistic_weighted(
                &p.pairs,
                priors,
                p.floor,
                p.equal_probabilities,
                &p.tolerances,
            )? {
                ProbabilisticOutcome::Solved(res) => {
                    let affirm = res.value > 1e-7;
                    Ok(Report::new(
                        "probabilistic",
                        if affirm { "solvable" } else { "value-zero" },
                        if affirm {
                            VerdictClass::Affirmative
                        } else {
                            VerdictClass::Negative
                        },
                        &p.tolerances,
                        json!({"result": res}),
                    ))
                }
                ProbabilisticOutcome::FloorInfeasible { floor, ray } => Ok(Report::new(
                    "probabilistic",
                    "floor-infeasible",
                    VerdictClass::Negative,
                    &p.tolerances,
                    json!({"floor": floor, "ray": ray}),
                )),
            }
        }
        None => {
            let res = probabilistic_maximin(&p.pairs, p.equal_probabilities, &p.tolerances)?;
            let affirm = res.value > 1e-7;
            Ok(Report::new(
                "probabilistic",
                if affirm { "solvable" } else { "value-zero" },
                if affirm {
                    VerdictClass::Affirmative
                } else {
                    VerdictClass::Negative
                },
                &p.tolerances,
                json!({"result": res}),
            ))
        }
    }
}

fn hilbert(p: &ProblemFile) -> Result<Report> {
    let inst = need_instance(p)?;
    let check = hilbert_metric_check(&inst.rho1, &inst.rho2, &inst.rho1p, &inst.rho2p)?;
    let (name, class) = match check.verdict {
        HilbertVerdict::Exists => ("exists", VerdictClass::Affirmative),
        HilbertVerdict::NotExists => ("not-exists", VerdictClass::Negative),
        HilbertVerdict::SupportIncompatible => {
            ("support-incompatible", VerdictClass::Negative)
        }
    };
    Ok(Report::new(
        "hilbert",
        name,
        class,
        &p.tolerances,
        json!({"check": check}),
    ))
}

fn au(p: &ProblemFile) -> Result<Report> {
    let inst = need_instance(p)?;
    let outcome = au_condition(inst)?;
    let (name, class) = match outcome.verdict {
        AuVerdict::Holds => ("holds", VerdictClass::Affirmative),
        AuVerdict::Fails => ("fails", VerdictClass::Negative),
        AuVerdict::Marginal => ("marginal", VerdictClass::Undecided),
    };
    Ok(Report::new(
        "au",
        name,
        class,
        &p.tolerances,
        json!({"outcome": outcome}),
    ))
}

fn fidelity(p: &ProblemFile) -> Result<Report> {
    let inst = need_instance(p)?;
    let crit = fidelity_criterion(inst)?;
    match &crit {
        FidelityCriterion::Exists { .. } => {
            let choi = construct_qubit_channel(inst)?;
            Ok(Report::new(
                "fidelity",
                "exists",
                VerdictClass::Affirmative,
                &p.tolerances,
                json!({"criterion": crit, "choi": choi}),
            ))
        }
        FidelityCriterion::NotExists { .. } => Ok(Report::new(
            "fidelity",
            "not-exists",
            VerdictClass::Negative,
            &p.tolerances,
            json!({"criterion": crit}),
        )),
    }
}

fn classical(p: &ProblemFile) -> Result<Report> {
    let task = p.classical_task.ok_or_else(|| {
        Error::InvalidArgument("classical mode requires 'classical_task'".into())
    })?;
    match task {
        ClassicalTask::Extremes => {
            if p.prob_vectors.is_empty() {
                return Err(Error::InvalidArgument(
                    "task 'extremes' requires 'prob_vectors'".into(),
                ));
            }
            let poly = polytope_extremes(&p.prob_vectors)?;
            Ok(Report::new(
                "classical",
                "enumerated",
                VerdictClass::Affirmative,
                &p.tolerances,
                json!({"polytope": poly}),
            ))
        }
        ClassicalTask::Positive => {
            let spec = need_pairs(p)?;
            match commuting_domain_positive(&spec, &p.tolerances)? {
                CommutingPositivity::Positive { polytope } => Ok(Report::new(
                    "classical",
                    "positive",
                    VerdictClass::Affirmative,
                    &p.tolerances,
                    json!({"polytope": polytope}),
                )),
                CommutingPositivity::NotPositive {
                    vertex,
                    image_min_eig,
                } => Ok(Report::new(
                    "classical",
                    "not-positive",
                    VerdictClass::Negative,
                    &p.tolerances,
                    json!({"vertex": vertex, "image_min_eig": image_min_eig}),
                )),
            }
        }
        ClassicalTask::RangeExtension => {
            let spec = need_pairs(p)?;
            match commuting_range_cp_extension(&spec, &p.tolerances)? {
                CommutingRangeExtension::Exists(choi) => Ok(Report::new(
                    "classical",
                    "exists",
                    VerdictClass::Affirmative,
                    &p.tolerances,
                    json!({"choi": choi}),
                )),
                CommutingRangeExtension::NotCP {
                    witness,
                    witness_check,
                } => Ok(Report::new(
                    "classical",
                    "not-completely-positive",
                    VerdictClass::Negative,
                    &p.tolerances,
                    json!({"witness": witness, "witness_check": witness_check}),
                )),
            }
        }
        ClassicalTask::DomainExtension => {
            let spec = need_pairs(p)?;
            match commuting_domain_extension(&spec, p.trace_preserving, &p.tolerances)? {
                CommutingDomainExtension::Exists(choi) => Ok(Report::new(
                    "classical",
                    "exists",
                    VerdictClass::Affirmative,
                    &p.tolerances,
                    json!({"choi": choi, "trace_preserving": p.trace_preserving}),
                )),
                CommutingDomainExtension::NotExists {
                    witness,
                    witness_check,
                } => Ok(Report::new(
                    "classical",
                    "not-exists",
                    VerdictClass::Negative,
                    &p.tolerances,
                    json!({"witness": witness, "witness_check": witness_check}),
                )),
                CommutingDomainExtension::OutOfGuaranteedRange => Ok(Report::new(
                    "classical",
                    "out-of-guaranteed-range",
                    VerdictClass::Undecided,
                    &p.tolerances,
                    json!({}),
                )),
            }
        }
    }
}

fn witness_verify(p: &ProblemFile) -> Result<Report> {
    let inst = need_instance(p)?;
    let pkg = p.witness.as_ref().ok_or_else(|| {
        Error::InvalidArgument("witness-verify mode requires the 'witness' field".into())
    })?;
    let samples: Vec<f64> = if p.eps_samples.is_empty() {
        match pkg.eps_range {
            Some((lo, hi)) => {
                let w = hi - lo;
                vec![lo + 0.1 * w, lo + 0.5 * w, lo + 0.9 * w]
            }
            None => Vec::new(),
        }
    } else {
        p.eps_samples.clone()
    };
    let verdict = verify_au_witness(inst, pkg, &samples, p.tolerances.psd_tol)?;
    let valid = verdict.is_valid();
    Ok(Report::new(
        "witness-verify",
        if valid { "valid" } else { "invalid" },
        if valid {
            VerdictClass::Affirmative
        } else {
            VerdictClass::Negative
        },
        &p.tolerances,
        json!({"verdict": verdict, "eps_samples": samples}),
    ))
}

fn search(p: &ProblemFile) -> Result<Report> {
    let report = transpose_counterexample_search(p.dim, p.trials, p.seed, &p.tolerances)?;
    Ok(Report::new(
        "counterexample-search",
        "completed",
        VerdictClass::Affirmative,
        &p.tolerances,
        json!({"report": report}),
    ))
}

fn unital(p: &ProblemFile) -> Result<Report> {
    let spec = need_pairs(p)?;
    let c = minimal_unital_scale(&spec, &p.tolerances)?;
    Ok(Report::new(
        "unital-scale",
        "found",
        VerdictClass::Affirmative,
        &p.tolerances,
        json!({"minimal_scale": c}),
    ))
}

/// Short human-readable rendering of a report.
pub fn summarize(report: &Report) -> String {
    let mut lines = vec![format!(
        "mode {}: {} (exit {})",
        report.mode, report.verdict, report.exit_code
    )];
    for key in [
        "gamma",
        "delta",
        "delta_tp",
        "lambda",
        "minimal_scale",
    ] {
        if let Some(v) = report.data.get(key).and_then(|v| v.as_f64()) {
            lines.push(format!("  {key} = {v:.9}"));
        }
    }
    if let Some(v) = report.data.pointer("/result/value").and_then(|v| v.as_f64()) {
        lines.push(format!("  value = {v:.9}"));
    }
    if let Some(v) = report.data.pointer("/outcome/min_f").and_then(|v| v.as_f64()) {
        lines.push(format!("  min_f = {v:.3e}"));
    }
    if let Some(v) = report.data.pointer("/check/lhs").and_then(|v| v.as_f64()) {
        lines.push(format!("  lhs = {v:.9}"));
    }
    if let Some(v) = report.data.pointer("/check/rhs").and_then(|v| v.as_f64()) {
        lines.push(format!("  rhs = {v:.9}"));
    }
    if let Some(v) = report
        .data
        .pointer("/report/hit_fraction")
        .and_then(|v| v.as_f64())
    {
        lines.push(format!("  hit_fraction = {v:.3}"));
    }
    lines.join("\n")
}
