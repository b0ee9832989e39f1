//! End-to-end CLI tests: exit codes, report schema stability, parse-error
//! paths, fixture emission, and byte-level determinism.

use std::io::Write;
use std::process::{Command, Output};

fn cpmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpmap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("cpmap-test-{name}-{}.json", std::process::id()));
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path
}

fn matrix_json(rows: &[[f64; 2]]) -> String {
    // diagonal real matrix helper
    let d = rows.len();
    let mut data = Vec::new();
    for i in 0..d {
        let mut row = Vec::new();
        for j in 0..d {
            if i == j {
                row.push(format!("[{},{}]", rows[i][0], rows[i][1]));
            } else {
                row.push("[0,0]".to_string());
            }
        }
        data.push(format!("[{}]", row.join(",")));
    }
    format!(
        "{{\"rows\":{d},\"cols\":{d},\"data\":[{}]}}",
        data.join(",")
    )
}

#[test]
fn cp_check_affirmative_exit_zero() {
    // the identity on a diagonal projector is trivially CP
    let psi0 = matrix_json(&[[1.0, 0.0], [0.0, 0.0]]);
    let file = write_temp(
        "cpcheck-ok",
        &format!(r#"{{"version":1,"mode":"cp-check","pairs":[{{"x":{psi0},"y":{psi0}}}]}}"#),
    );
    let out = cpmap(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "completely-positive");
    assert_eq!(report["version"], 1);
    let _ = std::fs::remove_file(file);
}

#[test]
fn cp_check_negative_exit_one_with_certificate() {
    let psi0 = matrix_json(&[[1.0, 0.0], [0.0, 0.0]]);
    let neg = matrix_json(&[[-1.0, 0.0], [0.0, 0.0]]);
    let file = write_temp(
        "cpcheck-neg",
        &format!(r#"{{"version":1,"mode":"cp-check","pairs":[{{"x":{psi0},"y":{neg}}}]}}"#),
    );
    let out = cpmap(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "not-completely-positive");
    // the embedded witness re-verifies from the report alone: parse the
    // matrix back and check the pairing by hand
    let w = &report["data"]["witness"]["h"][0];
    let h: cpmap::linalg::HermitianMatrix = serde_json::from_value(w.clone()).unwrap();
    let x = cpmap::linalg::pauli::psi0();
    let lmi = cpmap::linalg::HermitianMatrix::symmetrize(cpmap::linalg::tensor(
        x.matrix(),
        h.matrix(),
    ));
    assert!(lmi.min_eig() >= -1e-9);
    let y = cpmap::linalg::pauli::psi0().scale(-1.0);
    assert!(y.transpose().inner(&h) < -1e-7);
    let _ = std::fs::remove_file(file);
}

#[test]
fn parse_error_names_the_json_path() {
    let file = write_temp(
        "badmatrix",
        r#"{"version":1,"mode":"cp-check","pairs":[{"x":{"rows":2,"cols":2,"data":[[[1,0]]]},"y":{"rows":2,"cols":2,"data":[[[1,0],[0,0]],[[0,0],[0,0]]]}}]}"#,
    );
    let out = cpmap(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("$.pairs[0].x"), "stderr: {err}");
    let _ = std::fs::remove_file(file);
}

#[test]
fn unknown_mode_is_an_input_error() {
    let file = write_temp("badmode", r#"{"version":1,"mode":"nope"}"#);
    let out = cpmap(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.mode"));
    let _ = std::fs::remove_file(file);
}

#[test]
fn channel_mode_on_transpose_fixture_exits_one() {
    // build the problem file from the shipped fixture
    let emit = cpmap(&["fixtures", "emit", "transpose-pair-qutrit"]);
    assert_eq!(emit.status.code(), Some(0));
    let fixture: serde_json::Value = serde_json::from_slice(&emit.stdout).unwrap();
    let inst = &fixture["instance"];
    let problem = serde_json::json!({
        "version": 1,
        "mode": "channel",
        "pairs": [
            {"x": inst["rho1"], "y": inst["rho1p"]},
            {"x": inst["rho2"], "y": inst["rho2p"]},
        ],
    });
    let file = write_temp("channel-transpose", &problem.to_string());
    let out = cpmap(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "not-exists");
    assert!(report["data"]["witness_check"]["valid"].as_bool().unwrap());
    let _ = std::fs::remove_file(file);
}

#[test]
fn witness_verify_mode_on_shipped_fixture_exits_zero() {
    let emit_inst = cpmap(&["fixtures", "emit", "transpose-pair-qutrit"]);
    let emit_wit = cpmap(&["fixtures", "emit", "transpose-witness"]);
    let inst: serde_json::Value = serde_json::from_slice(&emit_inst.stdout).unwrap();
    let wit: serde_json::Value = serde_json::from_slice(&emit_wit.stdout).unwrap();
    let problem = serde_json::json!({
        "version": 1,
        "mode": "witness-verify",
        "states": {
            "rho1": inst["instance"]["rho1"],
            "rho2": inst["instance"]["rho2"],
            "rho1p": inst["instance"]["rho1p"],
            "rho2p": inst["instance"]["rho2p"],
        },
        "witness": {
            "h0": wit["witness"]["h0"],
            "h1": wit["witness"]["h1"],
            "h2": wit["witness"]["h2"],
            "objective_bound": wit["witness"]["objective_bound"],
            "eps_range": [0.0, 0.7],
        },
        "eps_samples": [0.1, 0.35, 0.69],
    });
    let file = write_temp("witness-verify", &problem.to_string());
    let out = cpmap(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let _ = std::fs::remove_file(file);
}

#[test]
fn probabilistic_mode_with_unreachable_floor() {
    let r1 = matrix_json(&[[1.0 / 3.0, 0.0], [2.0 / 3.0, 0.0]]);
    let r2 = matrix_json(&[[0.2, 0.0], [0.8, 0.0]]);
    let o1 = matrix_json(&[[0.5, 0.0], [0.5, 0.0]]);
    let o2 = matrix_json(&[[1.0 / 3.0, 0.0], [2.0 / 3.0, 0.0]]);
    let problem = format!(
        r#"{{"version":1,"mode":"probabilistic","pairs":[{{"x":{r1},"y":{o1}}},{{"x":{r2},"y":{o2}}}],"priors":[0.5,0.5],"floor":0.99}}"#
    );
    let file = write_temp("prob-floor", &problem);
    let out = cpmap(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "floor-infeasible");
    let _ = std::fs::remove_file(file);
}

#[test]
fn deterministic_reports_modulo_timestamp() {
    let problem = r#"{"version":1,"mode":"counterexample-search","dims":{"d":3},"trials":3,"seed":11}"#;
    let file = write_temp("detsearch", problem);
    let a = cpmap(&["run", file.to_str().unwrap(), "--no-timestamp"]);
    let b = cpmap(&["run", file.to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "reports must be byte-identical");
    // with timestamps, everything except that field still matches
    let c = cpmap(&["run", file.to_str().unwrap()]);
    let mut v1: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let mut v2: serde_json::Value = serde_json::from_slice(&c.stdout).unwrap();
    v1.as_object_mut().unwrap().remove("timestamp");
    v2.as_object_mut().unwrap().remove("timestamp");
    assert_eq!(v1, v2);
    let _ = std::fs::remove_file(file);
}

#[test]
fn reports_validate_against_the_typed_schema() {
    // round-trip through the strict Report type (deny_unknown_fields)
    let psi0 = matrix_json(&[[1.0, 0.0], [0.0, 0.0]]);
    let file = write_temp(
        "schema-roundtrip",
        &format!(r#"{{"version":1,"mode":"cp-check","pairs":[{{"x":{psi0},"y":{psi0}}}]}}"#),
    );
    let out = cpmap(&["run", file.to_str().unwrap()]);
    let report: cpmap::report::Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.exit_code, 0);
    // and the shipped problem-file schema is itself valid JSON with the
    // mode list
    let schema = cpmap(&["schema"]);
    let doc: serde_json::Value = serde_json::from_slice(&schema.stdout).unwrap();
    assert!(doc["properties"]["mode"]["enum"]
        .as_array()
        .unwrap()
        .iter()
        .any(|m| m == "cp-check"));
    let _ = std::fs::remove_file(file);
}

#[test]
fn fixtures_list_and_emits_are_stable() {
    let list = cpmap(&["fixtures", "list"]);
    assert_eq!(list.status.code(), Some(0));
    let names = String::from_utf8_lossy(&list.stdout);
    for name in names.lines() {
        let a = cpmap(&["fixtures", "emit", name]);
        let b = cpmap(&["fixtures", "emit", name]);
        assert_eq!(a.status.code(), Some(0), "fixture {name}");
        assert_eq!(a.stdout, b.stdout, "fixture {name} must emit bit-exactly");
    }
    let bad = cpmap(&["fixtures", "emit", "no-such-fixture"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn summary_format_is_one_liner_friendly() {
    let psi0 = matrix_json(&[[1.0, 0.0], [0.0, 0.0]]);
    let file = write_temp(
        "summary",
        &format!(r#"{{"version":1,"mode":"cp-check","pairs":[{{"x":{psi0},"y":{psi0}}}]}}"#),
    );
    let out = cpmap(&["run", file.to_str().unwrap(), "--format", "summary"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("cp-check"), "{text}");
    assert!(text.contains("completely-positive"));
    let _ = std::fs::remove_file(file);
}
