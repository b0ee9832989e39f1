//! Problem-file parsing with path-named errors, and the shipped schema
//! document.
//!
//! Files are parsed in two stages: JSON first, then field-by-field
//! extraction that tracks the path of the offending element, so a bad
//! matrix entry is reported as, say, `pairs[2].x: data shape does not
//! match rows=2 cols=2` rather than a bare line number.

use cpmap::aucrit::{AuInstance, AuWitnessPackage};
use cpmap::linalg::HermitianMatrix;
use cpmap::solver::Tolerances;
use serde_json::Value;

pub const FILE_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    CpCheck,
    CpExtend,
    Approx,
    Channel,
    Probabilistic,
    Hilbert,
    Au,
    Fidelity,
    Classical,
    WitnessVerify,
    CounterexampleSearch,
    UnitalScale,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "cp-check" => Some(Mode::CpCheck),
            "cp-extend" => Some(Mode::CpExtend),
            "approx" => Some(Mode::Approx),
            "channel" => Some(Mode::Channel),
            "probabilistic" => Some(Mode::Probabilistic),
            "hilbert" => Some(Mode::Hilbert),
            "au" => Some(Mode::Au),
            "fidelity" => Some(Mode::Fidelity),
            "classical" => Some(Mode::Classical),
            "witness-verify" => Some(Mode::WitnessVerify),
            "counterexample-search" => Some(Mode::CounterexampleSearch),
            "unital-scale" => Some(Mode::UnitalScale),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalTask {
    Extremes,
    Positive,
    RangeExtension,
    DomainExtension,
}

/// Fully parsed problem file.
pub struct ProblemFile {
    pub mode: Mode,
    pub pairs: Vec<(HermitianMatrix, HermitianMatrix)>,
    pub dual_pairs: Vec<(HermitianMatrix, HermitianMatrix)>,
    pub instance: Option<AuInstance>,
    pub witness: Option<AuWitnessPackage>,
    pub eps_samples: Vec<f64>,
    pub priors: Option<Vec<f64>>,
    pub floor: Option<f64>,
    pub equal_probabilities: bool,
    pub weight_w: f64,
    pub trace_preserving: bool,
    pub classical_task: Option<ClassicalTask>,
    pub prob_vectors: Vec<Vec<f64>>,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub epsilon_schedule: Vec<f64>,
    pub tolerances: Tolerances,
}

pub struct ParseError(pub String);

type PResult<T> = Result<T, ParseError>;

fn err<T>(path: &str, msg: impl std::fmt::Display) -> PResult<T> {
    Err(ParseError(format!("{path}: {msg}")))
}

fn get<'a>(v: &'a Value, _path: &str, key: &str) -> Option<&'a Value> {
    v.get(key).filter(|x| !x.is_null())
}

fn require<'a>(v: &'a Value, path: &str, key: &str) -> PResult<&'a Value> {
    match get(v, path, key) {
        Some(x) => Ok(x),
        None => err(&format!("{path}.{key}"), "missing required field"),
    }
}

fn parse_f64(v: &Value, path: &str) -> PResult<f64> {
    v.as_f64().ok_or(()).or_else(|_| err(path, "expected a number"))
}

fn parse_u64(v: &Value, path: &str) -> PResult<u64> {
    v.as_u64().ok_or(()).or_else(|_| err(path, "expected a nonnegative integer"))
}

fn parse_matrix(v: &Value, path: &str) -> PResult<HermitianMatrix> {
    serde_json::from_value::<HermitianMatrix>(v.clone()).or_else(|e| err(path, e))
}

fn parse_pairs(v: &Value, path: &str) -> PResult<Vec<(HermitianMatrix, HermitianMatrix)>> {
    let arr = match v.as_array() {
        Some(a) => a,
        None => return err(path, "expected an array of {x, y} objects"),
    };
    let mut out = Vec::with_capacity(arr.len());
    for (i, item) in arr.iter().enumerate() {
        let ipath = format!("{path}[{i}]");
        let x = parse_matrix(require(item, &ipath, "x")?, &format!("{ipath}.x"))?;
        let y = parse_matrix(require(item, &ipath, "y")?, &format!("{ipath}.y"))?;
        out.push((x, y));
    }
    Ok(out)
}

fn parse_f64_array(v: &Value, path: &str) -> PResult<Vec<f64>> {
    let arr = match v.as_array() {
        Some(a) => a,
        None => return err(path, "expected an array of numbers"),
    };
    arr.iter()
        .enumerate()
        .map(|(i, x)| parse_f64(x, &format!("{path}[{i}]")))
        .collect()
}

pub fn parse_problem_file(text: &str) -> PResult<ProblemFile> {
    let root: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return err("$", format!("invalid JSON: {e}")),
    };
    if !root.is_object() {
        return err("$", "expected a JSON object");
    }
    if let Some(v) = get(&root, "$", "version") {
        let version = parse_u64(v, "$.version")?;
        if version != FILE_VERSION {
            return err("$.version", format!("unsupported version {version}"));
        }
    }
    let mode_str = require(&root, "$", "mode")?
        .as_str()
        .map(str::to_string)
        .ok_or(())
        .or_else(|_| err::<String>("$.mode", "expected a string"))?;
    let mode = match Mode::parse(&mode_str) {
        Some(m) => m,
        None => return err("$.mode", format!("unknown mode '{mode_str}'")),
    };

    let pairs = match get(&root, "$", "pairs") {
        Some(v) => parse_pairs(v, "$.pairs")?,
        None => Vec::new(),
    };
    let dual_pairs = match get(&root, "$", "dual_pairs") {
        Some(v) => parse_pairs(v, "$.dual_pairs")?,
        None => Vec::new(),
    };
    let instance = match get(&root, "$", "states") {
        Some(v) => {
            let spath = "$.states";
            let rho1 = parse_matrix(require(v, spath, "rho1")?, "$.states.rho1")?;
            let rho2 = parse_matrix(require(v, spath, "rho2")?, "$.states.rho2")?;
            let rho1p = parse_matrix(require(v, spath, "rho1p")?, "$.states.rho1p")?;
            let rho2p = parse_matrix(require(v, spath, "rho2p")?, "$.states.rho2p")?;
            match AuInstance::new(rho1, rho2, rho1p, rho2p) {
                Ok(inst) => Some(inst),
                Err(e) => return err(spath, e),
            }
        }
        None => None,
    };
    let witness = match get(&root, "$", "witness") {
        Some(v) => {
            let wpath = "$.witness";
            let h0 = parse_matrix(require(v, wpath, "h0")?, "$.witness.h0")?;
            let h1 = parse_matrix(require(v, wpath, "h1")?, "$.witness.h1")?;
            let h2 = parse_matrix(require(v, wpath, "h2")?, "$.witness.h2")?;
            let objective_bound = parse_f64(
                require(v, wpath, "objective_bound")?,
                "$.witness.objective_bound",
            )?;
            let eps_range = match get(v, wpath, "eps_range") {
                Some(r) => {
                    let vals = parse_f64_array(r, "$.witness.eps_range")?;
                    if vals.len() != 2 {
                        return err("$.witness.eps_range", "expected [lo, hi]");
                    }
                    Some((vals[0], vals[1]))
                }
                None => None,
            };
            Some(AuWitnessPackage {
                h0,
                h1,
                h2,
                objective_bound,
                eps_range,
            })
        }
        None => None,
    };
    let eps_samples = match get(&root, "$", "eps_samples") {
        Some(v) => parse_f64_array(v, "$.eps_samples")?,
        None => Vec::new(),
    };
    let priors = match get(&root, "$", "priors") {
        Some(v) => Some(parse_f64_array(v, "$.priors")?),
        None => None,
    };
    let floor = match get(&root, "$", "floor") {
        Some(v) => Some(parse_f64(v, "$.floor")?),
        None => None,
    };
    let equal_probabilities = match get(&root, "$", "equal_probabilities") {
        Some(v) => v
            .as_bool()
            .ok_or(())
            .or_else(|_| err("$.equal_probabilities", "expected a boolean"))?,
        None => false,
    };
    let weight_w = match get(&root, "$", "weight_w") {
        Some(v) => parse_f64(v, "$.weight_w")?,
        None => 1.0,
    };
    let trace_preserving = match get(&root, "$", "trace_preserving") {
        Some(v) => v
            .as_bool()
            .ok_or(())
            .or_else(|_| err("$.trace_preserving", "expected a boolean"))?,
        None => false,
    };
    let classical_task = match get(&root, "$", "classical_task") {
        Some(v) => {
            let s = v
                .as_str()
                .ok_or(())
                .or_else(|_| err::<&str>("$.classical_task", "expected a string"))?;
            Some(match s {
                "extremes" => ClassicalTask::Extremes,
                "positive" => ClassicalTask::Positive,
                "range-extension" => ClassicalTask::RangeExtension,
                "domain-extension" => ClassicalTask::DomainExtension,
                other => {
                    return err("$.classical_task", format!("unknown task '{other}'"))
                }
            })
        }
        None => None,
    };
    let prob_vectors = match get(&root, "$", "prob_vectors") {
        Some(v) => {
            let arr = v
                .as_array()
                .ok_or(())
                .or_else(|_| err::<&Vec<Value>>("$.prob_vectors", "expected an array"))?;
            arr.iter()
                .enumerate()
                .map(|(i, x)| parse_f64_array(x, &format!("$.prob_vectors[{i}]")))
                .collect::<PResult<Vec<_>>>()?
        }
        None => Vec::new(),
    };
    let dim = match get(&root, "$", "dims").and_then(|d| d.get("d")) {
        Some(v) => parse_u64(v, "$.dims.d")? as usize,
        None => 3,
    };
    let trials = match get(&root, "$", "trials") {
        Some(v) => parse_u64(v, "$.trials")? as usize,
        None => 100,
    };
    let seed = match get(&root, "$", "seed") {
        Some(v) => parse_u64(v, "$.seed")?,
        None => 0,
    };
    let epsilon_schedule = match get(&root, "$", "epsilon_schedule") {
        Some(v) => parse_f64_array(v, "$.epsilon_schedule")?,
        None => Vec::new(),
    };
    let mut tolerances = Tolerances::default();
    if let Some(t) = get(&root, "$", "tolerances") {
        if let Some(v) = get(t, "$.tolerances", "feas_tol") {
            tolerances.feas_tol = parse_f64(v, "$.tolerances.feas_tol")?;
        }
        if let Some(v) = get(t, "$.tolerances", "gap_tol") {
            tolerances.gap_tol = parse_f64(v, "$.tolerances.gap_tol")?;
        }
        if let Some(v) = get(t, "$.tolerances", "psd_tol") {
            tolerances.psd_tol = parse_f64(v, "$.tolerances.psd_tol")?;
        }
        if let Some(v) = get(t, "$.tolerances", "margin_tol") {
            tolerances.margin_tol = parse_f64(v, "$.tolerances.margin_tol")?;
        }
    }

    Ok(ProblemFile {
        mode,
        pairs,
        dual_pairs,
        instance,
        witness,
        eps_samples,
        priors,
        floor,
        equal_probabilities,
        weight_w,
        trace_preserving,
        classical_task,
        prob_vectors,
        dim,
        trials,
        seed,
        epsilon_schedule,
        tolerances,
    })
}

/// The shipped, versioned schema document for problem files.
pub fn schema_document() -> serde_json::Value {
    serde_json::json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "cpmap problem file",
        "version": FILE_VERSION,
        "type": "object",
        "required": ["mode"],
        "properties": {
            "version": {"const": 1},
            "mode": {"enum": [
                "cp-check", "cp-extend", "approx", "channel", "probabilistic",
                "hilbert", "au", "fidelity", "classical", "witness-verify",
                "counterexample-search", "unital-scale"
            ]},
            "pairs": {
                "description": "input/output pairs (X_i, Y_i); required by the map modes",
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["x", "y"],
                    "properties": {
                        "x": {"$ref": "#/$defs/matrix"},
                        "y": {"$ref": "#/$defs/matrix"}
                    }
                }
            },
            "dual_pairs": {"description": "optional Heisenberg-side pairs (X'_j, Y'_j)", "type": "array"},
            "states": {
                "description": "two-state instance for au / fidelity / hilbert / witness-verify",
                "type": "object",
                "required": ["rho1", "rho2", "rho1p", "rho2p"]
            },
            "witness": {
                "type": "object",
                "required": ["h0", "h1", "h2", "objective_bound"],
                "properties": {"eps_range": {"type": "array", "minItems": 2, "maxItems": 2}}
            },
            "eps_samples": {"type": "array", "items": {"type": "number"}},
            "priors": {"type": "array", "items": {"type": "number"}},
            "floor": {"type": "number"},
            "equal_probabilities": {"type": "boolean"},
            "weight_w": {"type": "number", "exclusiveMinimum": 0},
            "trace_preserving": {"type": "boolean"},
            "classical_task": {"enum": ["extremes", "positive", "range-extension", "domain-extension"]},
            "prob_vectors": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
            "dims": {"type": "object", "properties": {"d": {"type": "integer", "minimum": 2}}},
            "trials": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
            "epsilon_schedule": {"type": "array", "items": {"type": "number"}},
            "tolerances": {
                "type": "object",
                "properties": {
                    "feas_tol": {"type": "number"},
                    "gap_tol": {"type": "number"},
                    "psd_tol": {"type": "number"},
                    "margin_tol": {"type": "number"}
                }
            }
        },
        "$defs": {
            "matrix": {
                "type": "object",
                "required": ["rows", "cols", "data"],
                "properties": {
                    "rows": {"type": "integer", "minimum": 1},
                    "cols": {"type": "integer", "minimum": 1},
                    "data": {
                        "description": "row-major; each entry is [re, im]",
                        "type": "array",
                        "items": {"type": "array", "items": {
                            "type": "array", "minItems": 2, "maxItems": 2,
                            "items": {"type": "number"}
                        }}
                    }
                }
            }
        }
    })
}
