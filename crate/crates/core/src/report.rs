//! Machine-readable verdict reports.
//!
//! Every CLI invocation produces one `Report`: a stable envelope with the
//! mode, a verdict string, the tolerances that were in force, and a
//! mode-specific payload embedding certificate matrices in the standard
//! matrix JSON encoding, so third parties can re-check every negative
//! verdict without this library.

use serde::{Deserialize, Serialize};

use crate::solver::Tolerances;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceReport {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub psd_tol: f64,
    pub margin_tol: f64,
}

impl From<&Tolerances> for ToleranceReport {
    fn from(t: &Tolerances) -> Self {
        Self {
            feas_tol: t.feas_tol,
            gap_tol: t.gap_tol,
            psd_tol: t.psd_tol,
            margin_tol: t.margin_tol,
        }
    }
}

/// Exit-code contract shared by the CLI and the report envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictClass {
    /// Affirmative: CP / Exists / Holds / Valid / Positive. Exit 0.
    Affirmative,
    /// Negative with an embedded certificate. Exit 1.
    Negative,
    /// Marginal or undecided at the tolerances in force. Exit 2.
    Undecided,
}

impl VerdictClass {
    pub fn exit_code(self) -> i32 {
        match self {
            VerdictClass::Affirmative => 0,
            VerdictClass::Negative => 1,
            VerdictClass::Undecided => 2,
        }
    }
}

/// Exit code for input errors (parse, schema, precondition).
pub const EXIT_INPUT_ERROR: i32 = 3;
/// Exit code for numeric failures inside the solver.
pub const EXIT_NUMERIC_FAILURE: i32 = 4;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub version: u32,
    pub mode: String,
    pub verdict: String,
    pub verdict_class: VerdictClass,
    pub exit_code: i32,
    pub tolerances: ToleranceReport,
    /// Mode-specific payload; certificates are embedded here.
    pub data: serde_json::Value,
    /// Wall-clock stamp (seconds since the epoch); excluded from
    /// determinism comparisons.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl Report {
    pub fn new(
        mode: &str,
        verdict: &str,
        class: VerdictClass,
        tols: &Tolerances,
        data: serde_json::Value,
    ) -> Self {
        Self {
            version: REPORT_VERSION,
            mode: mode.to_string(),
            verdict: verdict.to_string(),
            verdict_class: class,
            exit_code: class.exit_code(),
            tolerances: tols.into(),
            data,
            timestamp: None,
        }
    }

    pub fn stamped(mut self) -> Self {
        self.timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        self
    }

    /// Canonical JSON rendering.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports are serializable")
    }
}
