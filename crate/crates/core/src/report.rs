//! Check reports: per-condition residual summaries, verdicts, JSON and CSV
//! output.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::domain_sets::{ae_zero, AeTolerance};
use crate::quadrature::QuadratureRule;
use crate::Result;

/// Overall outcome of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The kernel conditions and the direct action residual disagree.
    Inconclusive,
}

impl Verdict {
    /// Process exit code: 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

/// Verdict from the checker outcome and an optional independent oracle.
pub fn combine_verdict(checker_pass: bool, oracle_pass: Option<bool>) -> Verdict {
    match oracle_pass {
        Some(o) if o != checker_pass => Verdict::Inconclusive,
        _ if checker_pass => Verdict::Pass,
        _ => Verdict::Fail,
    }
}

/// Summary of one condition over one region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub region: String,
    pub sup_residual: f64,
    pub l2_residual: f64,
    pub violation_measure: f64,
    pub pass: bool,
    /// Regions of measure zero are skipped and count as passing.
    pub skipped: bool,
}

impl ConditionReport {
    pub fn skipped(region: impl Into<String>) -> Self {
        ConditionReport { region: region.into(), sup_residual: 0.0, l2_residual: 0.0, violation_measure: 0.0, pass: true, skipped: true }
    }

    /// Evaluates raw residual samples. The a.e. test runs on `raw / scale`;
    /// a zero scale means the residual is compared unscaled.
    pub fn evaluate(region: impl Into<String>, raw: &[f64], weights: &[f64], scale: f64, tol: &AeTolerance) -> Result<Self> {
        let sup = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let l2 = raw.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>().sqrt();
        let normalised: Vec<f64> = if scale > 0.0 && scale.is_finite() { raw.iter().map(|v| v / scale).collect() } else { raw.to_vec() };
        let verdict = ae_zero(&normalised, weights, tol)?;
        Ok(ConditionReport {
            region: region.into(),
            sup_residual: sup,
            l2_residual: l2,
            violation_measure: verdict.violation_measure,
            pass: verdict.is_ae_zero,
            skipped: false,
        })
    }

    /// A boolean condition with no residual field.
    pub fn flag(region: impl Into<String>, pass: bool, residual: f64, violation_measure: f64) -> Self {
        ConditionReport { region: region.into(), sup_residual: residual, l2_residual: residual, violation_measure, pass, skipped: false }
    }
}

/// Tolerances and discretisation recorded with a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceReport {
    pub eps_value: f64,
    pub eps_rel: f64,
    pub eps_measure: f64,
    pub nodes_per_panel: usize,
    pub max_panel_width: f64,
}

/// Residual at one sample point, written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPoint {
    pub condition: String,
    pub t: f64,
    pub s: Option<f64>,
    pub tau: f64,
    pub value: f64,
}

/// Result of any checker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub checker: String,
    pub conditions: Vec<ConditionReport>,
    /// True exactly when every condition passes.
    pub overall_pass: bool,
    pub verdict: Verdict,
    pub tolerances: ToleranceReport,
    /// Independent action residual, when one was computed.
    pub direct_residual: Option<f64>,
    pub diagnostics: BTreeMap<String, serde_json::Value>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    pub wall_time_ms: u64,
    #[serde(skip)]
    pub residual_points: Vec<ResidualPoint>,
}

impl CheckReport {
    pub fn new(checker: impl Into<String>, tol: &AeTolerance, rule: &QuadratureRule, panel_width: f64) -> Self {
        CheckReport {
            checker: checker.into(),
            conditions: Vec::new(),
            overall_pass: true,
            verdict: Verdict::Pass,
            tolerances: ToleranceReport {
                eps_value: tol.eps_value,
                eps_rel: tol.eps_rel,
                eps_measure: tol.eps_measure,
                nodes_per_panel: rule.nodes_per_panel,
                max_panel_width: panel_width,
            },
            direct_residual: None,
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
            wall_time_ms: 0,
            residual_points: Vec::new(),
        }
    }

    pub fn diag(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.diagnostics.insert(key.to_string(), value.into());
    }

    pub fn diag_f64(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).and_then(|v| v.as_f64())
    }

    pub fn diag_bool(&self, key: &str) -> Option<bool> {
        self.diagnostics.get(key).and_then(|v| v.as_bool())
    }

    /// Sets `overall_pass` from the conditions and combines it with the
    /// oracle outcome into the verdict.
    pub fn finish(&mut self, oracle_pass: Option<bool>, started: std::time::Instant) {
        self.overall_pass = self.conditions.iter().all(|c| c.pass);
        self.verdict = combine_verdict(self.overall_pass, oracle_pass);
        if self.verdict == Verdict::Inconclusive {
            self.notes.push("kernel conditions and direct action residual disagree".into());
        }
        self.wall_time_ms = started.elapsed().as_millis() as u64;
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the timing field zeroed, for reproducibility comparisons.
    pub fn to_json_untimed(&self) -> Result<String> {
        let mut c = self.clone();
        c.wall_time_ms = 0;
        c.to_json()
    }

    /// Writes residual samples as CSV, row-major in `t` then `s`, `tau`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "condition,t,s,tau,residual")?;
        for p in &self.residual_points {
            let s = p.s.map_or(String::new(), |s| format!("{s:e}"));
            writeln!(w, "{},{:e},{},{:e},{:e}", p.condition, p.t, s, p.tau, p.value)?;
        }
        Ok(())
    }
}
