//! Detection, reformulation, compile and overall success rates.
//!
//! - DSR: detected kind set equals the annotated kind set.
//! - RSR: the fixpoint succeeded, the result was emitted as LP and solved to optimality.
//! - CSR: the emitted LP text reads back to the same coefficient data.
//! - OSR: the verification report passed at the configured tolerance.

use std::collections::BTreeSet;

use exactlin_core::PatternKind;
use serde::{Deserialize, Serialize};

use crate::corpus::InstanceAnnotation;
use crate::error::{Error, Result};

/// What happened to one instance in the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOutcome {
    pub id: String,
    pub detected: BTreeSet<PatternKind>,
    pub reformulate_ok: bool,
    pub emit_ok: bool,
    pub osr_pass: bool,
    pub runtime_ms: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub id: String,
    pub detect_ok: bool,
    pub reformulate_ok: bool,
    pub emit_ok: bool,
    pub osr_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub dsr: f64,
    pub rsr: f64,
    pub csr: f64,
    pub osr: f64,
}

impl Aggregates {
    pub fn all_perfect(&self) -> bool {
        [self.dsr, self.rsr, self.csr, self.osr].iter().all(|v| *v == 100.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub instances: Vec<InstanceReport>,
    pub aggregates: Aggregates,
}

/// Combines per-instance outcomes with their annotations, aligned by id.
pub fn compute_metrics(
    outcomes: &[InstanceOutcome],
    annotations: &[(String, InstanceAnnotation)],
) -> Result<BenchReport> {
    if outcomes.is_empty() {
        return Err(Error::Invalid("no instances to score".into()));
    }
    if outcomes.len() != annotations.len() {
        return Err(Error::Invalid(format!(
            "{} outcomes but {} annotations",
            outcomes.len(),
            annotations.len()
        )));
    }
    let mut rows: Vec<InstanceReport> = Vec::with_capacity(outcomes.len());
    for (o, (id, ann)) in outcomes.iter().zip(annotations) {
        if &o.id != id {
            return Err(Error::Invalid(format!("outcome `{}` aligned with annotation `{id}`", o.id)));
        }
        let expected: BTreeSet<PatternKind> = ann.expected_kinds.iter().copied().collect();
        rows.push(InstanceReport {
            id: o.id.clone(),
            detect_ok: expected == o.detected,
            reformulate_ok: o.reformulate_ok,
            emit_ok: o.emit_ok,
            osr_pass: o.osr_pass,
            runtime_ms: o.runtime_ms,
            error: o.error.clone(),
        });
    }
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    let n = rows.len() as f64;
    let rate = |f: fn(&InstanceReport) -> bool| 100.0 * rows.iter().filter(|r| f(r)).count() as f64 / n;
    let aggregates = Aggregates {
        dsr: rate(|r| r.detect_ok),
        rsr: rate(|r| r.reformulate_ok),
        csr: rate(|r| r.emit_ok),
        osr: rate(|r| r.osr_pass),
    };
    Ok(BenchReport { instances: rows, aggregates })
}
