//! JSON documents written by the command line.

use std::collections::BTreeMap;

use exactlin_core::rewrite::{Iteration, RewriteTrace};
use exactlin_core::{PatternInstance, Solution, VerifyReport};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationJson {
    pub t: usize,
    pub kind: String,
    pub instances: usize,
    pub aux_vars: Vec<String>,
    pub aux_constraints: Vec<String>,
    pub big_m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostSolveJson {
    #[serde(rename = "fn")]
    pub func: Option<String>,
    pub direction: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyJson {
    pub oracle_obj: f64,
    pub reformulated_obj: f64,
    pub recovered_obj: f64,
    pub abs_gap: f64,
    pub projected_feasible: bool,
    pub osr_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub input: String,
    pub iterations: Vec<IterationJson>,
    pub post_solve: PostSolveJson,
    pub verify: Option<VerifyJson>,
}

impl From<&Iteration> for IterationJson {
    fn from(it: &Iteration) -> Self {
        IterationJson {
            t: it.t,
            kind: it.kind.name().into(),
            instances: it.instances_replaced,
            aux_vars: it.aux_vars.iter().map(|v| v.name.clone()).collect(),
            aux_constraints: it.aux_constraints.clone(),
            big_m: it.big_m.iter().map(|b| b.m_value).collect(),
        }
    }
}

impl From<&VerifyReport> for VerifyJson {
    fn from(v: &VerifyReport) -> Self {
        VerifyJson {
            oracle_obj: v.oracle_obj,
            reformulated_obj: v.reformulated_obj,
            recovered_obj: v.recovered_obj,
            abs_gap: v.abs_gap,
            projected_feasible: v.projected_feasible,
            osr_pass: v.osr_pass,
        }
    }
}

pub fn trace_report(input: &str, trace: &RewriteTrace, verify: Option<&VerifyReport>) -> TraceReport {
    TraceReport {
        input: input.into(),
        iterations: trace.iterations.iter().map(IterationJson::from).collect(),
        post_solve: PostSolveJson {
            func: trace.post_solve.map(|p| p.func.name().into()),
            direction: trace.post_solve.map(|p| p.direction.name().into()),
        },
        verify: verify.map(VerifyJson::from),
    }
}

/// Serializes a rewrite trace and verification result; identical inputs give identical bytes.
pub fn emit_json_report(input: &str, trace: &RewriteTrace, verify: Option<&VerifyReport>) -> String {
    to_json(&trace_report(input, trace, verify))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub kind: String,
    pub path: String,
    pub polarity: String,
    pub coef: f64,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub input: String,
    pub kinds: Vec<String>,
    pub instances: Vec<InstanceJson>,
}

pub fn detection_report(input: &str, instances: &[PatternInstance]) -> DetectionReport {
    let mut kinds: Vec<String> = instances.iter().map(|i| i.kind.name().to_string()).collect();
    kinds.sort();
    kinds.dedup();
    DetectionReport {
        input: input.into(),
        kinds,
        instances: instances
            .iter()
            .map(|i| InstanceJson {
                kind: i.kind.name().into(),
                path: i.path.to_string(),
                polarity: i.polarity.name().into(),
                coef: i.coef,
                args: i.args.iter().map(|a| a.to_string()).collect(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub status: String,
    pub objective: Option<f64>,
    pub assignment: BTreeMap<String, f64>,
}

impl From<&Solution> for SolutionJson {
    fn from(s: &Solution) -> Self {
        SolutionJson {
            status: s.status.name().into(),
            objective: s.is_optimal().then_some(s.objective),
            assignment: s.assignment.clone(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
