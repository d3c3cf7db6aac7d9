//! Runs the full pipeline over a set of instances.

use std::time::Instant;

use exactlin_core::{
    applicable_kinds, run_fixpoint, solve_milp, verify_equivalence, Model, Order,
};

use crate::corpus::{CorpusEntry, InstanceAnnotation};
use crate::error::Result;
use crate::lp::{check_round_trip, emit_lp};
use crate::metrics::{compute_metrics, BenchReport, InstanceOutcome};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub order: Order,
    pub seed: u64,
    pub tol: f64,
    /// Record wall-clock time per instance (makes the report non-reproducible).
    pub timings: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { order: Order::FixedPriority, seed: 0, tol: 1e-4, timings: false }
    }
}

/// Detects, rewrites, emits, re-reads, solves and verifies one model.
pub fn evaluate_instance(id: &str, model: &Model, opts: &BenchOptions) -> InstanceOutcome {
    let start = Instant::now();
    let mut out = InstanceOutcome {
        id: id.into(),
        detected: Default::default(),
        reformulate_ok: false,
        emit_ok: false,
        osr_pass: false,
        runtime_ms: None,
        error: None,
    };
    let note = |e: String, out: &mut InstanceOutcome| {
        out.error.get_or_insert(e);
    };
    match applicable_kinds(model) {
        Ok(k) => out.detected = k,
        Err(e) => note(format!("detect: {e}"), &mut out),
    }
    match run_fixpoint(model, opts.order, opts.seed) {
        Ok((linear, trace)) => {
            let emitted = emit_lp(&linear);
            let solved = solve_milp(&linear);
            out.reformulate_ok = emitted.is_ok() && solved.as_ref().is_ok_and(|s| s.is_optimal());
            if let Err(e) = &emitted {
                note(format!("emit: {e}"), &mut out);
            }
            match check_round_trip(&linear) {
                Ok(()) => out.emit_ok = true,
                Err(e) => note(format!("round trip: {e}"), &mut out),
            }
            match verify_equivalence(model, &linear, &trace, opts.tol) {
                Ok(r) => {
                    out.osr_pass = r.osr_pass;
                    if !r.osr_pass {
                        note(
                            format!("oracle {} vs recovered {} (feasible {})", r.oracle_obj, r.recovered_obj, r.projected_feasible),
                            &mut out,
                        );
                    }
                }
                Err(e) => note(format!("verify: {e}"), &mut out),
            }
        }
        Err(e) => note(format!("rewrite: {e}"), &mut out),
    }
    if opts.timings {
        out.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    out
}

pub fn run_instances(items: &[(String, Model, InstanceAnnotation)], opts: &BenchOptions) -> Result<BenchReport> {
    let outcomes: Vec<InstanceOutcome> =
        items.iter().map(|(id, m, _)| evaluate_instance(id, m, opts)).collect();
    let anns: Vec<(String, InstanceAnnotation)> =
        items.iter().map(|(id, _, a)| (id.clone(), a.clone())).collect();
    compute_metrics(&outcomes, &anns)
}

pub fn run_bench(entries: &[CorpusEntry], opts: &BenchOptions) -> Result<BenchReport> {
    let items: Vec<_> =
        entries.iter().map(|e| (e.id.clone(), e.model.clone(), e.annotation.clone())).collect();
    run_instances(&items, opts)
}
