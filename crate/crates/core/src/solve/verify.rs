use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use super::milp::solve_milp;
use super::oracle::oracle_solve;
use super::{max_violation, SolveStatus};
use crate::error::{CoreError, Result};
use crate::eval::evaluate;
use crate::model::Model;
use crate::rewrite::RewriteTrace;

/// Feasibility tolerance for projected points, scaled by the point's magnitude.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub oracle_obj: f64,
    pub reformulated_obj: f64,
    /// Reformulated optimum mapped back through the trace's post-solve step.
    pub recovered_obj: f64,
    pub abs_gap: f64,
    pub projected_feasible: bool,
    pub osr_pass: bool,
    /// Original objective evaluated at the projected point.
    pub projected_obj: f64,
    pub oracle_status: SolveStatus,
    pub reformulated_status: SolveStatus,
}

/// Maps a solution of the reformulated model onto the original variables.
pub fn project(
    original: &Model,
    trace: &RewriteTrace,
    assignment: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>> {
    let tau = match &trace.recovery {
        Some(r) => {
            let t = *assignment
                .get(&r.scale_var)
                .ok_or_else(|| CoreError::ProjectionFailure(format!("missing `{}`", r.scale_var)))?;
            if !(t > 0.0) {
                return Err(CoreError::ProjectionFailure(format!("scale `{}` = {t}", r.scale_var)));
            }
            Some((r, t))
        }
        None => None,
    };
    let mut out = BTreeMap::new();
    for v in &original.vars {
        let x = *assignment
            .get(&v.name)
            .ok_or_else(|| CoreError::ProjectionFailure(format!("no value for `{}`", v.name)))?;
        let x = match tau {
            Some((r, t)) if r.scaled_vars.iter().any(|s| s == &v.name) => x / t,
            _ => x,
        };
        out.insert(v.name.clone(), x);
    }
    Ok(out)
}

/// Compares the reformulated optimum against the oracle optimum of `original`.
pub fn verify_equivalence(
    original: &Model,
    reformulated: &Model,
    trace: &RewriteTrace,
    tol: f64,
) -> Result<VerifyReport> {
    let oracle = oracle_solve(original)?;
    let solved = solve_milp(reformulated)?;
    let mut report = VerifyReport {
        oracle_obj: oracle.objective,
        reformulated_obj: solved.objective,
        recovered_obj: f64::NAN,
        abs_gap: f64::INFINITY,
        projected_feasible: false,
        osr_pass: false,
        projected_obj: f64::NAN,
        oracle_status: oracle.status,
        reformulated_status: solved.status,
    };
    if !solved.is_optimal() || !oracle.is_optimal() {
        if solved.status == oracle.status && solved.status != SolveStatus::IterationLimit {
            report.abs_gap = 0.0;
            report.projected_feasible = true;
            report.osr_pass = true;
        }
        return Ok(report);
    }
    report.recovered_obj = match &trace.post_solve {
        Some(p) => p.apply(solved.objective).ok_or_else(|| {
            CoreError::DomainError(format!("{} at {}", p.func, solved.objective))
        })?,
        None => solved.objective,
    };
    let point = project(original, trace, &solved.assignment)?;
    let scale = 1.0 + point.values().fold(0.0f64, |m, x| m.max(x.abs()));
    report.projected_feasible = max_violation(original, &point)? <= FEASIBILITY_TOL * scale;
    report.projected_obj = evaluate(&original.objective, &point, &original.param_map())?;
    report.abs_gap = (report.oracle_obj - report.recovered_obj).abs();
    report.osr_pass = report.abs_gap <= tol && report.projected_feasible;
    Ok(report)
}
