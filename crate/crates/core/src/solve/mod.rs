//! Desk-scale LP/MILP solving and the independent oracles used for verification.

mod dinkelbach;
mod lp;
mod milp;
mod oracle;
mod verify;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

pub use dinkelbach::dinkelbach;
pub use lp::{solve_lp, LinearProblem, LpOutcome};
pub use milp::solve_milp;
pub use oracle::{oracle_solve, MAX_BRANCH_CASES, MAX_ORACLE_BINARIES};
pub use verify::{project, verify_equivalence, VerifyReport};

use crate::analysis::LinearForm;
use crate::error::{CoreError, Result};
use crate::model::{Model, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub assignment: BTreeMap<String, f64>,
    pub objective: f64,
    pub status: SolveStatus,
}

impl Solution {
    pub fn without_point(status: SolveStatus) -> Self {
        Solution { assignment: BTreeMap::new(), objective: f64::NAN, status }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Maximum constraint violation of a point on a linear model, with bounds and integrality.
pub fn max_violation(model: &Model, point: &BTreeMap<String, f64>) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in &model.vars {
        let x = *point.get(&v.name).ok_or_else(|| CoreError::UnboundSymbol(v.name.clone()))?;
        worst = worst.max(v.lower - x).max(x - v.upper);
        if v.domain.is_integral() {
            worst = worst.max((x - libm::round(x)).abs());
        }
    }
    let params = model.param_map();
    for c in &model.constraints {
        let l = crate::eval::evaluate(&c.lhs, point, &params)?;
        let r = crate::eval::evaluate(&c.rhs, point, &params)?;
        worst = worst.max(c.rel.violation(l, r));
    }
    Ok(worst)
}

pub(crate) fn linear_objective(model: &Model) -> Result<LinearForm> {
    LinearForm::from_expr(&model.objective)
        .ok_or_else(|| CoreError::NotLinear(format!("objective: {}", model.objective)))
}

pub(crate) fn sense_sign(sense: Sense) -> f64 {
    match sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    }
}
