//! Dinkelbach's parametric method for a ratio objective over linear constraints.

use alloc::format;

use super::lp::LinearProblem;
use super::milp::branch_and_bound;
use super::{Solution, SolveStatus};
use crate::analysis::LinearForm;
use crate::error::{CoreError, Result};
use crate::expr::Expr;
use crate::model::Model;
use crate::normalize::{split_term, terms};

pub const MAX_ITERATIONS: usize = 100;
pub const TOLERANCE: f64 = 1e-10;

/// Optimizes `c * n(x) / d(x) + k` where `d > 0` on the feasible set.
///
/// Each step optimizes `n(x) - lambda d(x)` and sets `lambda` to the ratio at
/// the minimizer, until the parametric optimum vanishes.
pub fn dinkelbach(model: &Model) -> Result<Solution> {
    let model = model.normalized()?;
    let (num, den) = ratio_parts(&model.objective)?;
    let ratio_at = |x: &alloc::collections::BTreeMap<_, f64>| -> Result<f64> {
        let d = den.eval(x);
        if !(d > 0.0) {
            return Err(CoreError::DenominatorNotPositive(d));
        }
        Ok(num.eval(x) / d)
    };

    let mut sub = model.clone();
    sub.objective = Expr::Const(0.0);
    let start = solve_linear(&sub)?;
    if !start.is_optimal() {
        return Ok(start);
    }
    let mut lambda = ratio_at(&start.assignment)?;
    for _ in 0..MAX_ITERATIONS {
        sub.objective = num.minus(&den.scaled(lambda)).to_expr();
        let s = solve_linear(&sub)?;
        if !s.is_optimal() {
            return Ok(Solution::without_point(s.status));
        }
        let scale = 1.0 + num.eval(&s.assignment).abs() + (lambda * den.eval(&s.assignment)).abs();
        let next = ratio_at(&s.assignment)?;
        if s.objective.abs() <= TOLERANCE * scale || next == lambda {
            return Ok(Solution { objective: next, assignment: s.assignment, status: SolveStatus::Optimal });
        }
        lambda = next;
    }
    Err(CoreError::NoConvergence(MAX_ITERATIONS))
}

fn solve_linear(model: &Model) -> Result<Solution> {
    let lp = LinearProblem::from_model(model)?;
    Ok(branch_and_bound(&lp))
}

/// Folds `c * n / d + k` into `(c n + k d, d)`; a linear objective `f` gives `(f, 1)`.
pub(crate) fn ratio_parts(objective: &Expr) -> Result<(LinearForm, LinearForm)> {
    let mut rest = LinearForm::constant(0.0);
    let mut ratio = None;
    for t in terms(objective) {
        let (coef, factors) = split_term(t);
        match factors.as_slice() {
            [Expr::Quot(n, d)] if ratio.is_none() => ratio = Some((coef, n, d)),
            _ => match LinearForm::from_expr(t) {
                Some(f) => rest.add_scaled(&f, 1.0),
                None => return Err(CoreError::NotLinear(format!("objective term {t}"))),
            },
        }
    }
    let Some((coef, n, d)) = ratio else {
        return Ok((rest, LinearForm::constant(1.0)));
    };
    if !rest.is_constant() {
        return Err(CoreError::NotLinear(format!("objective {objective} mixes a ratio with linear terms")));
    }
    let n = LinearForm::from_expr(n).ok_or_else(|| CoreError::NotLinear(format!("{n}")))?;
    let d = LinearForm::from_expr(d).ok_or_else(|| CoreError::NotLinear(format!("{d}")))?;
    let mut num = n.scaled(coef);
    num.add_scaled(&d, rest.constant);
    Ok((num, d))
}
