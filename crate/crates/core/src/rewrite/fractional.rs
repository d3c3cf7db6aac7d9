use alloc::format;
use alloc::vec::Vec;

use super::{Builder, Rewrite, ScaleRecovery};
use crate::analysis::{form_interval, LinearForm};
use crate::detect::{detect_patterns, Location, PatternInstance, PatternKind};
use crate::error::{CoreError, Result};
use crate::expr::Expr;
use crate::model::{Constraint, Model, Relation, VarDecl};
use crate::normalize::{split_term, terms};

/// Charnes–Cooper transform of a linear-fractional objective.
///
/// With `tau = 1 / den(x)` and `y = tau * x` (reusing the names of `x`), the
/// objective becomes `num(y, tau)` subject to every constraint homogenized in
/// `tau` and `den(y, tau) = 1`. Recover `x = y / tau`.
pub fn rewrite_fractional(model: &Model, instance: &PatternInstance) -> Result<Rewrite> {
    if instance.kind != PatternKind::LinearFractional || instance.path.location != Location::Objective
    {
        return Err(CoreError::FractionalNotIsolated(format!("{}", instance.path)));
    }
    let others: Vec<_> = detect_patterns(model)?
        .into_iter()
        .filter(|i| i.kind != PatternKind::LinearFractional)
        .map(|i| format!("{} at {}", i.kind, i.path))
        .collect();
    if !others.is_empty() {
        return Err(CoreError::FractionalNotIsolated(others.join(", ")));
    }
    if model.has_integers() {
        return Err(CoreError::FractionalWithIntegers);
    }

    let mut b = Builder::new(model, PatternKind::LinearFractional)?;
    let (num, den) = objective_ratio(&b.model.objective, instance)?;
    let range = form_interval(&den, &b.model);
    if !(range.lo > 0.0) {
        return Err(CoreError::DenominatorNotPositive(range.lo));
    }

    let originals: Vec<VarDecl> = b.model.vars.clone();
    let (n, tau_name) = b.fresh();
    let tau_lo = if range.hi.is_finite() { 1.0 / range.hi } else { 0.0 };
    let tau = b.add_var(VarDecl::continuous(tau_name.clone(), tau_lo, 1.0 / range.lo));
    let homogenize = |f: &LinearForm| -> Expr {
        let mut ts: Vec<Expr> =
            f.coeffs.iter().map(|(v, c)| Expr::Const(*c) * Expr::var(v.as_str())).collect();
        ts.push(Expr::Const(f.constant) * tau.clone());
        Expr::Sum(ts)
    };

    let mut constraints = Vec::with_capacity(b.model.constraints.len() + originals.len() + 1);
    for c in &b.model.constraints {
        let lhs = LinearForm::from_expr(&c.lhs);
        let rhs = LinearForm::from_expr(&c.rhs);
        let (Some(lhs), Some(rhs)) = (lhs, rhs) else {
            return Err(CoreError::FractionalNotIsolated(format!("constraint `{}`", c.name)));
        };
        constraints.push(Constraint::new(
            c.name.clone(),
            homogenize(&lhs.minus(&rhs)),
            c.rel,
            Expr::Const(0.0),
        ));
    }
    let mut row = 0;
    let mut push_row = |b: &mut Builder, lhs: Expr, rel: Relation, rhs: Expr| {
        let name = b.constraint_name(n, row);
        row += 1;
        b.out.aux_constraints.push(name.clone());
        constraints.push(Constraint::new(name, lhs, rel, rhs));
    };
    push_row(&mut b, homogenize(&den), Relation::Eq, Expr::Const(1.0));

    let mut scaled_vars = Vec::with_capacity(originals.len());
    for v in &originals {
        let y = Expr::var(v.name.as_str());
        if v.lower.is_finite() && v.lower != 0.0 {
            push_row(&mut b, y.clone(), Relation::Ge, Expr::Const(v.lower) * tau.clone());
        }
        if v.upper.is_finite() && v.upper != 0.0 {
            push_row(&mut b, y.clone(), Relation::Le, Expr::Const(v.upper) * tau.clone());
        }
        let decl = b.model.vars.iter_mut().find(|d| d.name == v.name).expect("declared");
        decl.lower = if v.lower >= 0.0 { 0.0 } else { f64::NEG_INFINITY };
        decl.upper = if v.upper <= 0.0 { 0.0 } else { f64::INFINITY };
        scaled_vars.push(v.name.clone());
    }

    b.model.objective = homogenize(&num);
    b.model.constraints = constraints;
    b.out.instances_replaced = 1;
    b.out.recovery = Some(ScaleRecovery { scale_var: tau_name, scaled_vars });
    b.out.notes.push(format!("denominator range {range}; recover x = y / tau"));
    b.finish()
}

/// Splits `coef * num / den + k` into the forms `coef*num + k*den` and `den`.
fn objective_ratio(objective: &Expr, instance: &PatternInstance) -> Result<(LinearForm, LinearForm)> {
    let mut offset = 0.0;
    let mut ratio = None;
    for (i, t) in terms(objective).into_iter().enumerate() {
        if i == instance.path.term {
            let (coef, factors) = split_term(t);
            if let [Expr::Quot(n, d)] = factors.as_slice() {
                ratio = Some((coef, n, d));
                continue;
            }
        }
        match t.as_const() {
            Some(c) => offset += c,
            None => return Err(CoreError::FractionalNotIsolated(format!("objective term {t}"))),
        }
    }
    let (coef, n, d) = ratio.ok_or_else(|| CoreError::FractionalNotIsolated("no quotient".into()))?;
    let num = LinearForm::from_expr(n).ok_or_else(|| CoreError::NotLinear(format!("{n}")))?;
    let den = LinearForm::from_expr(d).ok_or_else(|| CoreError::NotLinear(format!("{d}")))?;
    let mut scaled = num.scaled(coef);
    scaled.add_scaled(&den, offset);
    Ok((scaled, den))
}
