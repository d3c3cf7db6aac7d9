//! Reference solver for the original nonlinear model.
//!
//! Binaries that multiply other variables are enumerated and substituted.
//! Every remaining `abs`, `min` and `max` occurrence is then resolved by case
//! analysis: each case picks the active branch, adds the dominance rows that
//! make it active, and replaces the occurrence by that branch. Each case is a
//! linear model, a ratio objective over linear rows (solved with Dinkelbach),
//! or a monotone function of a linear objective (solved on the inner affine
//! function). The best case is the optimum. No reformulation operator is used.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::dinkelbach::dinkelbach;
use super::milp::solve_milp;
use super::{Solution, SolveStatus};
use crate::analysis::LinearForm;
use crate::error::{CoreError, Result};
use crate::eval::evaluate;
use crate::expr::{Expr, MonoFn};
use crate::model::{Constraint, Model, Relation};
use crate::normalize::{normalize, split_term, terms};

pub const MAX_ORACLE_BINARIES: usize = 12;
pub const MAX_BRANCH_CASES: usize = 1 << 16;

/// Solves `model` exactly by enumeration; never calls a rewriting operator.
pub fn oracle_solve(model: &Model) -> Result<Solution> {
    model.validate()?;
    let base = model.normalized()?;
    let coupled: Vec<String> = coupled_binaries(&base).into_iter().collect();
    if coupled.len() > MAX_ORACLE_BINARIES {
        return Err(CoreError::OracleScaleExceeded(format!(
            "{} coupled binaries (limit {MAX_ORACLE_BINARIES})",
            coupled.len()
        )));
    }

    let mut best: Option<Solution> = None;
    let mut saw_limit = false;
    for mask in 0u32..(1u32 << coupled.len()) {
        let fixed: BTreeMap<String, f64> = coupled
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), if mask >> i & 1 == 1 { 1.0 } else { 0.0 }))
            .collect();
        let fixed_model = fix_binaries(&base, &fixed)?;
        let s = solve_cases(&fixed_model)?;
        match s.status {
            SolveStatus::Optimal => {
                if best.as_ref().is_none_or(|b| model.sense.better(s.objective, b.objective, 0.0)) {
                    best = Some(s);
                }
            }
            SolveStatus::Unbounded => return Ok(s),
            SolveStatus::IterationLimit => saw_limit = true,
            SolveStatus::Infeasible => {}
        }
    }
    let mut best = match best {
        Some(b) => b,
        None if saw_limit => return Ok(Solution::without_point(SolveStatus::IterationLimit)),
        None => return Ok(Solution::without_point(SolveStatus::Infeasible)),
    };
    if let Ok(v) = evaluate(&model.objective, &best.assignment, &model.param_map()) {
        best.objective = v;
    }
    Ok(best)
}

/// Binary variables appearing as a factor of a product with another variable.
fn coupled_binaries(model: &Model) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for e in model.expressions() {
        e.visit(&mut |node| {
            if let Expr::Prod(xs) = node {
                let var_factors = xs.iter().filter(|x| x.contains_var()).count();
                if var_factors >= 2 {
                    for x in xs {
                        if let Some(v) = x.as_var() {
                            if model.is_binary(v) {
                                out.insert(v.to_string());
                            }
                        }
                    }
                }
            }
        });
    }
    out
}

fn fix_binaries(model: &Model, fixed: &BTreeMap<String, f64>) -> Result<Model> {
    let params = model.param_map();
    let sub = |e: &Expr| normalize(&e.substitute(&|n| fixed.get(n).map(|v| Expr::Const(*v))), &params);
    let mut m = model.clone();
    m.objective = sub(&model.objective)?;
    for c in &mut m.constraints {
        c.lhs = sub(&c.lhs)?;
        c.rhs = sub(&c.rhs)?;
    }
    for v in &mut m.vars {
        if let Some(x) = fixed.get(&v.name) {
            v.lower = *x;
            v.upper = *x;
        }
    }
    Ok(m)
}

/// A piecewise atom and its branch cases: `(value, rows making it active)`.
struct Atom {
    expr: Expr,
    cases: Vec<(Expr, Vec<(Expr, Relation, Expr)>)>,
}

fn atom_cases(e: &Expr) -> Result<Option<Atom>> {
    let affine = |a: &Expr| -> Result<()> {
        match LinearForm::from_expr(a) {
            Some(_) => Ok(()),
            None => Err(CoreError::UnsupportedNonlinearity {
                path: format!("{e}"),
                reason: "nested nonlinear argument".into(),
            }),
        }
    };
    let cases = match e {
        Expr::Abs(t) => {
            affine(t)?;
            let t = (**t).clone();
            vec![
                (t.clone(), vec![(t.clone(), Relation::Ge, Expr::Const(0.0))]),
                (-t.clone(), vec![(t, Relation::Le, Expr::Const(0.0))]),
            ]
        }
        Expr::Min(args) | Expr::Max(args) => {
            let rel = if matches!(e, Expr::Min(_)) { Relation::Le } else { Relation::Ge };
            for a in args {
                affine(a)?;
            }
            args.iter()
                .enumerate()
                .map(|(i, a)| {
                    let rows = args
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, b)| (a.clone(), rel, b.clone()))
                        .collect();
                    (a.clone(), rows)
                })
                .collect()
        }
        _ => return Ok(None),
    };
    Ok(Some(Atom { expr: e.clone(), cases }))
}

fn collect_atoms(model: &Model) -> Result<Vec<Atom>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut err = None;
    for e in model.expressions() {
        e.visit(&mut |node| {
            if matches!(node, Expr::Abs(_) | Expr::Min(_) | Expr::Max(_)) && seen.insert(node.clone()) {
                match atom_cases(node) {
                    Ok(Some(a)) => out.push(a),
                    Ok(None) => {}
                    Err(e) => err = Some(e),
                }
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn replace_atoms(e: &Expr, chosen: &BTreeMap<&Expr, &Expr>) -> Expr {
    if let Some(r) = chosen.get(e) {
        return (*r).clone();
    }
    let map = |xs: &Vec<Expr>| xs.iter().map(|x| replace_atoms(x, chosen)).collect::<Vec<_>>();
    let boxed = |x: &Expr| alloc::boxed::Box::new(replace_atoms(x, chosen));
    match e {
        Expr::Const(_) | Expr::Param(_) | Expr::Var(_) => e.clone(),
        Expr::Sum(xs) => Expr::Sum(map(xs)),
        Expr::Prod(xs) => Expr::Prod(map(xs)),
        Expr::Neg(x) => Expr::Neg(boxed(x)),
        Expr::Abs(x) => Expr::Abs(boxed(x)),
        Expr::Min(xs) => Expr::Min(map(xs)),
        Expr::Max(xs) => Expr::Max(map(xs)),
        Expr::Quot(n, d) => Expr::Quot(boxed(n), boxed(d)),
        Expr::Mono(f, x) => Expr::Mono(*f, boxed(x)),
    }
}

fn solve_cases(model: &Model) -> Result<Solution> {
    let atoms = collect_atoms(model)?;
    let mut total: usize = 1;
    for a in &atoms {
        total = total.saturating_mul(a.cases.len());
    }
    if total > MAX_BRANCH_CASES {
        return Err(CoreError::OracleScaleExceeded(format!(
            "{total} branch cases (limit {MAX_BRANCH_CASES})"
        )));
    }

    let params = model.param_map();
    let mut best: Option<Solution> = None;
    let mut saw_limit = false;
    let mut choice = vec![0usize; atoms.len()];
    for _ in 0..total {
        let chosen: BTreeMap<&Expr, &Expr> =
            atoms.iter().zip(&choice).map(|(a, &k)| (&a.expr, &a.cases[k].0)).collect();
        let mut case = model.clone();
        case.objective = normalize(&replace_atoms(&model.objective, &chosen), &params)?;
        for c in &mut case.constraints {
            c.lhs = normalize(&replace_atoms(&c.lhs, &chosen), &params)?;
            c.rhs = normalize(&replace_atoms(&c.rhs, &chosen), &params)?;
        }
        for (i, (a, &k)) in atoms.iter().zip(&choice).enumerate() {
            for (j, (l, rel, r)) in a.cases[k].1.iter().enumerate() {
                case.constraints.push(Constraint::new(
                    format!("_case_{i}_{j}"),
                    normalize(l, &params)?,
                    *rel,
                    normalize(r, &params)?,
                ));
            }
        }
        let s = solve_smooth(&case)?;
        match s.status {
            SolveStatus::Optimal => {
                if best.as_ref().is_none_or(|b| model.sense.better(s.objective, b.objective, 0.0)) {
                    best = Some(s);
                }
            }
            SolveStatus::Unbounded => return Ok(s),
            SolveStatus::IterationLimit => saw_limit = true,
            SolveStatus::Infeasible => {}
        }
        for (k, a) in choice.iter_mut().zip(&atoms) {
            *k += 1;
            if *k < a.cases.len() {
                break;
            }
            *k = 0;
        }
    }
    Ok(match best {
        Some(b) => b,
        None if saw_limit => Solution::without_point(SolveStatus::IterationLimit),
        None => Solution::without_point(SolveStatus::Infeasible),
    })
}

fn inverse(f: MonoFn, y: f64) -> Option<f64> {
    match f {
        MonoFn::Exp => (y > 0.0).then(|| libm::log(y)),
        MonoFn::Log => Some(libm::exp(y)),
        MonoFn::Sqrt => (y >= 0.0).then_some(y * y),
    }
}

/// Solves a case whose only nonlinearities are monotone wrappers and a ratio objective.
fn solve_smooth(model: &Model) -> Result<Solution> {
    let mut m = model.clone();
    let mut rows = Vec::with_capacity(m.constraints.len());
    for c in m.constraints.drain(..) {
        let (inner, rel, other) = match (&c.lhs, &c.rhs) {
            (Expr::Mono(f, g), o) => ((*f, (**g).clone()), c.rel, o.clone()),
            (o, Expr::Mono(f, g)) => ((*f, (**g).clone()), c.rel.flipped(), o.clone()),
            _ => {
                rows.push(c);
                continue;
            }
        };
        let (f, g) = inner;
        let alpha = other.as_const().ok_or_else(|| CoreError::UnsupportedNonlinearity {
            path: c.name.clone(),
            reason: "monotone compared with a non-constant".into(),
        })?;
        if matches!(f, MonoFn::Sqrt | MonoFn::Log) {
            rows.push(Constraint::new(format!("{}_dom", c.name), g.clone(), Relation::Ge, Expr::Const(0.0)));
        }
        match (inverse(f, alpha), rel) {
            (Some(b), _) => rows.push(Constraint::new(c.name, g, rel, Expr::Const(b))),
            // The range of f lies strictly above alpha.
            (None, Relation::Ge) => {}
            (None, _) => return Ok(Solution::without_point(SolveStatus::Infeasible)),
        }
    }
    m.constraints = rows;

    let mut mono = None;
    let mut offset = 0.0;
    let mut has_quot = false;
    for t in terms(&m.objective) {
        let (coef, factors) = split_term(t);
        match factors.as_slice() {
            [Expr::Mono(f, g)] if mono.is_none() => mono = Some((coef, *f, (**g).clone())),
            [Expr::Quot(..)] => has_quot = true,
            [] => offset += coef,
            _ => {}
        }
    }
    if let Some((coef, f, g)) = mono {
        if terms(&m.objective).len() > 1 + usize::from(offset != 0.0) {
            return Err(CoreError::UnsupportedNonlinearity {
                path: "objective".into(),
                reason: "monotone term mixed with other terms".into(),
            });
        }
        m.objective = g;
        if coef < 0.0 {
            m.sense = m.sense.flipped();
        }
        let mut s = solve_milp(&m)?;
        if s.is_optimal() {
            let inner = f.apply(s.objective).ok_or_else(|| {
                CoreError::DomainError(format!("{f} at {}", s.objective))
            })?;
            s.objective = coef * inner + offset;
        }
        return Ok(s);
    }
    if has_quot {
        return dinkelbach(&m);
    }
    solve_milp(&m)
}
