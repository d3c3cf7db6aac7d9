use alloc::format;
use alloc::vec::Vec;

use super::{one_minus, scaled, Builder, Rewrite};
use crate::analysis::{form_interval, Interval, LinearForm};
use crate::detect::{PatternInstance, PatternKind, Polarity};
use crate::error::{CoreError, Result};
use crate::expr::Expr;
use crate::model::{Model, Relation, VarDecl};

const TAG_LOGIC: u8 = 0;
const TAG_BOUND: u8 = 1;
const TAG_DISJUNCTIVE: u8 = 2;

/// Rewrites `min`/`max` occurrences by split, epigraph/hypograph or disjunction.
///
/// All instances must share one kind (`Min` or `Max`).
pub fn rewrite_minmax(model: &Model, instances: &[PatternInstance]) -> Result<Rewrite> {
    let kind = match instances.first() {
        Some(i) => i.kind,
        None => return Builder::new(model, PatternKind::Min)?.finish(),
    };
    if !matches!(kind, PatternKind::Min | PatternKind::Max) {
        return Err(CoreError::Invariant(format!("{kind} passed to min/max")));
    }
    let is_max = kind == PatternKind::Max;
    let mut b = Builder::new(model, kind)?;
    for inst in instances {
        if inst.kind != kind {
            return Err(CoreError::Invariant("mixed min/max batch".into()));
        }
        let all_binary = inst.args.iter().all(|a| a.as_var().is_some_and(|v| b.model.is_binary(v)));
        if all_binary {
            let aux = match b.shared(TAG_LOGIC, &inst.args) {
                Some(a) => a,
                None => {
                    let a = logic(&mut b, &inst.args, is_max);
                    b.remember(TAG_LOGIC, &inst.args, a.clone());
                    a
                }
            };
            b.replace(inst, aux);
            continue;
        }
        match inst.polarity {
            Polarity::ConstraintSplit => b.split(inst, inst.args.clone())?,
            Polarity::Benign => {
                let aux = match b.shared(TAG_BOUND, &inst.args) {
                    Some(a) => a,
                    None => {
                        let a = one_sided(&mut b, &inst.args, is_max);
                        b.remember(TAG_BOUND, &inst.args, a.clone());
                        a
                    }
                };
                b.replace(inst, aux);
            }
            Polarity::Adverse => {
                let aux = match b.shared(TAG_DISJUNCTIVE, &inst.args) {
                    Some(a) => a,
                    None => {
                        let a = disjunctive(&mut b, &inst.args, is_max)?;
                        b.remember(TAG_DISJUNCTIVE, &inst.args, a.clone());
                        a
                    }
                };
                b.replace(inst, aux);
            }
        }
    }
    b.finish()
}

fn ranges(b: &Builder, args: &[Expr]) -> Vec<Interval> {
    args.iter()
        .map(|a| {
            let f = LinearForm::from_expr(a).expect("detector guarantees affine args");
            form_interval(&f, &b.model)
        })
        .collect()
}

/// `min` over binaries is an AND, `max` an OR.
fn logic(b: &mut Builder, args: &[Expr], is_max: bool) -> Expr {
    let (n, name) = b.fresh();
    let z = b.add_var(VarDecl::continuous(name, 0.0, 1.0));
    let rel = if is_max { Relation::Ge } else { Relation::Le };
    for (k, a) in args.iter().enumerate() {
        let c = b.constraint_name(n, k);
        b.add_constraint(c, z.clone(), rel, a.clone());
    }
    let sum = Expr::Sum(args.to_vec());
    let c = b.constraint_name(n, args.len());
    if is_max {
        b.add_constraint(c, z.clone(), Relation::Le, sum);
    } else {
        let slack = Expr::Const(args.len() as f64 - 1.0);
        b.add_constraint(c, z.clone(), Relation::Ge, sum - slack);
    }
    z
}

/// Epigraph (`max`) or hypograph (`min`) variable.
fn one_sided(b: &mut Builder, args: &[Expr], is_max: bool) -> Expr {
    let iv = ranges(b, args);
    let (lo, hi) = if is_max {
        (iv.iter().map(|i| i.lo).fold(f64::NEG_INFINITY, f64::max),
         iv.iter().map(|i| i.hi).fold(f64::NEG_INFINITY, f64::max))
    } else {
        (iv.iter().map(|i| i.lo).fold(f64::INFINITY, f64::min),
         iv.iter().map(|i| i.hi).fold(f64::INFINITY, f64::min))
    };
    let (n, name) = b.fresh();
    let z = b.add_var(VarDecl::continuous(name, lo, hi));
    let rel = if is_max { Relation::Ge } else { Relation::Le };
    for (k, a) in args.iter().enumerate() {
        let c = b.constraint_name(n, k);
        b.add_constraint(c, z.clone(), rel, a.clone());
    }
    z
}

/// Exact value of `min`/`max` via selector binaries and derived big-M constants.
fn disjunctive(b: &mut Builder, args: &[Expr], is_max: bool) -> Result<Expr> {
    let iv = ranges(b, args);
    for (a, i) in args.iter().zip(&iv) {
        i.require_finite(&format!("{a}"))?;
    }
    let min_lo = iv.iter().map(|i| i.lo).fold(f64::INFINITY, f64::min);
    let max_hi = iv.iter().map(|i| i.hi).fold(f64::NEG_INFINITY, f64::max);
    let (zlo, zhi) = if is_max {
        (iv.iter().map(|i| i.lo).fold(f64::NEG_INFINITY, f64::max), max_hi)
    } else {
        (min_lo, iv.iter().map(|i| i.hi).fold(f64::INFINITY, f64::min))
    };
    let (n, name) = b.fresh();
    let z = b.add_var(VarDecl::continuous(name.clone(), zlo, zhi));
    let mut selectors = Vec::with_capacity(args.len());
    for k in 0..args.len() {
        selectors.push(b.add_var(VarDecl::binary(format!("{name}_s{k}"))));
    }
    let mut row = 0;
    for (k, a) in args.iter().enumerate() {
        let (rel, m, back) = if is_max {
            (Relation::Ge, max_hi - iv[k].lo, Relation::Le)
        } else {
            (Relation::Le, iv[k].hi - min_lo, Relation::Ge)
        };
        let c = b.constraint_name(n, row);
        row += 1;
        b.add_constraint(c, z.clone(), rel, a.clone());
        let c = b.constraint_name(n, row);
        row += 1;
        let slack = scaled(m, &one_minus(&selectors[k]));
        let bound = if is_max { a.clone() + slack } else { a.clone() - slack };
        b.big_m(&c, m, Interval::new(min_lo, max_hi));
        b.add_constraint(c, z.clone(), back, bound);
    }
    let c = b.constraint_name(n, row);
    b.add_constraint(c, Expr::Sum(selectors), Relation::Eq, Expr::Const(1.0));
    Ok(z)
}
