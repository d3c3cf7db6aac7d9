use alloc::format;

use super::{one_minus, scaled, AbsBenignForm, Builder, RewriteOptions, Rewrite};
use crate::analysis::{form_interval, Interval, LinearForm};
use crate::detect::{pressure, PatternInstance, PatternKind, Polarity, Pressure};
use crate::error::{CoreError, Result};
use crate::expr::Expr;
use crate::model::{Model, Relation, VarDecl};

const TAG_TWO: u8 = 0;
const TAG_PARTS: u8 = 1;
const TAG_BINARY: u8 = 2;
const TAG_PARTS_BINARY: u8 = 3;

/// Rewrites `abs(t)` for affine `t`.
///
/// Occurrences pushed downward use `y >= t, y >= -t` (or the positive/negative
/// parts form when selected in `opts`); a constraint whose only nonlinearity
/// is the occurrence is split in two; occurrences inside equalities use the
/// positive/negative parts with a complementarity binary; all remaining
/// occurrences use the four-inequality binary encoding.
pub fn rewrite_abs(
    model: &Model,
    instances: &[PatternInstance],
    opts: &RewriteOptions,
) -> Result<Rewrite> {
    let mut b = Builder::new(model, PatternKind::Abs)?;
    for inst in instances {
        if inst.kind != PatternKind::Abs {
            return Err(CoreError::Invariant(format!("{} passed to abs", inst.kind)));
        }
        let t = inst.args[0].clone();
        let (tag, make): (u8, fn(&mut Builder, &Expr) -> Result<Expr>) = match inst.polarity {
            Polarity::ConstraintSplit => {
                b.split(inst, alloc::vec![t.clone(), -t.clone()])?;
                continue;
            }
            Polarity::Benign => match opts.abs_benign {
                AbsBenignForm::TwoInequalities => (TAG_TWO, two_inequalities),
                AbsBenignForm::PosNegParts => (TAG_PARTS, |b, t| pos_neg(b, t, false)),
            },
            Polarity::Adverse => {
                if pressure(&inst.path.location, inst.coef, &b.model) == Pressure::Both {
                    (TAG_PARTS_BINARY, |b, t| pos_neg(b, t, true))
                } else {
                    (TAG_BINARY, binary_split)
                }
            }
        };
        let key = [t.clone()];
        let aux = match b.shared(tag, &key) {
            Some(a) => a,
            None => {
                let a = make(&mut b, &t)?;
                b.remember(tag, &key, a.clone());
                a
            }
        };
        b.replace(inst, aux);
    }
    b.finish()
}

fn range(b: &Builder, t: &Expr) -> Interval {
    let f = LinearForm::from_expr(t).expect("detector guarantees affine arg");
    form_interval(&f, &b.model)
}

fn abs_range(iv: Interval) -> (f64, f64) {
    let lo = if iv.lo > 0.0 {
        iv.lo
    } else if iv.hi < 0.0 {
        -iv.hi
    } else {
        0.0
    };
    (lo, iv.magnitude())
}

fn two_inequalities(b: &mut Builder, t: &Expr) -> Result<Expr> {
    let (lo, hi) = abs_range(range(b, t));
    let (n, name) = b.fresh();
    let y = b.add_var(VarDecl::continuous(name, lo, hi));
    let c = b.constraint_name(n, 0);
    b.add_constraint(c, y.clone(), Relation::Ge, t.clone());
    let c = b.constraint_name(n, 1);
    b.add_constraint(c, y.clone(), Relation::Ge, -t.clone());
    Ok(y)
}

/// `t = t+ - t-`, `y = t+ + t-`; with `complementary`, a binary keeps one part at zero.
fn pos_neg(b: &mut Builder, t: &Expr, complementary: bool) -> Result<Expr> {
    let iv = range(b, t);
    let u = if complementary {
        iv.require_finite(&format!("{t}"))?.magnitude()
    } else {
        iv.magnitude()
    };
    let (ylo, yhi) = abs_range(iv);
    let (n, name) = b.fresh();
    let y = b.add_var(VarDecl::continuous(name.clone(), ylo, yhi));
    let pos = b.add_var(VarDecl::continuous(format!("{name}_pos"), 0.0, iv.hi.max(0.0)));
    let neg = b.add_var(VarDecl::continuous(format!("{name}_neg"), 0.0, (-iv.lo).max(0.0)));
    let c = b.constraint_name(n, 0);
    b.add_constraint(c, t.clone(), Relation::Eq, pos.clone() - neg.clone());
    let c = b.constraint_name(n, 1);
    b.add_constraint(c, y.clone(), Relation::Eq, pos.clone() + neg.clone());
    if complementary {
        let beta = b.add_var(VarDecl::binary(format!("{name}_sel")));
        let c = b.constraint_name(n, 2);
        b.big_m(&c, u, iv);
        b.add_constraint(c, pos, Relation::Le, scaled(u, &beta));
        let c = b.constraint_name(n, 3);
        b.add_constraint(c, neg, Relation::Le, scaled(u, &one_minus(&beta)));
    }
    Ok(y)
}

/// `y >= t, y >= -t, y <= t + 2U(1-beta), y <= -t + 2U beta`.
fn binary_split(b: &mut Builder, t: &Expr) -> Result<Expr> {
    let iv = range(b, t).require_finite(&format!("{t}"))?;
    let u = iv.magnitude();
    let (ylo, yhi) = abs_range(iv);
    let (n, name) = b.fresh();
    let y = b.add_var(VarDecl::continuous(name.clone(), ylo, yhi));
    let beta = b.add_var(VarDecl::binary(format!("{name}_sel")));
    let c = b.constraint_name(n, 0);
    b.add_constraint(c, y.clone(), Relation::Ge, t.clone());
    let c = b.constraint_name(n, 1);
    b.add_constraint(c, y.clone(), Relation::Ge, -t.clone());
    let c = b.constraint_name(n, 2);
    b.big_m(&c, 2.0 * u, iv);
    b.add_constraint(c, y.clone(), Relation::Le, t.clone() + scaled(2.0 * u, &one_minus(&beta)));
    let c = b.constraint_name(n, 3);
    b.add_constraint(c, y, Relation::Le, -t.clone() + scaled(2.0 * u, &beta));
    Ok(Expr::var(name))
}
