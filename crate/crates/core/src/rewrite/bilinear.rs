use alloc::format;
use alloc::vec::Vec;

use super::{one_minus, scaled, Builder, Rewrite};
use crate::analysis::Interval;
use crate::detect::{PatternInstance, PatternKind};
use crate::error::{CoreError, Result};
use crate::expr::Expr;
use crate::model::{Model, Relation, VarDecl};

const TAG_AND: u8 = 0;
const TAG_MCCORMICK: u8 = 1;

/// Replaces products `b1*b2` and `b*x` (x bounded) by exact auxiliaries.
pub fn rewrite_bilinear(model: &Model, instances: &[PatternInstance]) -> Result<Rewrite> {
    let mut b = Builder::new(model, PatternKind::Bilinear)?;
    for inst in instances {
        if inst.kind != PatternKind::Bilinear {
            return Err(CoreError::Invariant(format!("{} passed to bilinear", inst.kind)));
        }
        let (bin, other) = match inst.args.as_slice() {
            [Expr::Var(a), Expr::Var(o)] => (a.clone(), o.clone()),
            _ => return Err(CoreError::Invariant(format!("bad bilinear args at {}", inst.path))),
        };
        let aux = if b.model.is_binary(&other) {
            let key = {
                let mut k = inst.args.clone();
                k.sort();
                k
            };
            match b.shared(TAG_AND, &key) {
                Some(aux) => aux,
                None => {
                    let aux = product_of_binaries(&mut b, &bin, &other);
                    b.remember(TAG_AND, &key, aux.clone());
                    aux
                }
            }
        } else {
            match b.shared(TAG_MCCORMICK, &inst.args) {
                Some(aux) => aux,
                None => {
                    let aux = binary_times_bounded(&mut b, &bin, &other)?;
                    b.remember(TAG_MCCORMICK, &inst.args, aux.clone());
                    aux
                }
            }
        };
        b.replace(inst, aux);
    }
    b.finish()
}

fn product_of_binaries(b: &mut Builder, b1: &str, b2: &str) -> Expr {
    let (n, name) = b.fresh();
    let w = b.add_var(VarDecl::continuous(name, 0.0, 1.0));
    let (v1, v2) = (Expr::var(b1), Expr::var(b2));
    let c0 = b.constraint_name(n, 0);
    b.add_constraint(c0, w.clone(), Relation::Le, v1.clone());
    let c1 = b.constraint_name(n, 1);
    b.add_constraint(c1, w.clone(), Relation::Le, v2.clone());
    let c2 = b.constraint_name(n, 2);
    b.add_constraint(c2, w.clone(), Relation::Ge, v1 + v2 - Expr::Const(1.0));
    w
}

fn binary_times_bounded(b: &mut Builder, bin: &str, x: &str) -> Result<Expr> {
    let decl = b.model.var(x).ok_or_else(|| CoreError::UnboundSymbol(x.into()))?;
    let bounds = Interval::new(decl.lower, decl.upper).require_finite(x)?;
    let (lo, hi) = (bounds.lo, bounds.hi);
    let (n, name) = b.fresh();
    let z = b.add_var(VarDecl::continuous(name, lo.min(0.0), hi.max(0.0)));
    let (bv, xv) = (Expr::var(bin), Expr::var(x));
    let cons: Vec<(Relation, Expr)> = alloc::vec![
        (Relation::Le, scaled(hi, &bv)),
        (Relation::Ge, scaled(lo, &bv)),
        (Relation::Le, xv.clone() - scaled(lo, &one_minus(&bv))),
        (Relation::Ge, xv - scaled(hi, &one_minus(&bv))),
    ];
    for (i, (rel, rhs)) in cons.into_iter().enumerate() {
        let cname = b.constraint_name(n, i);
        if i == 0 {
            b.big_m(&cname, bounds.magnitude(), bounds);
        }
        b.add_constraint(cname, z.clone(), rel, rhs);
    }
    Ok(z)
}
