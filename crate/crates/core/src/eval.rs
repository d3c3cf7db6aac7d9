use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use crate::error::{CoreError, Result};
use crate::expr::Expr;

/// Evaluates `expr` exactly at the given point.
pub fn evaluate(
    expr: &Expr,
    assignment: &BTreeMap<String, f64>,
    params: &BTreeMap<String, f64>,
) -> Result<f64> {
    let ev = |e: &Expr| evaluate(e, assignment, params);
    Ok(match expr {
        Expr::Const(c) => *c,
        Expr::Var(v) => *assignment.get(v).ok_or_else(|| CoreError::UnboundSymbol(v.clone()))?,
        Expr::Param(p) => *params.get(p).ok_or_else(|| CoreError::UnboundSymbol(p.clone()))?,
        Expr::Sum(xs) => {
            let mut s = 0.0;
            for x in xs {
                s += ev(x)?;
            }
            s
        }
        Expr::Prod(xs) => {
            let mut p = 1.0;
            for x in xs {
                p *= ev(x)?;
            }
            p
        }
        Expr::Neg(a) => -ev(a)?,
        Expr::Abs(a) => ev(a)?.abs(),
        Expr::Min(xs) | Expr::Max(xs) => {
            let is_min = matches!(expr, Expr::Min(_));
            let mut it = xs.iter();
            let first = it
                .next()
                .ok_or_else(|| CoreError::DomainError("min/max of no arguments".into()))?;
            let mut acc = ev(first)?;
            for x in it {
                let v = ev(x)?;
                acc = if is_min { acc.min(v) } else { acc.max(v) };
            }
            acc
        }
        Expr::Quot(n, d) => {
            let den = ev(d)?;
            if den == 0.0 {
                return Err(CoreError::DomainError("division by zero".into()));
            }
            ev(n)? / den
        }
        Expr::Mono(f, a) => {
            let x = ev(a)?;
            f.apply(x).ok_or_else(|| CoreError::DomainError(format!("{f} of {x}")))?
        }
    })
}
