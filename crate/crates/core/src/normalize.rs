//! Canonical polynomial normal form.
//!
//! A normalized expression is a sum of monomials `c * f1 * f2 * ...` where every
//! factor is a variable or a pattern atom (`abs`, `min`, `max`, quotient,
//! monotone function) whose arguments are themselves normalized. Products are
//! distributed over sums, like monomials are merged, parameters are replaced by
//! their values and constants are folded. The constant monomial is printed last.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::expr::Expr;

/// Upper bound on the number of monomials produced while distributing.
pub const MAX_TERMS: usize = 4096;

type Poly = BTreeMap<Vec<Expr>, f64>;

/// Normalizes `expr`, substituting parameters from `params`.
pub fn normalize(expr: &Expr, params: &BTreeMap<String, f64>) -> Result<Expr> {
    Ok(poly_to_expr(to_poly(expr, params)?))
}

fn constant(c: f64) -> Poly {
    let mut p = Poly::new();
    if c != 0.0 {
        p.insert(Vec::new(), c);
    }
    p
}

fn atom(e: Expr) -> Poly {
    let mut p = Poly::new();
    p.insert(vec![e], 1.0);
    p
}

fn add_into(acc: &mut Poly, other: Poly, scale: f64) {
    for (m, c) in other {
        let slot = acc.entry(m).or_insert(0.0);
        *slot += c * scale;
    }
    acc.retain(|_, c| *c != 0.0);
}

fn mul(a: &Poly, b: &Poly) -> Result<Poly> {
    if a.len().saturating_mul(b.len()) > MAX_TERMS * 4 {
        return Err(CoreError::ExpressionTooLarge(a.len() * b.len()));
    }
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let mut m = ma.clone();
            m.extend(mb.iter().cloned());
            m.sort();
            *out.entry(m).or_insert(0.0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0.0);
    if out.len() > MAX_TERMS {
        return Err(CoreError::ExpressionTooLarge(out.len()));
    }
    Ok(out)
}

fn to_poly(expr: &Expr, params: &BTreeMap<String, f64>) -> Result<Poly> {
    let norm = |e: &Expr| -> Result<Expr> { Ok(poly_to_expr(to_poly(e, params)?)) };
    Ok(match expr {
        Expr::Const(c) => constant(*c),
        Expr::Param(p) => {
            constant(*params.get(p).ok_or_else(|| CoreError::UnboundSymbol(p.clone()))?)
        }
        Expr::Var(v) => atom(Expr::Var(v.clone())),
        Expr::Sum(xs) => {
            let mut acc = Poly::new();
            for x in xs {
                add_into(&mut acc, to_poly(x, params)?, 1.0);
            }
            acc
        }
        Expr::Prod(xs) => {
            let mut acc = constant(1.0);
            for x in xs {
                acc = mul(&acc, &to_poly(x, params)?)?;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        Expr::Neg(a) => {
            let mut acc = Poly::new();
            add_into(&mut acc, to_poly(a, params)?, -1.0);
            acc
        }
        Expr::Abs(a) => {
            let inner = norm(a)?;
            match inner.as_const() {
                Some(c) => constant(c.abs()),
                None => atom(Expr::Abs(Box::new(inner))),
            }
        }
        Expr::Min(xs) | Expr::Max(xs) => {
            let is_min = matches!(expr, Expr::Min(_));
            let mut folded: Option<f64> = None;
            let mut args = Vec::new();
            for x in xs {
                let n = norm(x)?;
                match n.as_const() {
                    Some(c) => {
                        folded = Some(match folded {
                            None => c,
                            Some(f) if is_min => f.min(c),
                            Some(f) => f.max(c),
                        })
                    }
                    None => args.push(n),
                }
            }
            if let Some(c) = folded {
                args.push(Expr::Const(c));
            }
            args.sort();
            args.dedup();
            match args.len() {
                0 => constant(0.0),
                1 => to_poly(&args[0], params)?,
                _ if is_min => atom(Expr::Min(args)),
                _ => atom(Expr::Max(args)),
            }
        }
        Expr::Quot(n, d) => {
            let num = to_poly(n, params)?;
            let den = norm(d)?;
            match den.as_const() {
                Some(c) if c != 0.0 => {
                    let mut acc = Poly::new();
                    add_into(&mut acc, num, 1.0 / c);
                    acc
                }
                _ if num.is_empty() && den.as_const().is_none() => Poly::new(),
                _ => atom(Expr::quot(poly_to_expr(num), den)),
            }
        }
        Expr::Mono(f, a) => {
            let inner = norm(a)?;
            match inner.as_const().and_then(|c| f.apply(c)) {
                Some(v) => constant(v),
                None => atom(Expr::mono(*f, inner)),
            }
        }
    })
}

fn poly_to_expr(p: Poly) -> Expr {
    let mut terms: Vec<Expr> = Vec::with_capacity(p.len());
    let mut offset = None;
    for (m, c) in p {
        // `+ 0.0` turns a negative zero into a positive one.
        let c = c + 0.0;
        if m.is_empty() {
            offset = Some(c);
        } else {
            terms.push(make_term(c, m));
        }
    }
    if let Some(c) = offset {
        terms.push(Expr::Const(c));
    }
    match terms.len() {
        0 => Expr::Const(0.0),
        1 => terms.pop().unwrap(),
        _ => Expr::Sum(terms),
    }
}

/// Builds the canonical monomial `coef * factors`.
pub fn make_term(coef: f64, mut factors: Vec<Expr>) -> Expr {
    if factors.is_empty() {
        return Expr::Const(coef);
    }
    if coef == 1.0 && factors.len() == 1 {
        return factors.pop().unwrap();
    }
    if coef != 1.0 {
        factors.insert(0, Expr::Const(coef));
    }
    Expr::Prod(factors)
}

/// Monomials of a normalized expression.
pub fn terms(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Sum(xs) => xs.iter().collect(),
        Expr::Const(c) if *c == 0.0 => Vec::new(),
        _ => vec![e],
    }
}

/// Splits a normalized monomial into its coefficient and non-constant factors.
pub fn split_term(t: &Expr) -> (f64, Vec<&Expr>) {
    match t {
        Expr::Const(c) => (*c, Vec::new()),
        Expr::Prod(xs) => {
            let mut coef = 1.0;
            let mut factors = Vec::new();
            for x in xs {
                match x {
                    Expr::Const(c) => coef *= c,
                    _ => factors.push(x),
                }
            }
            (coef, factors)
        }
        _ => (1.0, vec![t]),
    }
}

/// Rebuilds a sum from monomials (not re-normalized).
pub fn from_terms(mut ts: Vec<Expr>) -> Expr {
    match ts.len() {
        0 => Expr::Const(0.0),
        1 => ts.pop().unwrap(),
        _ => Expr::Sum(ts),
    }
}
