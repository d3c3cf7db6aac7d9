//! Structural detection of the six exactly-linearizable patterns.
//!
//! Every monomial of every normalized expression in the model is inspected.
//! A monomial is either linear, one of the supported patterns, or an
//! out-of-scope structure reported as [`CoreError::UnsupportedNonlinearity`].
//!
//! Each `abs`/`min`/`max` occurrence also gets a [`Polarity`], derived from the
//! direction in which the surrounding objective or constraint pushes its value:
//!
//! | pattern | pushed down            | pushed up              | both (equality) |
//! |---------|------------------------|------------------------|-----------------|
//! | max/abs | split or epigraph      | disjunctive (binaries) | disjunctive     |
//! | min     | disjunctive (binaries) | split or hypograph     | disjunctive     |
//!
//! "Split" applies when the occurrence is the only nonlinear monomial of a
//! constraint, so the constraint can be replaced by one copy per branch.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::analysis::{form_interval, LinearForm};
use crate::error::{CoreError, Result};
use crate::expr::{Expr, MonoFn};
use crate::model::{Model, Relation, Sense};
use crate::normalize::{split_term, terms};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternKind {
    Bilinear,
    Min,
    Max,
    Abs,
    LinearFractional,
    Monotone,
}

impl PatternKind {
    pub const ALL: [PatternKind; 6] = [
        PatternKind::Bilinear,
        PatternKind::Min,
        PatternKind::Max,
        PatternKind::Abs,
        PatternKind::LinearFractional,
        PatternKind::Monotone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternKind::Bilinear => "bilinear",
            PatternKind::Min => "min",
            PatternKind::Max => "max",
            PatternKind::Abs => "abs",
            PatternKind::LinearFractional => "fractional",
            PatternKind::Monotone => "monotone",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "bilinear" => PatternKind::Bilinear,
            "min" => PatternKind::Min,
            "max" => PatternKind::Max,
            "abs" | "absolute" => PatternKind::Abs,
            "fractional" | "linear_fractional" | "linearfractional" => {
                PatternKind::LinearFractional
            }
            "monotone" => PatternKind::Monotone,
            _ => return None,
        })
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Benign,
    Adverse,
    ConstraintSplit,
}

impl Polarity {
    pub fn name(self) -> &'static str {
        match self {
            Polarity::Benign => "benign",
            Polarity::Adverse => "adverse",
            Polarity::ConstraintSplit => "constraint_split",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Lhs,
    Rhs,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Objective,
    Constraint { name: String, side: Side },
}

impl Location {
    pub fn expr<'m>(&self, model: &'m Model) -> Option<&'m Expr> {
        match self {
            Location::Objective => Some(&model.objective),
            Location::Constraint { name, side } => {
                let c = model.constraints.iter().find(|c| &c.name == name)?;
                Some(match side {
                    Side::Lhs => &c.lhs,
                    Side::Rhs => &c.rhs,
                })
            }
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Objective => f.write_str("objective"),
            Location::Constraint { name, side: Side::Lhs } => write!(f, "{name}.lhs"),
            Location::Constraint { name, side: Side::Rhs } => write!(f, "{name}.rhs"),
        }
    }
}

/// Location of a monomial inside a normalized model.
///
/// `term` is zero-based; the printed form counts from one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub location: Location,
    pub term: usize,
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.term[{}]", self.location, self.term + 1)
    }
}

/// One detected occurrence.
///
/// `args` holds the affine arguments: the two factors of a product (binary
/// first), the branches of `min`/`max`, the argument of `abs` or of the
/// monotone function, or numerator and denominator of a quotient. `coef` is
/// the coefficient of the monomial carrying the occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternInstance {
    pub kind: PatternKind,
    pub path: Path,
    pub args: Vec<Expr>,
    pub polarity: Polarity,
    pub coef: f64,
    pub func: Option<MonoFn>,
}

/// Direction in which the enclosing context pushes an occurrence's value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pressure {
    Down,
    Up,
    Both,
}

pub(crate) fn pressure(location: &Location, coef: f64, model: &Model) -> Pressure {
    // Normalize everything to "expr <= 0" / "minimize expr".
    let signed = match location {
        Location::Objective => match model.sense {
            Sense::Minimize => coef,
            Sense::Maximize => -coef,
        },
        Location::Constraint { name, side } => {
            let rel = model
                .constraints
                .iter()
                .find(|c| &c.name == name)
                .map_or(Relation::Eq, |c| c.rel);
            let c = match side {
                Side::Lhs => coef,
                Side::Rhs => -coef,
            };
            match rel {
                Relation::Le => c,
                Relation::Ge => -c,
                Relation::Eq => return Pressure::Both,
            }
        }
    };
    if signed > 0.0 {
        Pressure::Down
    } else {
        Pressure::Up
    }
}

fn is_nonlinear_term(t: &Expr) -> bool {
    let (_, factors) = split_term(t);
    factors.len() >= 2 || factors.iter().any(|f| f.is_pattern_atom())
}

fn alone_in_constraint(location: &Location, model: &Model) -> bool {
    let Location::Constraint { name, .. } = location else {
        return false;
    };
    let Some(c) = model.constraints.iter().find(|c| &c.name == name) else {
        return false;
    };
    let count = terms(&c.lhs)
        .into_iter()
        .chain(terms(&c.rhs))
        .filter(|t| is_nonlinear_term(t))
        .count();
    count == 1
}

/// Polarity of an instance per the occurrence-direction table.
pub fn polarity_of(instance: &PatternInstance, model: &Model) -> Polarity {
    let p = pressure(&instance.path.location, instance.coef, model);
    let alone = alone_in_constraint(&instance.path.location, model);
    let favourable = match instance.kind {
        PatternKind::Max | PatternKind::Abs => Pressure::Down,
        PatternKind::Min => Pressure::Up,
        _ => return Polarity::Benign,
    };
    if p == favourable {
        if alone {
            Polarity::ConstraintSplit
        } else {
            Polarity::Benign
        }
    } else {
        Polarity::Adverse
    }
}

fn unsupported(path: &Path, reason: impl Into<String>) -> CoreError {
    CoreError::UnsupportedNonlinearity { path: path.to_string(), reason: reason.into() }
}

fn affine_arg(e: &Expr, path: &Path, what: &str) -> Result<LinearForm> {
    LinearForm::from_expr(e).ok_or_else(|| unsupported(path, format!("nested or non-affine {what}")))
}

fn locations(model: &Model) -> Vec<Location> {
    let mut out = vec![Location::Objective];
    for c in &model.constraints {
        out.push(Location::Constraint { name: c.name.clone(), side: Side::Lhs });
        out.push(Location::Constraint { name: c.name.clone(), side: Side::Rhs });
    }
    out
}

fn other_side_constant(location: &Location, model: &Model) -> bool {
    match location {
        Location::Objective => true,
        Location::Constraint { name, side } => {
            let Some(c) = model.constraints.iter().find(|c| &c.name == name) else {
                return false;
            };
            let other = match side {
                Side::Lhs => &c.rhs,
                Side::Rhs => &c.lhs,
            };
            other.as_const().is_some()
        }
    }
}

fn classify_term(
    model: &Model,
    location: &Location,
    whole: &Expr,
    index: usize,
    term: &Expr,
) -> Result<Option<PatternInstance>> {
    let path = Path { location: location.clone(), term: index };
    let (coef, factors) = split_term(term);
    let mk = |kind, args: Vec<Expr>, func| PatternInstance {
        kind,
        path: path.clone(),
        args,
        polarity: Polarity::Benign,
        coef,
        func,
    };
    let instance = match factors.as_slice() {
        [] | [Expr::Var(_)] => return Ok(None),
        [Expr::Var(a), Expr::Var(b)] => {
            let (bin, other) = if model.is_binary(a) {
                (a, b)
            } else if model.is_binary(b) {
                (b, a)
            } else {
                return Err(unsupported(&path, "product of two non-binary variables"));
            };
            if !model.is_binary(other) {
                let v = model.var(other).ok_or_else(|| CoreError::UnboundSymbol(other.clone()))?;
                if !(v.lower.is_finite() && v.upper.is_finite()) {
                    return Err(unsupported(&path, format!("factor `{other}` is unbounded")));
                }
            }
            mk(PatternKind::Bilinear, vec![Expr::Var(bin.clone()), Expr::Var(other.clone())], None)
        }
        [_, _] => return Err(unsupported(&path, "product involving a nested pattern")),
        [f] => match f {
            Expr::Abs(t) => {
                affine_arg(t, &path, "abs argument")?;
                mk(PatternKind::Abs, vec![(**t).clone()], None)
            }
            Expr::Min(args) | Expr::Max(args) => {
                for a in args {
                    affine_arg(a, &path, "min/max argument")?;
                }
                let kind =
                    if matches!(f, Expr::Min(_)) { PatternKind::Min } else { PatternKind::Max };
                mk(kind, args.clone(), None)
            }
            Expr::Quot(n, d) => {
                if *location != Location::Objective {
                    return Err(unsupported(&path, "quotient outside the objective"));
                }
                let others_constant =
                    terms(whole).iter().enumerate().all(|(i, t)| i == index || t.as_const().is_some());
                if !others_constant {
                    return Err(unsupported(&path, "quotient is not the whole objective"));
                }
                affine_arg(n, &path, "numerator")?;
                let den = affine_arg(d, &path, "denominator")?;
                let iv = form_interval(&den, model);
                if !(iv.lo > 0.0) {
                    return Err(unsupported(
                        &path,
                        format!("denominator not provably positive (range {iv})"),
                    ));
                }
                mk(PatternKind::LinearFractional, vec![(**n).clone(), (**d).clone()], None)
            }
            Expr::Mono(func, g) => {
                let form = affine_arg(g, &path, "monotone argument")?;
                if coef != 1.0 || terms(whole).len() != 1 || !other_side_constant(location, model) {
                    return Err(unsupported(
                        &path,
                        "monotone function must be a whole objective or constraint side",
                    ));
                }
                let iv = form_interval(&form, model);
                if !func.domain_ok(iv.lo) {
                    return Err(unsupported(
                        &path,
                        format!("{func} argument range {iv} leaves the domain"),
                    ));
                }
                mk(PatternKind::Monotone, vec![(**g).clone()], Some(*func))
            }
            _ => return Err(unsupported(&path, "unrecognised factor")),
        },
        _ => return Err(unsupported(&path, "product of three or more variable factors")),
    };
    let polarity = polarity_of(&instance, model);
    Ok(Some(PatternInstance { polarity, ..instance }))
}

/// All pattern occurrences of a model, in objective-then-constraint order.
pub fn detect_patterns(model: &Model) -> Result<Vec<PatternInstance>> {
    let model = &model.normalized()?;
    let mut out = Vec::new();
    for location in locations(model) {
        let whole = location.expr(model).expect("location from model");
        for (i, t) in terms(whole).into_iter().enumerate() {
            if let Some(inst) = classify_term(model, &location, whole, i, t)? {
                out.push(inst);
            }
        }
    }
    Ok(out)
}

/// The set of pattern kinds with at least one occurrence.
pub fn applicable_kinds(model: &Model) -> Result<BTreeSet<PatternKind>> {
    Ok(detect_patterns(model)?.into_iter().map(|i| i.kind).collect())
}
