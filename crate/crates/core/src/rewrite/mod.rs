//! Reformulation operators and the fixpoint driver.
//!
//! Each operator consumes every instance of one pattern kind and produces an
//! equivalent model in which that kind no longer occurs. The driver repeatedly
//! picks an applicable kind, applies its operator, and stops once the model is
//! linear. Auxiliary variables are named `_aux_<kind>_<n>` and the constraints
//! introduced for them `_lin_<kind>_<n>_<i>`.

mod abs;
mod bilinear;
mod fractional;
mod minmax;
mod monotone;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use abs::rewrite_abs;
pub use bilinear::rewrite_bilinear;
pub use fractional::rewrite_fractional;
pub use minmax::rewrite_minmax;
pub use monotone::rewrite_monotone;

use crate::analysis::Interval;
use crate::detect::{detect_patterns, Location, PatternInstance, PatternKind, Side};
use crate::error::{CoreError, Result};
use crate::expr::{Expr, MonoFn};
use crate::model::{Constraint, Model, Relation, VarDecl};
use crate::normalize::{from_terms, make_term, split_term, terms};

/// Safety cap on fixpoint iterations; reaching it is a bug.
pub const MAX_ITERATIONS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct BigMDerivation {
    pub constraint: String,
    pub m_value: f64,
    pub source_interval: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
        }
    }
}

/// Map from the rewritten objective value back to the original one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostSolve {
    pub func: MonoFn,
    pub direction: Direction,
}

impl PostSolve {
    pub fn apply(&self, value: f64) -> Option<f64> {
        self.func.apply(value)
    }
}

/// Charnes–Cooper recovery: every listed variable must be divided by `scale_var`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRecovery {
    pub scale_var: String,
    pub scaled_vars: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Iteration {
    /// One-based iteration number.
    pub t: usize,
    pub kind: PatternKind,
    pub instances_replaced: usize,
    pub aux_vars: Vec<VarDecl>,
    pub aux_constraints: Vec<String>,
    pub big_m: Vec<BigMDerivation>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RewriteTrace {
    pub iterations: Vec<Iteration>,
    pub post_solve: Option<PostSolve>,
    pub recovery: Option<ScaleRecovery>,
}

/// Result of applying one operator.
#[derive(Debug, Clone)]
pub struct Rewrite {
    pub model: Model,
    pub instances_replaced: usize,
    pub aux_vars: Vec<VarDecl>,
    pub aux_constraints: Vec<String>,
    pub big_m: Vec<BigMDerivation>,
    pub notes: Vec<String>,
    pub post_solve: Option<PostSolve>,
    pub recovery: Option<ScaleRecovery>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AbsBenignForm {
    /// `y >= t, y >= -t`.
    #[default]
    TwoInequalities,
    /// `t = t+ - t-, y = t+ + t-, t+, t- >= 0`.
    PosNegParts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RewriteOptions {
    pub abs_benign: AbsBenignForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    FixedPriority,
    SeededRandom,
}

/// Kind order used by [`Order::FixedPriority`].
pub const PRIORITY: [PatternKind; 6] = [
    PatternKind::Monotone,
    PatternKind::Bilinear,
    PatternKind::Abs,
    PatternKind::Min,
    PatternKind::Max,
    PatternKind::LinearFractional,
];

/// Applies the operator for `kind` to all of `instances`.
pub fn apply_kind(
    model: &Model,
    kind: PatternKind,
    instances: &[PatternInstance],
    opts: &RewriteOptions,
) -> Result<Rewrite> {
    match kind {
        PatternKind::Bilinear => rewrite_bilinear(model, instances),
        PatternKind::Min | PatternKind::Max => rewrite_minmax(model, instances),
        PatternKind::Abs => rewrite_abs(model, instances, opts),
        PatternKind::LinearFractional => match instances {
            [one] => rewrite_fractional(model, one),
            _ => Err(CoreError::FractionalNotIsolated(format!(
                "{} fractional occurrences",
                instances.len()
            ))),
        },
        PatternKind::Monotone => rewrite_monotone(model, instances),
    }
}

pub fn run_fixpoint(model: &Model, order: Order, seed: u64) -> Result<(Model, RewriteTrace)> {
    run_fixpoint_with(model, order, seed, &RewriteOptions::default())
}

/// Rewrites until no pattern remains, returning the linear model and its trace.
pub fn run_fixpoint_with(
    model: &Model,
    order: Order,
    seed: u64,
    opts: &RewriteOptions,
) -> Result<(Model, RewriteTrace)> {
    model.validate()?;
    let mut current = model.normalized()?;
    let mut trace = RewriteTrace::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut processed: BTreeSet<PatternKind> = BTreeSet::new();
    loop {
        let found = detect_patterns(&current)?;
        let kinds: BTreeSet<PatternKind> = found.iter().map(|i| i.kind).collect();
        if kinds.is_empty() {
            break;
        }
        if let Some(k) = kinds.intersection(&processed).next() {
            return Err(CoreError::Invariant(format!("kind {k} reappeared after rewriting")));
        }
        let t = trace.iterations.len();
        if t >= MAX_ITERATIONS {
            return Err(CoreError::NonTermination(t));
        }
        let kind = choose(&kinds, order, &mut rng);
        let chosen: Vec<PatternInstance> = found.into_iter().filter(|i| i.kind == kind).collect();
        let step = apply_kind(&current, kind, &chosen, opts)?;
        let remaining = detect_patterns(&step.model)?.iter().filter(|i| i.kind == kind).count();
        if remaining != 0 {
            return Err(CoreError::Invariant(format!(
                "{remaining} {kind} instances survived their rewrite"
            )));
        }
        if step.instances_replaced == 0 {
            return Err(CoreError::Invariant(format!("{kind} rewrite made no progress")));
        }
        if step.post_solve.is_some() {
            if trace.post_solve.is_some() {
                return Err(CoreError::Invariant("second objective post-solve map".into()));
            }
            trace.post_solve = step.post_solve;
        }
        if step.recovery.is_some() {
            trace.recovery = step.recovery.clone();
        }
        trace.iterations.push(Iteration {
            t: t + 1,
            kind,
            instances_replaced: step.instances_replaced,
            aux_vars: step.aux_vars,
            aux_constraints: step.aux_constraints,
            big_m: step.big_m,
            notes: step.notes,
        });
        processed.insert(kind);
        current = step.model;
    }
    Ok((current, trace))
}

fn choose(kinds: &BTreeSet<PatternKind>, order: Order, rng: &mut ChaCha8Rng) -> PatternKind {
    match order {
        Order::FixedPriority => {
            *PRIORITY.iter().find(|k| kinds.contains(k)).expect("non-empty kind set")
        }
        Order::SeededRandom => {
            let pool: Vec<PatternKind> = kinds
                .iter()
                .copied()
                .filter(|k| *k != PatternKind::LinearFractional)
                .collect();
            if pool.is_empty() {
                PatternKind::LinearFractional
            } else {
                *pool.choose(rng).expect("non-empty pool")
            }
        }
    }
}

/// Shared machinery for term-replacing operators.
pub(crate) struct Builder {
    pub model: Model,
    kind: PatternKind,
    next: usize,
    replacements: BTreeMap<(Location, usize), Expr>,
    splits: BTreeMap<String, (Location, usize, Vec<Expr>, usize)>,
    shared: BTreeMap<(u8, Vec<Expr>), Expr>,
    pub out: Rewrite,
}

impl Builder {
    pub fn new(model: &Model, kind: PatternKind) -> Result<Self> {
        let model = model.normalized()?;
        Ok(Builder {
            out: Rewrite {
                model: model.clone(),
                instances_replaced: 0,
                aux_vars: Vec::new(),
                aux_constraints: Vec::new(),
                big_m: Vec::new(),
                notes: Vec::new(),
                post_solve: None,
                recovery: None,
            },
            model,
            kind,
            next: 0,
            replacements: BTreeMap::new(),
            splits: BTreeMap::new(),
            shared: BTreeMap::new(),
        })
    }

    /// Reserves a fresh instance number `n` with an unused `_aux_<kind>_<n>` name.
    pub fn fresh(&mut self) -> (usize, String) {
        loop {
            let n = self.next;
            self.next += 1;
            let name = format!("_aux_{}_{}", self.kind.name(), n);
            let cname = format!("_lin_{}_{}_0", self.kind.name(), n);
            if self.model.var(&name).is_none()
                && !self.model.constraints.iter().any(|c| c.name == cname)
            {
                return (n, name);
            }
        }
    }

    pub fn add_var(&mut self, v: VarDecl) -> Expr {
        let e = Expr::Var(v.name.clone());
        self.out.aux_vars.push(v.clone());
        self.model.vars.push(v);
        e
    }

    pub fn constraint_name(&self, n: usize, i: usize) -> String {
        format!("_lin_{}_{}_{}", self.kind.name(), n, i)
    }

    pub fn add_constraint(&mut self, name: String, lhs: Expr, rel: Relation, rhs: Expr) {
        self.out.aux_constraints.push(name.clone());
        self.model.constraints.push(Constraint::new(name, lhs, rel, rhs));
    }

    pub fn big_m(&mut self, constraint: &str, m_value: f64, source_interval: Interval) {
        self.out.big_m.push(BigMDerivation {
            constraint: constraint.into(),
            m_value,
            source_interval,
        });
    }

    /// Looks up an auxiliary created earlier for the same encoding and arguments.
    pub fn shared(&self, tag: u8, args: &[Expr]) -> Option<Expr> {
        self.shared.get(&(tag, args.to_vec())).cloned()
    }

    pub fn remember(&mut self, tag: u8, args: &[Expr], aux: Expr) {
        self.shared.insert((tag, args.to_vec()), aux);
    }

    /// Replaces the pattern factors of the instance's monomial by `with`.
    pub fn replace(&mut self, inst: &PatternInstance, with: Expr) {
        self.out.instances_replaced += 1;
        self.replacements.insert((inst.path.location.clone(), inst.path.term), with);
    }

    /// Replaces the constraint holding `inst` by one copy per branch expression.
    pub fn split(&mut self, inst: &PatternInstance, branches: Vec<Expr>) -> Result<()> {
        let Location::Constraint { name, .. } = &inst.path.location else {
            return Err(CoreError::Invariant("split outside a constraint".into()));
        };
        let (n, _) = self.fresh();
        self.out.instances_replaced += 1;
        self.splits
            .insert(name.clone(), (inst.path.location.clone(), inst.path.term, branches, n));
        Ok(())
    }

    fn rewrite_expr(&self, location: &Location, e: &Expr, extra: Option<(usize, &Expr)>) -> Expr {
        let ts: Vec<Expr> = terms(e)
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let key = (location.clone(), i);
                let with = match extra {
                    Some((j, w)) if j == i => Some(w),
                    _ => self.replacements.get(&key),
                };
                match with {
                    Some(w) => {
                        let (coef, _) = split_term(t);
                        make_term(coef, alloc::vec![w.clone()])
                    }
                    None => t.clone(),
                }
            })
            .collect();
        from_terms(ts)
    }

    /// Applies all recorded replacements and returns the normalized result.
    pub fn finish(mut self) -> Result<Rewrite> {
        let params = self.model.param_map();
        let norm = |e: &Expr| crate::normalize::normalize(e, &params);
        let objective = self.rewrite_expr(&Location::Objective, &self.model.objective, None);
        let mut constraints = Vec::with_capacity(self.model.constraints.len());
        for c in &self.model.constraints {
            let lhs_loc = Location::Constraint { name: c.name.clone(), side: Side::Lhs };
            let rhs_loc = Location::Constraint { name: c.name.clone(), side: Side::Rhs };
            if let Some((loc, term, branches, n)) = self.splits.get(&c.name) {
                for (k, b) in branches.iter().enumerate() {
                    let extra = Some((*term, b));
                    let (le, re) = if *loc == lhs_loc { (extra, None) } else { (None, extra) };
                    let name = format!("_lin_{}_{}_{}", self.kind.name(), n, k);
                    self.out.aux_constraints.push(name.clone());
                    constraints.push(Constraint::new(
                        name,
                        norm(&self.rewrite_expr(&lhs_loc, &c.lhs, le))?,
                        c.rel,
                        norm(&self.rewrite_expr(&rhs_loc, &c.rhs, re))?,
                    ));
                }
                self.out.notes.push(format!("split constraint `{}` into {}", c.name, branches.len()));
                continue;
            }
            constraints.push(Constraint::new(
                c.name.clone(),
                norm(&self.rewrite_expr(&lhs_loc, &c.lhs, None))?,
                c.rel,
                norm(&self.rewrite_expr(&rhs_loc, &c.rhs, None))?,
            ));
        }
        self.model.objective = norm(&objective)?;
        self.model.constraints = constraints;
        self.out.model = self.model;
        Ok(self.out)
    }
}

/// Constant `1 - e`, a frequent building block.
pub(crate) fn one_minus(e: &Expr) -> Expr {
    Expr::Const(1.0) - e.clone()
}

pub(crate) fn scaled(c: f64, e: &Expr) -> Expr {
    Expr::Const(c) * e.clone()
}
