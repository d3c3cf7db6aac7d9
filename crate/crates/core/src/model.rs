use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{CoreError, Result};
use crate::expr::Expr;
use crate::normalize::normalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Domain {
    Continuous,
    Binary,
    Integer,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Continuous => "continuous",
            Domain::Binary => "binary",
            Domain::Integer => "integer",
        }
    }

    pub fn is_integral(self) -> bool {
        !matches!(self, Domain::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub domain: Domain,
    pub lower: f64,
    pub upper: f64,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, domain: Domain, lower: f64, upper: f64) -> Self {
        VarDecl { name: name.into(), domain, lower, upper }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self::new(name, Domain::Binary, 0.0, 1.0)
    }

    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self::new(name, Domain::Continuous, lower, upper)
    }

    pub fn integer(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self::new(name, Domain::Integer, lower, upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamBinding {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    pub fn name(self) -> &'static str {
        match self {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        }
    }

    pub fn flipped(self) -> Sense {
        match self {
            Sense::Minimize => Sense::Maximize,
            Sense::Maximize => Sense::Minimize,
        }
    }

    /// True when `a` is strictly better than `b` beyond `tol`.
    pub fn better(self, a: f64, b: f64, tol: f64) -> bool {
        match self {
            Sense::Minimize => a < b - tol,
            Sense::Maximize => a > b + tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }

    pub fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }

    /// Amount by which `lhs rel rhs` is violated (0 when satisfied).
    pub fn violation(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::Le => (lhs - rhs).max(0.0),
            Relation::Ge => (rhs - lhs).max(0.0),
            Relation::Eq => (lhs - rhs).abs(),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub lhs: Expr,
    pub rel: Relation,
    pub rhs: Expr,
}

impl Constraint {
    pub fn new(name: impl Into<String>, lhs: Expr, rel: Relation, rhs: Expr) -> Self {
        Constraint { name: name.into(), lhs, rel, rhs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub vars: Vec<VarDecl>,
    pub params: Vec<ParamBinding>,
    pub sense: Sense,
    pub objective: Expr,
    pub constraints: Vec<Constraint>,
}

impl Model {
    pub fn new(sense: Sense, objective: Expr) -> Self {
        Model { vars: Vec::new(), params: Vec::new(), sense, objective, constraints: Vec::new() }
    }

    pub fn with_var(mut self, v: VarDecl) -> Self {
        self.vars.push(v);
        self
    }

    pub fn with_param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.params.push(ParamBinding { name: name.into(), value });
        self
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn is_binary(&self, name: &str) -> bool {
        self.var(name).is_some_and(|v| v.domain == Domain::Binary)
    }

    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(|v| v.domain.is_integral())
    }

    pub fn param_map(&self) -> BTreeMap<String, f64> {
        self.params.iter().map(|p| (p.name.clone(), p.value)).collect()
    }

    /// Checks every structural invariant of a model.
    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for v in &self.vars {
            if !names.insert(v.name.as_str()) {
                return Err(CoreError::InvalidModel(format!("duplicate variable `{}`", v.name)));
            }
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(CoreError::InvalidModel(format!("bad bounds on `{}`", v.name)));
            }
            if v.domain == Domain::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(CoreError::InvalidModel(format!(
                    "binary `{}` has bounds outside [0,1]",
                    v.name
                )));
            }
        }
        let mut pnames = BTreeSet::new();
        for p in &self.params {
            if !p.value.is_finite() {
                return Err(CoreError::InvalidModel(format!("parameter `{}` not finite", p.name)));
            }
            if names.contains(p.name.as_str()) || !pnames.insert(p.name.as_str()) {
                return Err(CoreError::InvalidModel(format!("duplicate name `{}`", p.name)));
            }
        }
        let mut cnames = BTreeSet::new();
        for c in &self.constraints {
            if !cnames.insert(c.name.as_str()) {
                return Err(CoreError::InvalidModel(format!("duplicate constraint `{}`", c.name)));
            }
        }
        let mut err = None;
        let mut check = |e: &Expr| match e {
            Expr::Var(v) if !names.contains(v.as_str()) => {
                err.get_or_insert(CoreError::UnboundSymbol(v.clone()));
            }
            Expr::Param(p) if !pnames.contains(p.as_str()) => {
                err.get_or_insert(CoreError::UnboundSymbol(p.clone()));
            }
            _ => {}
        };
        for e in self.expressions() {
            e.visit(&mut check);
        }
        err.map_or(Ok(()), Err)
    }

    pub fn expressions(&self) -> impl Iterator<Item = &Expr> {
        core::iter::once(&self.objective)
            .chain(self.constraints.iter().flat_map(|c| [&c.lhs, &c.rhs]))
    }

    /// Returns a copy with every expression normalized and parameters folded in.
    pub fn normalized(&self) -> Result<Model> {
        let params = self.param_map();
        let mut m = self.clone();
        m.objective = normalize(&self.objective, &params)?;
        for c in &mut m.constraints {
            c.lhs = normalize(&c.lhs, &params)?;
            c.rhs = normalize(&c.rhs, &params)?;
        }
        Ok(m)
    }

    /// Returns a name not yet used by any variable, parameter or constraint.
    pub fn fresh_name(&self, base: &str) -> String {
        let taken = |n: &str| {
            self.vars.iter().any(|v| v.name == n)
                || self.params.iter().any(|p| p.name == n)
                || self.constraints.iter().any(|c| c.name == n)
        };
        if !taken(base) {
            return base.into();
        }
        let mut k = 1;
        loop {
            let cand = format!("{base}_{k}");
            if !taken(&cand) {
                return cand;
            }
            k += 1;
        }
    }
}
