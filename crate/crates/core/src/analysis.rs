use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{CoreError, Result};
use crate::expr::Expr;
use crate::model::Model;
use crate::normalize::{make_term, split_term, terms};

/// Affine function `constant + sum(coeffs[v] * v)`; no zero coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearForm {
    pub coeffs: BTreeMap<String, f64>,
    pub constant: f64,
}

impl LinearForm {
    pub fn constant(c: f64) -> Self {
        LinearForm { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(name: &str) -> Self {
        let mut f = Self::default();
        f.coeffs.insert(name.into(), 1.0);
        f
    }

    /// Reads a linear form from a normalized expression.
    pub fn from_expr(e: &Expr) -> Option<LinearForm> {
        let mut out = LinearForm::default();
        for t in terms(e) {
            let (c, factors) = split_term(t);
            match factors.as_slice() {
                [] => out.constant += c,
                [Expr::Var(v)] => *out.coeffs.entry(v.clone()).or_insert(0.0) += c,
                _ => return None,
            }
        }
        out.coeffs.retain(|_, c| *c != 0.0);
        Some(out)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, v: &str) -> f64 {
        self.coeffs.get(v).copied().unwrap_or(0.0)
    }

    pub fn add_scaled(&mut self, other: &LinearForm, s: f64) {
        for (v, c) in &other.coeffs {
            *self.coeffs.entry(v.clone()).or_insert(0.0) += c * s;
        }
        self.constant += other.constant * s;
        self.coeffs.retain(|_, c| *c != 0.0);
    }

    pub fn scaled(&self, s: f64) -> LinearForm {
        let mut out = LinearForm::default();
        out.add_scaled(self, s);
        out
    }

    pub fn minus(&self, other: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    pub fn eval(&self, point: &BTreeMap<String, f64>) -> f64 {
        self.coeffs.iter().map(|(v, c)| c * point.get(v).copied().unwrap_or(0.0)).sum::<f64>()
            + self.constant
    }

    /// Normalized expression for this form.
    pub fn to_expr(&self) -> Expr {
        let mut ts: Vec<Expr> = self
            .coeffs
            .iter()
            .map(|(v, c)| make_term(*c, alloc::vec![Expr::Var(v.clone())]))
            .collect();
        if self.constant != 0.0 || ts.is_empty() {
            ts.push(Expr::Const(self.constant + 0.0));
        }
        crate::normalize::from_terms(ts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AffinityClass {
    ConstantOnly(f64),
    AffineInVars { coeffs: BTreeMap<String, f64>, offset: f64 },
    NonlinearPattern,
    Unsupported,
}

/// Classifies a normalized expression.
pub fn affinity_of(expr: &Expr, _model: &Model) -> AffinityClass {
    let mut nonlinear = false;
    for t in terms(expr) {
        let (_, factors) = split_term(t);
        let var_bearing = factors.iter().filter(|f| f.contains_var()).count();
        if var_bearing >= 3 {
            return AffinityClass::Unsupported;
        }
        if factors.len() >= 2 || factors.iter().any(|f| f.is_pattern_atom()) {
            nonlinear = true;
        }
        if factors.iter().any(|f| matches!(f, Expr::Param(_))) {
            return AffinityClass::Unsupported;
        }
    }
    if nonlinear {
        return AffinityClass::NonlinearPattern;
    }
    match LinearForm::from_expr(expr) {
        Some(f) if f.is_constant() => AffinityClass::ConstantOnly(f.constant),
        Some(f) => AffinityClass::AffineInVars { coeffs: f.coeffs, offset: f.constant },
        None => AffinityClass::Unsupported,
    }
}

/// Closed interval over the extended reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Returns `self` if both ends are finite, else `UnboundedInterval`.
    pub fn require_finite(self, what: &str) -> Result<Interval> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(CoreError::UnboundedInterval(format!("{what} in {self}")))
        }
    }

    /// Largest absolute value attained.
    pub fn magnitude(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Exact range of a linear form over the variable box of `model`.
pub fn form_interval(form: &LinearForm, model: &Model) -> Interval {
    let mut lo = form.constant;
    let mut hi = form.constant;
    for (v, &c) in &form.coeffs {
        let (l, u) = model.var(v).map_or((f64::NEG_INFINITY, f64::INFINITY), |d| (d.lower, d.upper));
        let (a, b) = if c > 0.0 { (c * l, c * u) } else { (c * u, c * l) };
        lo += a;
        hi += b;
    }
    Interval::new(lo, hi)
}

/// Range of an affine expression; errors if `expr` is not affine.
pub fn interval_of(expr: &Expr, model: &Model) -> Result<Interval> {
    let form = LinearForm::from_expr(expr).ok_or_else(|| CoreError::NotLinear(format!("{expr}")))?;
    Ok(form_interval(&form, model))
}
