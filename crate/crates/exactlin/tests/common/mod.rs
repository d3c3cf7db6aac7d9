//! Independent reference solvers and instance builders shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use exactlin_core::{Constraint, Expr, Model, Relation, Sense, SolveStatus, VarDecl};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn c(v: f64) -> Expr {
    Expr::Const(v)
}

pub fn v(n: &str) -> Expr {
    Expr::var(n)
}

pub fn fix(model: &mut Model, name: &str, value: f64) {
    let d = model.vars.iter_mut().find(|d| d.name == name).expect("declared variable");
    d.lower = value;
    d.upper = value;
}

/// Optimum of `var` over a linear model whose other variables are all fixed.
pub fn extreme(model: &Model, var: &str, sense: Sense) -> Option<f64> {
    let mut m = model.clone();
    m.sense = sense;
    m.objective = v(var);
    let s = exactlin_core::solve_lp(&m).ok()?;
    (s.status == SolveStatus::Optimal).then_some(s.objective)
}

pub fn better(sense: Sense, a: f64, b: f64) -> bool {
    match sense {
        Sense::Minimize => a < b,
        Sense::Maximize => a > b,
    }
}

/// Dense linear program with box bounds, used by the solver reference checks.
#[derive(Debug, Clone)]
pub struct DenseLp {
    pub sense: Sense,
    pub cost: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
}

pub fn xname(j: usize) -> String {
    format!("x{j}")
}

fn dot_expr(a: &[f64]) -> Expr {
    Expr::Sum(a.iter().enumerate().map(|(j, &k)| c(k) * v(&xname(j))).collect())
}

impl DenseLp {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, binary: bool) -> DenseLp {
        let coef = |rng: &mut ChaCha8Rng| rng.gen_range(-5..=5) as f64;
        let relation = |rng: &mut ChaCha8Rng| match rng.gen_range(0..9) {
            0..=3 => Relation::Le,
            4..=7 => Relation::Ge,
            _ => Relation::Eq,
        };
        let bounds = (0..n)
            .map(|_| {
                if binary {
                    (0.0, 1.0)
                } else {
                    let lo = rng.gen_range(-5..=3) as f64;
                    (lo, lo + rng.gen_range(1..=6) as f64)
                }
            })
            .collect();
        let rows = (0..rng.gen_range(1..=4))
            .map(|_| {
                let a = (0..n).map(|_| coef(rng)).collect();
                let rhs = if binary { rng.gen_range(-6..=12) } else { rng.gen_range(-10..=10) };
                (a, relation(rng), rhs as f64)
            })
            .collect();
        DenseLp {
            sense: if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize },
            cost: (0..n).map(|_| coef(rng)).collect(),
            bounds,
            rows,
        }
    }

    pub fn model(&self, binary: bool) -> Model {
        let mut m = Model::new(self.sense, dot_expr(&self.cost));
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            m = m.with_var(if binary { VarDecl::binary(xname(j)) } else { VarDecl::continuous(xname(j), lo, hi) });
        }
        for (i, (a, rel, b)) in self.rows.iter().enumerate() {
            m = m.with_constraint(Constraint::new(format!("r{i}"), dot_expr(a), *rel, c(*b)));
        }
        m
    }

    pub fn feasible(&self, x: &[f64], tol: f64) -> bool {
        x.iter().zip(&self.bounds).all(|(v, (lo, hi))| *v >= lo - tol && *v <= hi + tol)
            && self.rows.iter().all(|(a, rel, b)| {
                let lhs: f64 = a.iter().zip(x).map(|(k, v)| k * v).sum();
                rel.violation(lhs, *b) <= tol
            })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(k, v)| k * v).sum()
    }

    /// Best objective over all basic solutions; only for three variables.
    pub fn vertex_optimum(&self) -> Option<f64> {
        assert_eq!(self.cost.len(), 3);
        let mut planes: Vec<([f64; 3], f64)> =
            self.rows.iter().map(|(a, _, b)| ([a[0], a[1], a[2]], *b)).collect();
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            planes.push((e, lo));
            planes.push((e, hi));
        }
        let mut best: Option<f64> = None;
        for i in 0..planes.len() {
            for j in i + 1..planes.len() {
                for k in j + 1..planes.len() {
                    let Some(x) = cramer([planes[i], planes[j], planes[k]]) else { continue };
                    if self.feasible(&x, 1e-9) {
                        let val = self.value(&x);
                        if best.is_none_or(|b| better(self.sense, val, b)) {
                            best = Some(val);
                        }
                    }
                }
            }
        }
        best
    }

    /// Best objective over all 0/1 points.
    pub fn enumerated_optimum(&self) -> Option<f64> {
        let n = self.cost.len();
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << n) {
            let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
            if self.feasible(&x, 0.0) {
                let val = self.value(&x);
                if best.is_none_or(|b| better(self.sense, val, b)) {
                    best = Some(val);
                }
            }
        }
        best
    }
}

fn cramer(p: [([f64; 3], f64); 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = [p[0].0, p[1].0, p[2].0];
    let d = det(a);
    if d.abs() < 1e-9 {
        return None;
    }
    let mut x = [0.0; 3];
    for (col, out) in x.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][col] = p[r].1;
        }
        *out = det(m) / d;
    }
    Some(x)
}

/// Random distinct affine functions of `x` and `y` that each involve a variable.
pub fn affine_args(rng: &mut ChaCha8Rng, n: usize) -> Vec<(f64, f64, f64)> {
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    while out.len() < n {
        let a = rng.gen_range(-4..=4) as f64;
        let b = rng.gen_range(-4..=4) as f64;
        let k = rng.gen_range(-5..=5) as f64;
        if (a, b) != (0.0, 0.0) && !out.contains(&(a, b, k)) {
            out.push((a, b, k));
        }
    }
    out
}

pub fn affine_expr(&(a, b, k): &(f64, f64, f64)) -> Expr {
    c(a) * v("x") + c(b) * v("y") + c(k)
}

pub fn affine_at(&(a, b, k): &(f64, f64, f64), (x, y): (f64, f64)) -> f64 {
    a * x + b * y + k
}

/// Empty model over `x, y` in `[-5, 5]`.
pub fn xy_model(sense: Sense, objective: Expr) -> Model {
    Model::new(sense, objective)
        .with_var(VarDecl::continuous("x", -5.0, 5.0))
        .with_var(VarDecl::continuous("y", -5.0, 5.0))
}
