//! Dense two-phase primal simplex.
//!
//! Variables with general bounds are mapped onto non-negative columns
//! (shifted, mirrored or split into a free pair), finite upper bounds become
//! rows, and a phase-one problem over artificial columns finds a starting
//! basis. Dantzig pricing is used until 1000 degenerate pivots have been
//! observed, after which Bland's rule takes over for the rest of the solve.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{linear_objective, sense_sign, Solution, SolveStatus};
use crate::analysis::LinearForm;
use crate::error::{CoreError, Result};
use crate::model::{Model, Relation, Sense};

pub const MAX_PIVOTS: usize = 100_000;
const DEGENERATE_SWITCH: usize = 1000;
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

/// A linear model in dense, minimize-canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProblem {
    pub names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    /// Minimization costs (negated for maximize models).
    pub cost: Vec<f64>,
    /// Objective constant in the original sense.
    pub offset: f64,
    pub sense: Sense,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl LinearProblem {
    /// Builds the dense form; fails with `NotLinear` on any nonlinear expression.
    pub fn from_model(model: &Model) -> Result<LinearProblem> {
        let model = model.normalized()?;
        let index: BTreeMap<&str, usize> =
            model.vars.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
        let n = model.vars.len();
        let dense = |f: &LinearForm, what: &str| -> Result<Vec<f64>> {
            let mut out = vec![0.0; n];
            for (v, c) in &f.coeffs {
                let j = *index.get(v.as_str()).ok_or_else(|| CoreError::UnboundSymbol(v.clone()))?;
                out[j] = *c;
            }
            let _ = what;
            Ok(out)
        };
        let obj = linear_objective(&model)?;
        let sign = sense_sign(model.sense);
        let cost = dense(&obj, "objective")?.into_iter().map(|c| c * sign).collect();
        let mut rows = Vec::with_capacity(model.constraints.len());
        for c in &model.constraints {
            let lhs = LinearForm::from_expr(&c.lhs);
            let rhs = LinearForm::from_expr(&c.rhs);
            let (Some(lhs), Some(rhs)) = (lhs, rhs) else {
                return Err(CoreError::NotLinear(format!("constraint `{}`", c.name)));
            };
            let f = lhs.minus(&rhs);
            rows.push(Row {
                name: c.name.clone(),
                coeffs: dense(&f, &c.name)?,
                rel: c.rel,
                rhs: -f.constant,
            });
        }
        Ok(LinearProblem {
            names: model.vars.iter().map(|v| v.name.clone()).collect(),
            lower: model.vars.iter().map(|v| v.lower).collect(),
            upper: model.vars.iter().map(|v| v.upper).collect(),
            integer: model.vars.iter().map(|v| v.domain.is_integral()).collect(),
            cost,
            offset: obj.constant,
            sense: model.sense,
            rows,
        })
    }

    /// Objective value in the model's own sense.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        let min_value: f64 = self.cost.iter().zip(x).map(|(c, v)| c * v).sum();
        min_value * sense_sign(self.sense) + self.offset
    }

    pub fn assignment(&self, x: &[f64]) -> BTreeMap<String, f64> {
        self.names.iter().cloned().zip(x.iter().copied()).collect()
    }

    /// Solves the continuous relaxation with the given bounds.
    pub fn solve_relaxation(&self, lower: &[f64], upper: &[f64]) -> LpOutcome {
        Simplex::build(self, lower, upper).map_or(LpOutcome::Infeasible, |s| s.solve(self))
    }
}

/// Solves the continuous relaxation of a linear model.
pub fn solve_lp(model: &Model) -> Result<Solution> {
    let lp = LinearProblem::from_model(model)?;
    Ok(match lp.solve_relaxation(&lp.lower, &lp.upper) {
        LpOutcome::Optimal { x, .. } => Solution {
            objective: lp.objective_at(&x),
            assignment: lp.assignment(&x),
            status: SolveStatus::Optimal,
        },
        LpOutcome::Infeasible => Solution::without_point(SolveStatus::Infeasible),
        LpOutcome::Unbounded => Solution::without_point(SolveStatus::Unbounded),
        LpOutcome::IterationLimit => Solution::without_point(SolveStatus::IterationLimit),
    })
}

#[derive(Debug, Clone, Copy)]
enum ColumnMap {
    Shift { col: usize, by: f64 },
    Mirror { col: usize, from: f64 },
    Free { pos: usize, neg: usize },
}

struct Simplex {
    /// Rows of `[A | b]`, plus the objective row last.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    m: usize,
    ncols: usize,
    first_artificial: usize,
    map: Vec<ColumnMap>,
    pivots: usize,
    degenerate: usize,
}

impl Simplex {
    /// Returns `None` when the bounds are contradictory.
    fn build(lp: &LinearProblem, lower: &[f64], upper: &[f64]) -> Option<Simplex> {
        let n = lp.names.len();
        let mut map = Vec::with_capacity(n);
        let mut ncols = 0;
        for j in 0..n {
            let (l, u) = (lower[j], upper[j]);
            if l > u {
                return None;
            }
            let m = if l.is_finite() {
                ColumnMap::Shift { col: ncols, by: l }
            } else if u.is_finite() {
                ColumnMap::Mirror { col: ncols, from: u }
            } else {
                ncols += 1;
                ColumnMap::Free { pos: ncols - 1, neg: ncols }
            };
            ncols += 1;
            map.push(m);
        }
        let structural = ncols;

        // (coeffs over structural columns, relation, rhs)
        let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
        for r in &lp.rows {
            let mut a = vec![0.0; structural];
            let mut rhs = r.rhs;
            for (j, &c) in r.coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                match map[j] {
                    ColumnMap::Shift { col, by } => {
                        a[col] += c;
                        rhs -= c * by;
                    }
                    ColumnMap::Mirror { col, from } => {
                        a[col] -= c;
                        rhs -= c * from;
                    }
                    ColumnMap::Free { pos, neg } => {
                        a[pos] += c;
                        a[neg] -= c;
                    }
                }
            }
            rows.push((a, r.rel, rhs));
        }
        for j in 0..n {
            if let ColumnMap::Shift { col, by } = map[j] {
                if upper[j].is_finite() {
                    let mut a = vec![0.0; structural];
                    a[col] = 1.0;
                    rows.push((a, Relation::Le, upper[j] - by));
                }
            }
        }

        let m = rows.len();
        let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let first_slack = structural;
        // Artificial columns for every row whose slack cannot start basic.
        let needs_art: Vec<bool> = rows
            .iter()
            .map(|(_, rel, rhs)| match rel {
                Relation::Le => *rhs < 0.0,
                Relation::Ge => *rhs > 0.0,
                Relation::Eq => true,
            })
            .collect();
        let art_count = needs_art.iter().filter(|b| **b).count();
        let first_artificial = first_slack + slack_count;
        let total = first_artificial + art_count;

        let mut t = vec![vec![0.0; total + 1]; m + 1];
        let mut basis = vec![0; m];
        let mut slack = first_slack;
        let mut art = first_artificial;
        for (i, (a, rel, rhs)) in rows.into_iter().enumerate() {
            // Every slack that starts basic must carry a +1 coefficient.
            let flip = match rel {
                Relation::Ge => rhs <= 0.0,
                Relation::Le | Relation::Eq => rhs < 0.0,
            };
            let s = if flip { -1.0 } else { 1.0 };
            for (j, v) in a.into_iter().enumerate() {
                t[i][j] = s * v;
            }
            t[i][total] = s * rhs;
            match rel {
                Relation::Le => {
                    t[i][slack] = s;
                    if !needs_art[i] {
                        basis[i] = slack;
                    }
                    slack += 1;
                }
                Relation::Ge => {
                    t[i][slack] = -s;
                    if !needs_art[i] {
                        basis[i] = slack;
                    }
                    slack += 1;
                }
                Relation::Eq => {}
            }
            if needs_art[i] {
                t[i][art] = 1.0;
                basis[i] = art;
                art += 1;
            }
        }
        Some(Simplex {
            t,
            basis,
            m,
            ncols: total,
            first_artificial,
            map,
            pivots: 0,
            degenerate: 0,
        })
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.ncols + 1;
        let p = self.t[r][c];
        for j in 0..w {
            self.t[r][j] /= p;
        }
        self.t[r][c] = 1.0;
        let pivot_row = self.t[r].clone();
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.t[i][c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i];
            for j in 0..w {
                row[j] -= f * pivot_row[j];
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Installs `cost` as the objective row in reduced form.
    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.ncols + 1;
        let mut obj = vec![0.0; w];
        obj[..cost.len()].copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..w {
                    obj[j] -= cb * self.t[i][j];
                }
            }
        }
        self.t[self.m] = obj;
    }

    /// Minimizes the installed objective over columns `< limit`.
    fn optimize(&mut self, limit: usize) -> LpOutcome {
        let rhs = self.ncols;
        loop {
            if self.pivots >= MAX_PIVOTS {
                return LpOutcome::IterationLimit;
            }
            let bland = self.degenerate >= DEGENERATE_SWITCH;
            let obj = &self.t[self.m];
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..limit {
                if obj[j] < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = obj[j];
                }
            }
            let Some(c) = enter else {
                return LpOutcome::Optimal { x: Vec::new(), value: -self.t[self.m][rhs] };
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.t[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.t[i][rhs].max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return LpOutcome::Unbounded;
            };
            if ratio <= 1e-12 {
                self.degenerate += 1;
            }
            self.pivot(r, c);
        }
    }

    fn solve(mut self, lp: &LinearProblem) -> LpOutcome {
        let total = self.ncols;
        if self.first_artificial < total {
            let mut cost = vec![0.0; total];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = 1.0;
            }
            self.set_objective(&cost);
            match self.optimize(total) {
                LpOutcome::Optimal { value, .. } => {
                    let scale = 1.0 + self.t.iter().take(self.m).map(|r| r[total].abs()).fold(0.0, f64::max);
                    if value > 1e-9 * scale {
                        return LpOutcome::Infeasible;
                    }
                }
                LpOutcome::IterationLimit => return LpOutcome::IterationLimit,
                // Phase one is bounded below by zero.
                _ => return LpOutcome::Infeasible,
            }
            for i in 0..self.m {
                if self.basis[i] >= self.first_artificial {
                    let col = (0..self.first_artificial)
                        .filter(|&j| self.t[i][j].abs() > PIVOT_TOL)
                        .max_by(|&a, &b| self.t[i][a].abs().total_cmp(&self.t[i][b].abs()));
                    if let Some(j) = col {
                        self.pivot(i, j);
                    }
                }
            }
        }

        let mut cost = vec![0.0; total];
        for (j, m) in self.map.iter().enumerate() {
            let c = lp.cost[j];
            match *m {
                ColumnMap::Shift { col, .. } => cost[col] = c,
                ColumnMap::Mirror { col, .. } => cost[col] = -c,
                ColumnMap::Free { pos, neg } => {
                    cost[pos] = c;
                    cost[neg] = -c;
                }
            }
        }
        self.set_objective(&cost);
        match self.optimize(self.first_artificial) {
            LpOutcome::Optimal { .. } => {}
            other => return other,
        }

        let mut col_value = vec![0.0; total];
        for i in 0..self.m {
            col_value[self.basis[i]] = self.t[i][total].max(0.0);
        }
        let x: Vec<f64> = self
            .map
            .iter()
            .map(|m| match *m {
                ColumnMap::Shift { col, by } => by + col_value[col],
                ColumnMap::Mirror { col, from } => from - col_value[col],
                ColumnMap::Free { pos, neg } => col_value[pos] - col_value[neg],
            })
            .collect();
        let value = lp.objective_at(&x);
        LpOutcome::Optimal { x, value }
    }
}
