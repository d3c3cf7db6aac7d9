//! Best-bound branch and bound over the dense simplex.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::lp::{LinearProblem, LpOutcome};
use super::{Solution, SolveStatus};
use crate::error::Result;
use crate::model::Model;

pub const INTEGRALITY_TOL: f64 = 1e-6;
pub const RELATIVE_GAP: f64 = 1e-9;
pub const NODE_LIMIT: usize = 100_000;

struct Node {
    /// Relaxation bound in minimize form.
    bound: f64,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    /// Max-heap order: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Solves a linear model with binary/integer variables to optimality.
pub fn solve_milp(model: &Model) -> Result<Solution> {
    let lp = LinearProblem::from_model(model)?;
    Ok(branch_and_bound(&lp))
}

pub(crate) fn branch_and_bound(lp: &LinearProblem) -> Solution {
    let min_value = |x: &[f64]| -> f64 { lp.cost.iter().zip(x).map(|(c, v)| c * v).sum() };
    let mut lower = lp.lower.clone();
    let mut upper = lp.upper.clone();
    for j in 0..lower.len() {
        if lp.integer[j] {
            lower[j] = libm::ceil(lower[j] - INTEGRALITY_TOL);
            upper[j] = libm::floor(upper[j] + INTEGRALITY_TOL);
        }
    }
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut saw_limit = false;

    match lp.solve_relaxation(&lower, &upper) {
        LpOutcome::Optimal { x, .. } => {
            heap.push(Node { bound: min_value(&x), seq, lower, upper });
        }
        LpOutcome::Infeasible => return Solution::without_point(SolveStatus::Infeasible),
        LpOutcome::Unbounded => return Solution::without_point(SolveStatus::Unbounded),
        LpOutcome::IterationLimit => return Solution::without_point(SolveStatus::IterationLimit),
    }

    let mut nodes = 0;
    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= best - RELATIVE_GAP * (1.0 + best.abs()) {
                break;
            }
        }
        nodes += 1;
        if nodes > NODE_LIMIT {
            saw_limit = true;
            break;
        }
        let x = match lp.solve_relaxation(&node.lower, &node.upper) {
            LpOutcome::Optimal { x, .. } => x,
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => return Solution::without_point(SolveStatus::Unbounded),
            LpOutcome::IterationLimit => {
                saw_limit = true;
                continue;
            }
        };
        let value = min_value(&x);
        if let Some((best, _)) = &incumbent {
            if value >= best - RELATIVE_GAP * (1.0 + best.abs()) {
                continue;
            }
        }
        let branch = (0..x.len())
            .filter(|&j| lp.integer[j])
            .map(|j| (j, (x[j] - libm::round(x[j])).abs()))
            .filter(|&(_, f)| f > INTEGRALITY_TOL)
            .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
        match branch {
            None => {
                let mut x = x;
                for j in 0..x.len() {
                    if lp.integer[j] {
                        x[j] = libm::round(x[j]);
                    }
                }
                incumbent = Some((value, x));
            }
            Some((j, _)) => {
                let down = libm::floor(x[j]);
                let mut up_lower = node.lower.clone();
                up_lower[j] = down + 1.0;
                let mut down_upper = node.upper.clone();
                down_upper[j] = down;
                seq += 1;
                heap.push(Node { bound: value, seq, lower: node.lower.clone(), upper: down_upper });
                seq += 1;
                heap.push(Node { bound: value, seq, lower: up_lower, upper: node.upper });
            }
        }
    }

    match incumbent {
        Some((_, x)) => Solution {
            objective: lp.objective_at(&x),
            assignment: lp.assignment(&x),
            status: if saw_limit && !heap.is_empty() {
                SolveStatus::IterationLimit
            } else {
                SolveStatus::Optimal
            },
        },
        None if saw_limit => Solution::without_point(SolveStatus::IterationLimit),
        None => Solution::without_point(SolveStatus::Infeasible),
    }
}
