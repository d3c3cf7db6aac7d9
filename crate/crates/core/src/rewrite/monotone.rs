use alloc::format;

use super::{Builder, Direction, PostSolve, Rewrite};
use crate::analysis::{form_interval, LinearForm};
use crate::detect::{Location, PatternInstance, PatternKind, Side};
use crate::error::{CoreError, Result};
use crate::expr::Expr;
use crate::model::Model;

/// Peels a strictly monotone function off a whole objective or constraint side.
pub fn rewrite_monotone(model: &Model, instances: &[PatternInstance]) -> Result<Rewrite> {
    let mut b = Builder::new(model, PatternKind::Monotone)?;
    for inst in instances {
        let func = match (inst.kind, inst.func) {
            (PatternKind::Monotone, Some(f)) => f,
            _ => return Err(CoreError::Invariant(format!("{} passed to monotone", inst.kind))),
        };
        let g = &inst.args[0];
        let form = LinearForm::from_expr(g).ok_or_else(|| CoreError::NonAffineArg(format!("{}", inst.path)))?;
        let range = form_interval(&form, &b.model);
        if !func.domain_ok(range.lo) {
            return Err(CoreError::NonInvertibleOnRange(format!("{func} on {range}")));
        }
        let direction =
            if func.is_increasing() { Direction::Increasing } else { Direction::Decreasing };
        match &inst.path.location {
            Location::Objective => {
                b.model.objective = g.clone();
                if direction == Direction::Decreasing {
                    b.model.sense = b.model.sense.flipped();
                }
                b.out.post_solve = Some(PostSolve { func, direction });
            }
            Location::Constraint { name, side } => {
                let c = b
                    .model
                    .constraints
                    .iter_mut()
                    .find(|c| &c.name == name)
                    .ok_or_else(|| CoreError::Invariant(format!("missing constraint {name}")))?;
                let (rel, other) = match side {
                    Side::Lhs => (c.rel, &c.rhs),
                    Side::Rhs => (c.rel.flipped(), &c.lhs),
                };
                let alpha = other.as_const().ok_or_else(|| {
                    CoreError::NonInvertibleOnRange(format!("non-constant bound in `{name}`"))
                })?;
                let bound = func.inverse(alpha).ok_or_else(|| {
                    CoreError::NonInvertibleOnRange(format!("{func}(.) {rel} {alpha} in `{name}`"))
                })?;
                let rel = if direction == Direction::Increasing { rel } else { rel.flipped() };
                c.lhs = g.clone();
                c.rel = rel;
                c.rhs = Expr::Const(bound);
                b.out.notes.push(format!("`{name}`: {func}(g) {rel} {alpha} -> g {rel} {bound}"));
            }
        }
        b.out.instances_replaced += 1;
    }
    b.finish()
}
