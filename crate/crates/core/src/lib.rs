//! Exact linearization of nonlinear optimization models.
//!
//! The crate detects six nonlinearity patterns that admit an exact LP/MILP
//! counterpart (products involving a binary, `min`, `max`, `abs`, linear
//! fractional objectives and monotone transformations of affine functions),
//! rewrites them inside a fixpoint loop, and ships the dense simplex,
//! branch-and-bound and enumeration oracles used to check that the rewritten
//! model has the same optimal value as the original.
//!
//! Everything here is pure and allocation-only; parsing, file formats and the
//! command line live in the `exactlin` companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod detect;
pub mod error;
pub mod eval;
pub mod expr;
pub mod model;
pub mod normalize;
pub mod rewrite;
pub mod solve;

pub use analysis::{affinity_of, interval_of, AffinityClass, Interval, LinearForm};
pub use detect::{
    applicable_kinds, detect_patterns, polarity_of, Location, PatternInstance, PatternKind, Path,
    Polarity, Side,
};
pub use error::{CoreError, Result};
pub use eval::evaluate;
pub use expr::{Expr, MonoFn};
pub use model::{Constraint, Domain, Model, ParamBinding, Relation, Sense, VarDecl};
pub use normalize::normalize;
pub use rewrite::{run_fixpoint, Order, RewriteOptions, RewriteTrace};
pub use solve::{
    dinkelbach, oracle_solve, solve_lp, solve_milp, verify_equivalence, Solution, SolveStatus,
    VerifyReport,
};

/// Default internal comparison tolerance.
pub const EPS: f64 = 1e-9;
