use std::collections::{BTreeMap, BTreeSet};

use exactlin_core::rewrite::{run_fixpoint_with, AbsBenignForm};
use exactlin_core::solve::LinearProblem;
use exactlin_core::{
    detect_patterns, dinkelbach, evaluate, oracle_solve, run_fixpoint, solve_lp, solve_milp,
    verify_equivalence, Constraint, Expr, Model, MonoFn, Order, PatternKind, Polarity, Relation,
    RewriteOptions, Sense, SolveStatus, VarDecl,
};
use proptest::prelude::*;

fn c(v: f64) -> Expr {
    Expr::Const(v)
}

fn v(n: &str) -> Expr {
    Expr::var(n)
}

fn fix(model: &mut Model, name: &str, value: f64) {
    let d = model.vars.iter_mut().find(|d| d.name == name).expect("declared");
    d.lower = value;
    d.upper = value;
}

/// Smallest or largest value of `var` over the (fully fixed) linear model.
fn extreme(model: &Model, var: &str, sense: Sense) -> f64 {
    let mut m = model.clone();
    m.sense = sense;
    m.objective = v(var);
    let s = solve_lp(&m).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal, "{var} under {sense:?}");
    s.objective
}

fn first_aux(trace: &exactlin_core::RewriteTrace) -> String {
    trace.iterations[0].aux_vars[0].name.clone()
}

fn fixed() -> Order {
    Order::FixedPriority
}

#[test]
fn binary_product_truth_table() {
    let m = Model::new(Sense::Minimize, v("b1") * v("b2"))
        .with_var(VarDecl::binary("b1"))
        .with_var(VarDecl::binary("b2"));
    let (linear, trace) = run_fixpoint(&m, fixed(), 0).unwrap();
    let w = first_aux(&trace);
    for (b1, b2) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
        let mut l = linear.clone();
        fix(&mut l, "b1", b1);
        fix(&mut l, "b2", b2);
        assert_eq!(extreme(&l, &w, Sense::Minimize), b1 * b2);
        assert_eq!(extreme(&l, &w, Sense::Maximize), b1 * b2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn binary_continuous_product_is_exact(lo in -10.0f64..10.0, width in 0.5f64..10.0) {
        let hi = lo + width;
        let m = Model::new(Sense::Minimize, v("b") * v("x"))
            .with_var(VarDecl::binary("b"))
            .with_var(VarDecl::continuous("x", lo, hi));
        let (linear, trace) = run_fixpoint(&m, fixed(), 0).unwrap();
        let z = first_aux(&trace);
        for b in [0.0, 1.0] {
            for k in 0..=20 {
                let x = lo + (hi - lo) * k as f64 / 20.0;
                let mut l = linear.clone();
                fix(&mut l, "b", b);
                fix(&mut l, "x", x);
                let (zmin, zmax) = (extreme(&l, &z, Sense::Minimize), extreme(&l, &z, Sense::Maximize));
                prop_assert!((zmin - b * x).abs() <= 1e-9 && (zmax - b * x).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn epigraph_tracks_pointwise_max(
        coeffs in prop::collection::vec((-4i32..=4, -4i32..=4, -5i32..=5), 2..4),
        x in -5.0f64..5.0,
        y in -5.0f64..5.0,
    ) {
        let args: Vec<Expr> = coeffs
            .iter()
            .map(|&(a, b, k)| c(a as f64) * v("x") + c(b as f64) * v("y") + c(k as f64))
            .collect();
        let truth = coeffs
            .iter()
            .map(|&(a, b, k)| a as f64 * x + b as f64 * y + k as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        let m = Model::new(Sense::Minimize, Expr::max(args))
            .with_var(VarDecl::continuous("x", -5.0, 5.0))
            .with_var(VarDecl::continuous("y", -5.0, 5.0));
        let (mut linear, trace) = run_fixpoint(&m, fixed(), 0).unwrap();
        let t = first_aux(&trace);
        fix(&mut linear, "x", x);
        fix(&mut linear, "y", y);
        prop_assert!((extreme(&linear, &t, Sense::Minimize) - truth).abs() <= 1e-9);
    }
}

#[derive(Debug, Clone, Copy)]
enum Class {
    Benign,
    Split,
    Adverse,
}

#[derive(Debug, Clone)]
struct Instance {
    obj: Vec<i32>,
    args: Vec<(i32, i32, i32)>,
    weight: i32,
    at: (f64, f64),
    slack: f64,
    use_max: bool,
    maximize: bool,
}

fn instance() -> impl Strategy<Value = Instance> {
    (
        prop::collection::vec(-3i32..=3, 2),
        prop::collection::vec((-4i32..=4, -4i32..=4, -5i32..=5), 2..4).prop_filter(
            "arguments must involve a variable and differ",
            |args| {
                args.iter().all(|&(a, b, _)| (a, b) != (0, 0))
                    && args.iter().enumerate().all(|(i, x)| !args[..i].contains(x))
            },
        ),
        1i32..=4,
        (-4.0f64..4.0, -4.0f64..4.0),
        0.0f64..3.0,
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(obj, args, weight, at, slack, use_max, maximize)| Instance {
            obj,
            args,
            weight,
            at,
            slack,
            use_max,
            maximize,
        })
}

impl Instance {
    fn arg_exprs(&self) -> Vec<Expr> {
        self.args.iter().map(|&(a, b, k)| c(a as f64) * v("x") + c(b as f64) * v("y") + c(k as f64)).collect()
    }

    fn arg_values(&self) -> Vec<f64> {
        let (x, y) = self.at;
        self.args.iter().map(|&(a, b, k)| a as f64 * x + b as f64 * y + k as f64).collect()
    }

    fn linear(&self) -> Expr {
        c(self.obj[0] as f64) * v("x") + c(self.obj[1] as f64) * v("y")
    }

    /// A min/max occurrence whose polarity is `class`.
    fn model(&self, class: Class) -> Model {
        let atom = if self.use_max { Expr::max(self.arg_exprs()) } else { Expr::min(self.arg_exprs()) };
        let vals = self.arg_values();
        let (lo, hi) = (vals.iter().copied().fold(f64::INFINITY, f64::min), vals.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        let w = c(self.weight as f64);
        let sense = if self.maximize { Sense::Maximize } else { Sense::Minimize };
        // Positive weight is benign when the optimization pushes the atom toward
        // its convex side: down on a max, up on a min.
        let benign_sign = if self.use_max != self.maximize { 1.0 } else { -1.0 };
        let base = Model::new(sense, c(0.0))
            .with_var(VarDecl::continuous("x", -5.0, 5.0))
            .with_var(VarDecl::continuous("y", -5.0, 5.0));
        match class {
            Class::Benign => Model { objective: self.linear() + c(benign_sign) * w * atom, ..base },
            Class::Adverse => Model { objective: self.linear() - c(benign_sign) * w * atom, ..base },
            Class::Split => {
                let (rel, rhs) = if self.use_max { (Relation::Le, hi + self.slack) } else { (Relation::Ge, lo - self.slack) };
                Model { objective: self.linear(), ..base }.with_constraint(Constraint::new("cap", atom, rel, c(rhs)))
            }
        }
    }
}

fn polarities(m: &Model) -> BTreeSet<Polarity> {
    detect_patterns(m).unwrap().iter().map(|i| i.polarity).collect()
}

fn agrees_with_oracle(m: &Model, opts: &RewriteOptions) -> Result<(), TestCaseError> {
    let (linear, trace) = run_fixpoint_with(m, fixed(), 0, opts).unwrap();
    let r = verify_equivalence(m, &linear, &trace, 1e-8).unwrap();
    prop_assert!(r.osr_pass, "{r:?}\n{m:?}");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn min_max_classes_match_oracle(inst in instance()) {
        for (class, pol) in [
            (Class::Benign, Polarity::Benign),
            (Class::Split, Polarity::ConstraintSplit),
            (Class::Adverse, Polarity::Adverse),
        ] {
            let m = inst.model(class);
            prop_assert_eq!(polarities(&m), BTreeSet::from([pol]));
            agrees_with_oracle(&m, &RewriteOptions::default())?;
        }
    }

    #[test]
    fn abs_forms_match_oracle(inst in instance()) {
        let t = inst.arg_exprs().remove(0);
        let t_at = inst.arg_values()[0];
        let base = Model::new(Sense::Minimize, c(0.0))
            .with_var(VarDecl::continuous("x", -5.0, 5.0))
            .with_var(VarDecl::continuous("y", -5.0, 5.0));
        let w = c(inst.weight as f64);
        let benign = Model { objective: inst.linear() + w.clone() * Expr::abs(t.clone()), ..base.clone() };
        for form in [AbsBenignForm::TwoInequalities, AbsBenignForm::PosNegParts] {
            agrees_with_oracle(&benign, &RewriteOptions { abs_benign: form })?;
        }
        let adverse = Model { objective: inst.linear() - w * Expr::abs(t.clone()), ..base.clone() };
        prop_assert_eq!(polarities(&adverse), BTreeSet::from([Polarity::Adverse]));
        agrees_with_oracle(&adverse, &RewriteOptions::default())?;
        let equality = Model { objective: inst.linear(), ..base }
            .with_constraint(Constraint::new("dev", Expr::abs(t), Relation::Eq, c(t_at.abs())));
        agrees_with_oracle(&equality, &RewriteOptions::default())?;
    }

    #[test]
    fn charnes_cooper_matches_dinkelbach(
        num in prop::collection::vec(-5i32..=5, 4).prop_filter("nonzero numerator", |n| n.iter().any(|&k| k != 0)),
        den in prop::collection::vec(0i32..=4, 3).prop_filter("variable denominator", |d| d.iter().any(|&k| k != 0)),
        d in 0.01f64..3.0,
        rows in prop::collection::vec(prop::collection::vec(-3i32..=3, 3), 4),
        at in prop::collection::vec(0.0f64..5.0, 3),
        maximize in any::<bool>(),
    ) {
        let names = ["x0", "x1", "x2"];
        let lin = |k: &[i32]| Expr::Sum((0..3).map(|j| c(k[j] as f64) * v(names[j])).collect());
        let n = lin(&num) + c(num[3] as f64);
        let dd = lin(&den) + c(d);
        let mut m = Model::new(if maximize { Sense::Maximize } else { Sense::Minimize }, Expr::quot(n, dd));
        for name in names {
            m = m.with_var(VarDecl::continuous(name, 0.0, 5.0));
        }
        for (i, r) in rows.iter().enumerate() {
            let rhs: f64 = (0..3).map(|j| r[j] as f64 * at[j]).sum::<f64>() + 1.0;
            m = m.with_constraint(Constraint::new(format!("r{i}"), lin(r), Relation::Le, c(rhs)));
        }
        let reference = dinkelbach(&m).unwrap();
        prop_assert_eq!(reference.status, SolveStatus::Optimal);
        let (linear, trace) = run_fixpoint(&m, fixed(), 0).unwrap();
        prop_assert_eq!(trace.iterations[0].kind, PatternKind::LinearFractional);
        let s = solve_milp(&linear).unwrap();
        prop_assert!((s.objective - reference.objective).abs() <= 1e-6, "{} vs {}", s.objective, reference.objective);
        let point = exactlin_core::solve::project(&m, &trace, &s.assignment).unwrap();
        let value = evaluate(&m.objective, &point, &BTreeMap::new()).unwrap();
        prop_assert!((value - reference.objective).abs() <= 1e-6);
    }

    #[test]
    fn monotone_argmin_sets_coincide(
        coeffs in prop::collection::vec(0i32..=5, 2..7).prop_filter("variable argument", |k| k.iter().any(|&k| k != 0)),
        offset in 1i32..=4,
        row in prop::collection::vec(-3i32..=3, 6),
        func in prop_oneof![Just(MonoFn::Exp), Just(MonoFn::Log), Just(MonoFn::Sqrt)],
        maximize in any::<bool>(),
    ) {
        let n = coeffs.len();
        let names: Vec<String> = (0..n).map(|j| format!("b{j}")).collect();
        let g = Expr::Sum(
            (0..n).map(|j| c(coeffs[j] as f64 * 0.25) * v(&names[j])).chain([c(offset as f64)]).collect(),
        );
        let rows = Expr::Sum((0..n).map(|j| c(row[j] as f64) * v(&names[j])).collect());
        let mut m = Model::new(if maximize { Sense::Maximize } else { Sense::Minimize }, Expr::mono(func, g))
            .with_constraint(Constraint::new("r", rows, Relation::Le, c(1.0)));
        for name in &names {
            m = m.with_var(VarDecl::binary(name.as_str()));
        }
        let (linear, trace) = run_fixpoint(&m, fixed(), 0).unwrap();
        let post = trace.post_solve.expect("objective monotone is recorded");
        prop_assert_eq!(post.func, func);

        let lp = LinearProblem::from_model(&linear).unwrap();
        let mut best_orig: Vec<(f64, u32)> = Vec::new();
        let mut best_lin: Vec<(f64, u32)> = Vec::new();
        for mask in 0u32..(1 << n) {
            let point: BTreeMap<String, f64> =
                names.iter().enumerate().map(|(j, s)| (s.clone(), ((mask >> j) & 1) as f64)).collect();
            if exactlin_core::solve::max_violation(&m, &point).unwrap() > 0.0 {
                continue;
            }
            best_orig.push((evaluate(&m.objective, &point, &BTreeMap::new()).unwrap(), mask));
            let x: Vec<f64> = lp.names.iter().map(|s| point[s]).collect();
            best_lin.push((lp.objective_at(&x), mask));
        }
        let argbest = |vals: &[(f64, u32)]| -> BTreeSet<u32> {
            let pick = |a: f64, b: f64| if maximize { a.max(b) } else { a.min(b) };
            let best = vals.iter().map(|p| p.0).reduce(pick).unwrap();
            vals.iter().filter(|p| (p.0 - best).abs() <= 1e-12 * (1.0 + best.abs())).map(|p| p.1).collect()
        };
        prop_assert_eq!(argbest(&best_orig), argbest(&best_lin));

        let s = solve_milp(&linear).unwrap();
        let recovered = post.apply(s.objective).unwrap();
        let at = exactlin_core::solve::project(&m, &trace, &s.assignment).unwrap();
        let truth = evaluate(&m.objective, &at, &BTreeMap::new()).unwrap();
        prop_assert!((recovered - truth).abs() <= 1e-12 * (1.0 + truth.abs()));
        prop_assert_eq!(oracle_solve(&m).unwrap().objective, truth);
    }
}

#[test]
fn linear_model_is_left_alone() {
    let m = Model::new(Sense::Maximize, c(3.0) * v("x") + c(2.0) * v("y"))
        .with_var(VarDecl::continuous("x", 0.0, 4.0))
        .with_var(VarDecl::continuous("y", 0.0, 4.0))
        .with_constraint(Constraint::new("r", v("x") + v("y"), Relation::Le, c(5.0)));
    let (linear, trace) = run_fixpoint(&m, fixed(), 0).unwrap();
    assert!(trace.iterations.is_empty());
    assert_eq!(trace.post_solve, None);
    assert_eq!(LinearProblem::from_model(&linear).unwrap(), LinearProblem::from_model(&m).unwrap());
}

#[test]
fn nested_kinds_take_one_iteration_each() {
    let m = Model::new(Sense::Minimize, Expr::abs(v("x") - c(2.0)) - v("b") * v("x") + v("y"))
        .with_var(VarDecl::binary("b"))
        .with_var(VarDecl::continuous("x", -3.0, 3.0))
        .with_var(VarDecl::continuous("y", -3.0, 3.0))
        .with_constraint(Constraint::new("m", Expr::max(vec![v("x"), v("y")]), Relation::Le, c(1.0)));
    let kinds = exactlin_core::applicable_kinds(&m).unwrap();
    for seed in 0..5 {
        for order in [Order::FixedPriority, Order::SeededRandom] {
            let (linear, trace) = run_fixpoint(&m, order, seed).unwrap();
            let seen: BTreeSet<PatternKind> = trace.iterations.iter().map(|i| i.kind).collect();
            assert!(trace.iterations.len() <= 3);
            assert!(kinds.is_subset(&seen));
            assert!(trace.iterations.iter().all(|i| i.instances_replaced >= 1));
            let r = verify_equivalence(&m, &linear, &trace, 1e-9).unwrap();
            assert!(r.osr_pass, "{r:?}");
        }
    }
}
