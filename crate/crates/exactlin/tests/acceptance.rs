//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the summary is always printed; the
//! process exits non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use exactlin::bench::{run_bench, BenchOptions};
use exactlin::corpus::load_corpus;
use exactlin::gen::{gen_mixed, gen_models, TemplateMix};
use exactlin::parse_model;
use exactlin_core::rewrite::{apply_kind, run_fixpoint_with, AbsBenignForm};
use exactlin_core::solve::{project, LinearProblem};
use exactlin_core::{
    applicable_kinds, detect_patterns, dinkelbach, evaluate, run_fixpoint, solve_lp, solve_milp,
    verify_equivalence, Constraint, Expr, Model, MonoFn, Order, PatternKind, Polarity, Relation,
    RewriteOptions, RewriteTrace, Sense, SolveStatus, VarDecl,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("corpus metrics", corpus_metrics),
        ("binary-binary product", binary_binary_product),
        ("binary-continuous product", binary_continuous_product),
        ("min/max encodings", min_max_encodings),
        ("abs encodings", abs_encodings),
        ("fractional objectives", fractional_objectives),
        ("monotone transformations", monotone_transformations),
        ("fixpoint loop", fixpoint_loop),
        ("solver floor", solver_floor),
        ("robustness", robustness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}; {secs:.2}s)", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({reason})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "non-string panic".into())
}

fn corpus_metrics() -> Outcome {
    let start = Instant::now();
    let entries = load_corpus(&corpus_dir()).map_err(|e| e.to_string())?;
    let report = run_bench(&entries, &BenchOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(entries.len() == 20, || format!("{} corpus files", entries.len()))?;

    let mut counts: BTreeMap<PatternKind, usize> = BTreeMap::new();
    for e in &entries {
        for k in &e.annotation.expected_kinds {
            *counts.entry(*k).or_default() += 1;
        }
    }
    let expected = BTreeMap::from([
        (PatternKind::Bilinear, 6),
        (PatternKind::Min, 3),
        (PatternKind::Max, 4),
        (PatternKind::Abs, 4),
        (PatternKind::LinearFractional, 3),
        (PatternKind::Monotone, 2),
    ]);
    ensure(counts == expected, || format!("kind counts {counts:?}"))?;
    let two_kinds = entries.iter().filter(|e| e.annotation.expected_kinds.len() == 2).count();
    ensure(two_kinds == 2, || format!("{two_kinds} files with two kinds"))?;

    let a = &report.aggregates;
    let failures: Vec<String> =
        report.instances.iter().filter_map(|i| i.error.as_ref().map(|e| format!("{}: {e}", i.id))).collect();
    ensure(a.all_perfect(), || format!("dsr {} rsr {} csr {} osr {}; {failures:?}", a.dsr, a.rsr, a.csr, a.osr))?;
    ensure(elapsed < Duration::from_secs(10), || format!("bench took {elapsed:?}"))?;
    Ok(format!("DSR=RSR=CSR=OSR=100 on 20 instances in {:.0} ms", elapsed.as_secs_f64() * 1e3))
}

fn binary_binary_product() -> Outcome {
    let m = Model::new(Sense::Minimize, v("b1") * v("b2"))
        .with_var(VarDecl::binary("b1"))
        .with_var(VarDecl::binary("b2"));
    let (linear, trace) = run_fixpoint(&m, Order::FixedPriority, 0).map_err(|e| e.to_string())?;
    let w = trace.iterations[0].aux_vars[0].clone();
    ensure(!w.domain.is_integral(), || "product variable declared integral".into())?;
    let mut gap: f64 = 0.0;
    for (b1, b2) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
        let mut l = linear.clone();
        fix(&mut l, "b1", b1);
        fix(&mut l, "b2", b2);
        let lo = extreme(&l, &w.name, Sense::Minimize).ok_or("infeasible assignment")?;
        let hi = extreme(&l, &w.name, Sense::Maximize).ok_or("infeasible assignment")?;
        gap = gap.max((lo - b1 * b2).abs()).max((hi - b1 * b2).abs());
    }
    ensure(gap == 0.0, || format!("gap {gap}"))?;
    Ok("w = b1*b2 uniquely on all 4 assignments, gap 0".into())
}

fn binary_continuous_product() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut gap: f64 = 0.0;
    for _ in 0..50 {
        let lo = rng.gen_range(-20.0..20.0);
        let hi = lo + rng.gen_range(0.1..20.0);
        let m = Model::new(Sense::Minimize, v("b") * v("x"))
            .with_var(VarDecl::binary("b"))
            .with_var(VarDecl::continuous("x", lo, hi));
        let (linear, trace) = run_fixpoint(&m, Order::FixedPriority, 0).map_err(|e| e.to_string())?;
        let z = &trace.iterations[0].aux_vars[0].name;
        for b in [0.0, 1.0] {
            for k in 0..=20 {
                let x = lo + (hi - lo) * k as f64 / 20.0;
                let mut l = linear.clone();
                fix(&mut l, "b", b);
                fix(&mut l, "x", x);
                let zmin = extreme(&l, z, Sense::Minimize).ok_or("infeasible grid point")?;
                let zmax = extreme(&l, z, Sense::Maximize).ok_or("infeasible grid point")?;
                gap = gap.max((zmin - b * x).abs()).max((zmax - b * x).abs());
            }
        }
    }
    ensure(gap <= 1e-9, || format!("gap {gap:e}"))?;
    Ok(format!("50 boxes x 21 points x 2 binaries, max gap {gap:.1e}"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Class {
    Benign,
    Split,
    Adverse,
}

fn min_max_instance(rng: &mut ChaCha8Rng, class: Class) -> Model {
    let n = rng.gen_range(2..=3);
    let args = affine_args(rng, n);
    let exprs: Vec<Expr> = args.iter().map(affine_expr).collect();
    let use_max = rng.gen_bool(0.5);
    let maximize = rng.gen_bool(0.5);
    let atom = if use_max { Expr::max(exprs) } else { Expr::min(exprs) };
    let at = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
    let vals: Vec<f64> = args.iter().map(|a| affine_at(a, at)).collect();
    let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    let slack = rng.gen_range(0.0..3.0);
    let linear = c(rng.gen_range(-3..=3) as f64) * v("x") + c(rng.gen_range(-3..=3) as f64) * v("y");
    let w = c(rng.gen_range(1..=4) as f64);
    let sense = if maximize { Sense::Maximize } else { Sense::Minimize };
    let benign = if use_max != maximize { 1.0 } else { -1.0 };
    match class {
        Class::Benign => xy_model(sense, linear + c(benign) * w * atom),
        Class::Split => {
            let (rel, rhs) = if use_max { (Relation::Le, hi + slack) } else { (Relation::Ge, lo - slack) };
            xy_model(sense, linear).with_constraint(Constraint::new("cap", atom, rel, c(rhs)))
        }
        Class::Adverse if rng.gen_bool(0.5) => xy_model(sense, linear - c(benign) * w * atom),
        Class::Adverse => {
            let (rel, rhs) = if use_max { (Relation::Ge, hi - slack) } else { (Relation::Le, lo + slack) };
            xy_model(sense, linear).with_constraint(Constraint::new("reach", atom, rel, c(rhs)))
        }
    }
}

fn polarities(m: &Model) -> BTreeSet<Polarity> {
    detect_patterns(m).map(|f| f.iter().map(|i| i.polarity).collect()).unwrap_or_default()
}

/// Rewrites, solves and compares with the enumeration oracle; returns the gap.
fn oracle_gap(m: &Model, opts: &RewriteOptions, tol: f64) -> Result<f64, String> {
    let (linear, trace) = run_fixpoint_with(m, Order::FixedPriority, 0, opts).map_err(|e| e.to_string())?;
    let r = verify_equivalence(m, &linear, &trace, tol).map_err(|e| e.to_string())?;
    ensure(r.oracle_status == SolveStatus::Optimal, || format!("oracle status {:?}", r.oracle_status))?;
    ensure(r.osr_pass, || format!("oracle {} vs recovered {} (feasible {})", r.oracle_obj, r.recovered_obj, r.projected_feasible))?;
    Ok(r.abs_gap)
}

fn min_max_encodings() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut gap: f64 = 0.0;
    for (class, pol) in [
        (Class::Benign, Polarity::Benign),
        (Class::Split, Polarity::ConstraintSplit),
        (Class::Adverse, Polarity::Adverse),
    ] {
        for i in 0..100 {
            let m = min_max_instance(&mut rng, class);
            let found = polarities(&m);
            ensure(found == BTreeSet::from([pol]), || format!("{class:?} #{i}: detected {found:?}"))?;
            gap = gap.max(oracle_gap(&m, &RewriteOptions::default(), 1e-8).map_err(|e| format!("{class:?} #{i}: {e}"))?);
        }
    }
    Ok(format!("3 polarity classes x 100 instances, max gap {gap:.1e}"))
}

fn abs_encodings() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut gap: f64 = 0.0;
    for i in 0..100 {
        let t = affine_args(&mut rng, 1).remove(0);
        let at = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        let linear = c(rng.gen_range(-3..=3) as f64) * v("x") + c(rng.gen_range(-3..=3) as f64) * v("y");
        let w = c(rng.gen_range(1..=4) as f64);
        let abs = Expr::abs(affine_expr(&t));
        let benign = xy_model(Sense::Minimize, linear.clone() + w.clone() * abs.clone());
        let adverse = xy_model(Sense::Minimize, linear.clone() - w * abs.clone());
        let equality = xy_model(Sense::Minimize, linear)
            .with_constraint(Constraint::new("dev", abs, Relation::Eq, c(affine_at(&t, at).abs())));
        ensure(polarities(&adverse) == BTreeSet::from([Polarity::Adverse]), || format!("#{i}: adverse not detected"))?;
        for form in [AbsBenignForm::TwoInequalities, AbsBenignForm::PosNegParts] {
            gap = gap.max(oracle_gap(&benign, &RewriteOptions { abs_benign: form }, 1e-8).map_err(|e| format!("#{i} {form:?}: {e}"))?);
        }
        gap = gap.max(oracle_gap(&adverse, &RewriteOptions::default(), 1e-8).map_err(|e| format!("#{i} adverse: {e}"))?);
        gap = gap.max(oracle_gap(&equality, &RewriteOptions::default(), 1e-8).map_err(|e| format!("#{i} equality: {e}"))?);
    }
    Ok(format!("100 instances x (2 objective forms, adverse, equality), max gap {gap:.1e}"))
}

fn random_fractional(rng: &mut ChaCha8Rng) -> Model {
    let names = ["x0", "x1", "x2"];
    let lin = |k: &[f64]| Expr::Sum((0..3).map(|j| c(k[j]) * v(names[j])).collect());
    let mut num: Vec<f64> = (0..3).map(|_| rng.gen_range(-5..=5) as f64).collect();
    if num.iter().all(|k| *k == 0.0) {
        num[0] = 1.0;
    }
    let mut den: Vec<f64> = (0..3).map(|_| rng.gen_range(0..=4) as f64).collect();
    if den.iter().all(|k| *k == 0.0) {
        den[rng.gen_range(0..3)] = 1.0;
    }
    let offset = rng.gen_range(0.01..3.0);
    let sense = if rng.gen_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let objective = Expr::quot(lin(&num) + c(rng.gen_range(-3..=3) as f64), lin(&den) + c(offset));
    let mut m = Model::new(sense, objective);
    for n in names {
        m = m.with_var(VarDecl::continuous(n, 0.0, 5.0));
    }
    let at: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..5.0)).collect();
    for i in 0..4 {
        let row: Vec<f64> = (0..3).map(|_| rng.gen_range(-3..=3) as f64).collect();
        let value: f64 = row.iter().zip(&at).map(|(a, x)| a * x).sum();
        let (rel, rhs) = if rng.gen_bool(0.5) { (Relation::Le, value + 1.0) } else { (Relation::Ge, value - 1.0) };
        m = m.with_constraint(Constraint::new(format!("r{i}"), lin(&row), rel, c(rhs)));
    }
    m
}

fn fractional_objectives() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut gap: f64 = 0.0;
    for i in 0..60 {
        let m = random_fractional(&mut rng);
        let reference = dinkelbach(&m).map_err(|e| format!("#{i}: {e}"))?;
        ensure(reference.is_optimal(), || format!("#{i}: reference {:?}", reference.status))?;
        let (linear, trace) = run_fixpoint(&m, Order::FixedPriority, 0).map_err(|e| format!("#{i}: {e}"))?;
        ensure(trace.recovery.is_some(), || format!("#{i}: no scaling recorded"))?;
        let s = solve_milp(&linear).map_err(|e| e.to_string())?;
        ensure(s.is_optimal(), || format!("#{i}: rewritten {:?}", s.status))?;
        let point = project(&m, &trace, &s.assignment).map_err(|e| e.to_string())?;
        let at_point = evaluate(&m.objective, &point, &BTreeMap::new()).map_err(|e| e.to_string())?;
        gap = gap.max((s.objective - reference.objective).abs()).max((at_point - reference.objective).abs());
    }
    ensure(gap <= 1e-6, || format!("gap {gap:e}"))?;

    // Cross-multiplying u = n/d into u*d = n and dropping the u*y product.
    let original = Model::new(Sense::Minimize, Expr::quot(v("x") + c(1.0), v("y") + c(1.0)))
        .with_var(VarDecl::continuous("x", 0.0, 4.0))
        .with_var(VarDecl::continuous("y", 0.0, 4.0))
        .with_constraint(Constraint::new("need", v("x") + v("y"), Relation::Ge, c(2.0)));
    let (linear, trace) = run_fixpoint(&original, Order::FixedPriority, 0).map_err(|e| e.to_string())?;
    let sound = verify_equivalence(&original, &linear, &trace, 1e-6).map_err(|e| e.to_string())?;
    ensure(sound.osr_pass, || "unmutated pipeline failed".into())?;
    let mutant = Model::new(Sense::Minimize, v("u"))
        .with_var(VarDecl::continuous("x", 0.0, 4.0))
        .with_var(VarDecl::continuous("y", 0.0, 4.0))
        .with_var(VarDecl::continuous("u", -100.0, 100.0))
        .with_constraint(Constraint::new("need", v("x") + v("y"), Relation::Ge, c(2.0)))
        .with_constraint(Constraint::new("cross", v("u"), Relation::Eq, v("x") + c(1.0)));
    let r = verify_equivalence(&original, &mutant, &RewriteTrace::default(), 1e-6).map_err(|e| e.to_string())?;
    ensure(!r.osr_pass, || "cross-multiplication mutant passed verification".into())?;
    Ok(format!("60 instances, max gap {gap:.1e}; mutant rejected (oracle {} vs {})", r.oracle_obj, r.recovered_obj))
}

fn monotone_instance(rng: &mut ChaCha8Rng) -> (Model, Vec<String>, MonoFn) {
    let n = rng.gen_range(2..=8);
    let names: Vec<String> = (0..n).map(|j| format!("b{j}")).collect();
    let mut k: Vec<f64> = (0..n).map(|_| rng.gen_range(-2..=5) as f64 * 0.25).collect();
    if k.iter().all(|x| *x == 0.0) {
        k[0] = 0.5;
    }
    let negative: f64 = k.iter().filter(|x| **x < 0.0).sum();
    let offset = 1.0 - negative + rng.gen_range(0..=3) as f64;
    let g = Expr::Sum(names.iter().zip(&k).map(|(nm, kk)| c(*kk) * v(nm)).chain([c(offset)]).collect());
    let func = *[MonoFn::Exp, MonoFn::Log, MonoFn::Sqrt].choose(rng).unwrap();
    let sense = if rng.gen_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let mut m = Model::new(sense, Expr::mono(func, g));
    for nm in &names {
        m = m.with_var(VarDecl::binary(nm.as_str()));
    }
    let point: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=1) as f64).collect();
    for i in 0..rng.gen_range(1..=2) {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
        let rhs: f64 = row.iter().zip(&point).map(|(a, x)| a * x).sum();
        let lhs = Expr::Sum(names.iter().zip(&row).map(|(nm, a)| c(*a) * v(nm)).collect());
        m = m.with_constraint(Constraint::new(format!("r{i}"), lhs, Relation::Le, c(rhs)));
    }
    (m, names, func)
}

fn monotone_transformations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mutants_caught = 0;
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let (m, names, func) = monotone_instance(&mut rng);
        let (linear, trace) = run_fixpoint(&m, Order::FixedPriority, 0).map_err(|e| format!("#{i}: {e}"))?;
        let post = trace.post_solve.ok_or_else(|| format!("#{i}: no post-solve map"))?;
        ensure(post.func == func, || format!("#{i}: recorded {}", post.func))?;

        let lp = LinearProblem::from_model(&linear).map_err(|e| e.to_string())?;
        let mut orig: Vec<(f64, u32)> = Vec::new();
        let mut lin: Vec<(f64, u32)> = Vec::new();
        for mask in 0u32..(1 << names.len()) {
            let point: BTreeMap<String, f64> =
                names.iter().enumerate().map(|(j, s)| (s.clone(), ((mask >> j) & 1) as f64)).collect();
            if exactlin_core::solve::max_violation(&m, &point).map_err(|e| e.to_string())? > 0.0 {
                continue;
            }
            orig.push((evaluate(&m.objective, &point, &BTreeMap::new()).map_err(|e| e.to_string())?, mask));
            let x: Vec<f64> = lp.names.iter().map(|s| point[s]).collect();
            lin.push((lp.objective_at(&x), mask));
        }
        let argbest = |vals: &[(f64, u32)]| -> BTreeSet<u32> {
            let best = vals.iter().map(|p| p.0).reduce(|a, b| if better(m.sense, a, b) { a } else { b }).unwrap();
            vals.iter().filter(|p| p.0 == best).map(|p| p.1).collect()
        };
        ensure(argbest(&orig) == argbest(&lin), || format!("#{i}: argmin sets differ"))?;

        let s = solve_milp(&linear).map_err(|e| e.to_string())?;
        let recovered = post.apply(s.objective).ok_or("post-solve undefined")?;
        let point = project(&m, &trace, &s.assignment).map_err(|e| e.to_string())?;
        let truth = evaluate(&m.objective, &point, &BTreeMap::new()).map_err(|e| e.to_string())?;
        let err = (recovered - truth).abs() / (1.0 + truth.abs());
        worst = worst.max(err);
        ensure(err <= 1e-12, || format!("#{i}: recovered {recovered} vs {truth}"))?;

        let skipped = RewriteTrace { post_solve: None, ..trace.clone() };
        let r = verify_equivalence(&m, &linear, &skipped, 1e-4).map_err(|e| e.to_string())?;
        if (truth - s.objective).abs() > 1e-4 {
            ensure(!r.osr_pass, || format!("#{i}: skipping post-solve went unnoticed"))?;
            mutants_caught += 1;
        }
    }
    ensure(mutants_caught >= 50, || format!("only {mutants_caught} informative mutants"))?;
    Ok(format!(
        "100 all-binary instances, identical argmin sets, recovery error {worst:.1e}; {mutants_caught} skip-post-solve mutants rejected"
    ))
}

/// Replays the trace step by step and checks that every step removes instances.
fn check_trace(id: &str, m: &Model) -> Result<(), String> {
    let kinds = applicable_kinds(m).map_err(|e| format!("{id}: {e}"))?;
    let (linear, trace) = run_fixpoint(m, Order::FixedPriority, 0).map_err(|e| format!("{id}: {e}"))?;
    let t = trace.iterations.len();
    ensure(t <= kinds.len() && kinds.len() <= 6, || format!("{id}: T = {t} with {} kinds", kinds.len()))?;
    let mut current = m.normalized().map_err(|e| e.to_string())?;
    for it in &trace.iterations {
        let found = detect_patterns(&current).map_err(|e| e.to_string())?;
        let chosen: Vec<_> = found.iter().filter(|i| i.kind == it.kind).cloned().collect();
        let step = apply_kind(&current, it.kind, &chosen, &RewriteOptions::default()).map_err(|e| e.to_string())?;
        let after = detect_patterns(&step.model).map_err(|e| e.to_string())?.len();
        ensure(after < found.len() && step.instances_replaced >= 1, || {
            format!("{id}: iteration {} left {after} of {} instances", it.t, found.len())
        })?;
        current = step.model;
    }
    ensure(detect_patterns(&current).map_err(|e| e.to_string())?.is_empty(), || format!("{id}: patterns remain"))?;
    let same = LinearProblem::from_model(&current).ok() == LinearProblem::from_model(&linear).ok();
    ensure(same, || format!("{id}: replay differs from the driver"))
}

fn fixpoint_loop() -> Outcome {
    let entries = load_corpus(&corpus_dir()).map_err(|e| e.to_string())?;
    for e in &entries {
        check_trace(&e.id, &e.model)?;
    }
    for (i, (m, _)) in gen_mixed(8, 200).iter().enumerate() {
        check_trace(&format!("generated #{i}"), m)?;
    }
    let linear = gen_models(9, 50, &TemplateMix::linear()).map_err(|e| e.to_string())?;
    for (i, (m, _)) in linear.iter().enumerate() {
        let (out, trace) = run_fixpoint(m, Order::FixedPriority, 0).map_err(|e| e.to_string())?;
        ensure(trace.iterations.is_empty(), || format!("linear #{i}: T = {}", trace.iterations.len()))?;
        let same = LinearProblem::from_model(&out).ok() == LinearProblem::from_model(m).ok();
        ensure(same, || format!("linear #{i} changed"))?;
    }
    Ok(format!("{} corpus + 200 generated traces strictly eliminating; 50 linear inputs unchanged with T = 0", entries.len()))
}

fn solver_floor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut gap: f64 = 0.0;
    let mut lp_feasible = 0;
    for i in 0..200 {
        let lp = DenseLp::random(&mut rng, 3, false);
        let s = solve_lp(&lp.model(false)).map_err(|e| e.to_string())?;
        match lp.vertex_optimum() {
            Some(best) => {
                lp_feasible += 1;
                ensure(s.is_optimal(), || format!("LP #{i}: {:?}, vertex optimum {best}", s.status))?;
                gap = gap.max((s.objective - best).abs());
            }
            None => ensure(s.status == SolveStatus::Infeasible, || format!("LP #{i}: {:?} on an empty region", s.status))?,
        }
    }
    ensure(gap <= 1e-8, || format!("LP gap {gap:e}"))?;
    let mut milp_feasible = 0;
    for i in 0..300 {
        let n = rng.gen_range(1..=12);
        let p = DenseLp::random(&mut rng, n, true);
        let s = solve_milp(&p.model(true)).map_err(|e| e.to_string())?;
        match p.enumerated_optimum() {
            Some(best) => {
                milp_feasible += 1;
                ensure(s.is_optimal() && s.objective == best, || format!("MILP #{i}: {:?} {} vs {best}", s.status, s.objective))?;
            }
            None => ensure(s.status == SolveStatus::Infeasible, || format!("MILP #{i}: {:?} on an empty set", s.status))?,
        }
    }
    Ok(format!(
        "200 LPs ({lp_feasible} feasible) max gap {gap:.1e}; 300 binary programs ({milp_feasible} feasible) exact"
    ))
}

fn fuzz_input(rng: &mut ChaCha8Rng, seeds: &[String], i: usize) -> String {
    const TOKENS: &[&str] = &[
        "var", "param", "binary", "integer", "continuous", "minimize:", "maximize:", "s.t.", "x", "y", "b",
        "p", "c1:", "abs", "min", "max", "exp", "log", "sqrt", "(", ")", "[", "]", ",", "+", "-", "*", "/",
        "<=", ">=", "=", "inf", "-inf", "1", "0.5", "1e308", "1e400", "-3", "#", "\n", " ", ":", ";", "@",
    ];
    if i % 1000 == 999 {
        let unit: &str = ["(", "x + ", "-", "abs(", "é", "1e9*"][i / 1000 % 6];
        return unit.repeat((1 << 20) / unit.len());
    }
    match i % 3 {
        0 => {
            let len = rng.gen_range(0..512);
            (0..len).map(|_| rng.gen_range(0u8..=127) as char).collect()
        }
        1 => {
            let len = rng.gen_range(0..200);
            (0..len).map(|_| *TOKENS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
        }
        _ => {
            let mut bytes = seeds.choose(rng).unwrap().clone().into_bytes();
            for _ in 0..rng.gen_range(1..8) {
                if bytes.is_empty() {
                    break;
                }
                let at = rng.gen_range(0..bytes.len());
                match rng.gen_range(0..3) {
                    0 => bytes[at] = rng.gen_range(32u8..127),
                    1 => {
                        bytes.remove(at);
                    }
                    _ => bytes.truncate(at),
                }
            }
            String::from_utf8_lossy(&bytes).into_owned()
        }
    }
}

fn robustness() -> Outcome {
    let seeds: Vec<String> = std::fs::read_dir(corpus_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "nlm"))
        .map(|p| std::fs::read_to_string(p).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let previous = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut crashes = Vec::new();
    let mut accepted = 0;
    for i in 0..10_000 {
        let input = fuzz_input(&mut rng, &seeds, i);
        assert!(input.len() <= 1 << 20);
        match panic::catch_unwind(|| parse_model(&input).is_ok()) {
            Ok(ok) => accepted += ok as usize,
            Err(_) => crashes.push(i),
        }
    }
    panic::set_hook(previous);
    ensure(crashes.is_empty(), || format!("parser panicked on inputs {crashes:?}"))?;

    let linear = gen_models(12, 500, &TemplateMix::linear()).map_err(|e| e.to_string())?;
    let mut flagged = 0;
    for (m, _) in &linear {
        flagged += detect_patterns(m).map_err(|e| e.to_string())?.len();
    }
    ensure(flagged == 0, || format!("{flagged} false positives on pattern-free models"))?;
    let text = "param p = 3\nparam q = 2\nvar x continuous [0, 4]\nvar b binary\n\
                minimize: p * x + q * p * b + x * p\ns.t. c: p * x <= q * 4";
    let parsed = parse_model(text).map_err(|d| format!("{d:?}"))?;
    ensure(detect_patterns(&parsed.model).map_err(|e| e.to_string())?.is_empty(), || "parameter product flagged".into())?;
    Ok(format!("10^4 parser inputs without a crash ({accepted} accepted); 0 false positives on 500 pattern-free models"))
}
