use exactlin::{check_round_trip, emit_lp, parse_model, read_lp, to_nlm};
use exactlin_core::solve::LinearProblem;
use exactlin_core::{Constraint, Expr, Model, Relation, Sense, VarDecl};
use proptest::prelude::*;

fn var_decl(j: usize) -> impl Strategy<Value = VarDecl> {
    let name = format!("v{j}");
    prop_oneof![
        Just(VarDecl::binary(name.clone())),
        (-50i32..50, 0i32..20).prop_map({
            let name = name.clone();
            move |(l, w)| VarDecl::integer(name.clone(), l as f64, (l + w) as f64)
        }),
        (-1e3f64..1e3, 1e-3f64..1e3).prop_map({
            let name = name.clone();
            move |(l, w)| VarDecl::continuous(name.clone(), l, l + w)
        }),
        Just(VarDecl::continuous(name.clone(), f64::NEG_INFINITY, f64::INFINITY)),
        (-10f64..10.0).prop_map(move |l| VarDecl::continuous(name.clone(), l, f64::INFINITY)),
    ]
}

fn affine(coeffs: &[f64]) -> Expr {
    Expr::Sum(coeffs.iter().enumerate().map(|(j, &c)| Expr::Const(c) * Expr::var(format!("v{j}"))).collect())
}

fn linear_model() -> impl Strategy<Value = Model> {
    (1usize..6).prop_flat_map(|n| {
        let vars: Vec<_> = (0..n).map(var_decl).collect();
        let coeff = prop_oneof![Just(0.0), -1e4f64..1e4, (-9i32..=9).prop_map(f64::from)];
        let rel = prop_oneof![Just(Relation::Le), Just(Relation::Ge), Just(Relation::Eq)];
        let rows = prop::collection::vec((prop::collection::vec(coeff.clone(), n), rel, -1e5f64..1e5), 0..5);
        let sense = prop_oneof![Just(Sense::Minimize), Just(Sense::Maximize)];
        (sense, prop::collection::vec(coeff, n), -100f64..100.0, vars, rows).prop_map(
            |(sense, cost, offset, vars, rows)| {
                let mut m = Model::new(sense, affine(&cost) + Expr::Const(offset));
                for v in vars {
                    m = m.with_var(v);
                }
                for (i, (a, rel, b)) in rows.into_iter().enumerate() {
                    m = m.with_constraint(Constraint::new(format!("r{i}"), affine(&a), rel, Expr::Const(b)));
                }
                m
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn lp_text_round_trips(m in linear_model()) {
        prop_assert_eq!(check_round_trip(&m), Ok(()));
        let once = emit_lp(&read_lp(&emit_lp(&m).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(emit_lp(&read_lp(&once).unwrap()).unwrap(), once);
    }

    #[test]
    fn nlm_text_round_trips(m in linear_model()) {
        let text = to_nlm(&m);
        let back = parse_model(&text).map_err(|d| TestCaseError::fail(format!("{d:?}\n{text}")))?.model;
        prop_assert_eq!(LinearProblem::from_model(&back).unwrap(), LinearProblem::from_model(&m).unwrap());
        prop_assert_eq!(to_nlm(&back), to_nlm(&parse_model(&to_nlm(&back)).unwrap().model));
    }
}
