mod common;

use proptest::prelude::*;
use tmas_core::abstraction::AbstractionSpec;
use tmas_core::io::{
    export_query, export_uppaal, parse_condition, parse_expr, parse_observation, parse_prop,
    parse_system, print_system,
};
use tmas_core::model::{BinOp, CmpOp, Condition, Expr};
use tmas_core::random::{random_mas, random_prop, random_spec, Bounds};
use tmas_core::voting::{abstraction_preset, generate, property, Preset, Property, VotingConfig};
use tmas_core::Error;

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-5i64..6).prop_map(Expr::Lit),
        prop_oneof![Just("a"), Just("b"), Just("A.c"), Just("t[1]")].prop_map(Expr::var),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (
                prop_oneof![
                    Just(BinOp::Add),
                    Just(BinOp::Sub),
                    Just(BinOp::Mul),
                    Just(BinOp::Div),
                    Just(BinOp::Mod),
                    Just(BinOp::Min),
                    Just(BinOp::Max)
                ],
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Expr::bin(op, a, b)),
        ]
    })
}

fn cond_strategy() -> impl Strategy<Value = Condition> {
    let cmp = prop_oneof![
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
        Just(CmpOp::Ge),
        Just(CmpOp::Gt)
    ];
    let leaf = (cmp, expr_strategy(), expr_strategy()).prop_map(|(op, a, b)| Condition::Cmp(op, a, b));
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Condition::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Condition::And),
            prop::collection::vec(inner, 2..4).prop_map(Condition::Or),
        ]
    })
}

/// Printing then parsing normalises `-(literal)` and literal-indexed array
/// accesses, so compare after one round.
fn normal(e: &Expr) -> Expr {
    parse_expr(&e.to_string()).unwrap()
}

proptest! {
    #[test]
    fn expressions_roundtrip(e in expr_strategy()) {
        let once = normal(&e);
        prop_assert_eq!(parse_expr(&once.to_string()).unwrap(), once.clone());
        // same value under an arbitrary environment
        let env: tmas_core::Evaluation = [("a", 2), ("b", -1), ("A.c", 3), ("t[1]", 0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        prop_assert_eq!(e.eval(&env).ok(), once.eval(&env).ok());
    }

    #[test]
    fn conditions_roundtrip(c in cond_strategy()) {
        let once = parse_condition(&c.to_string()).unwrap();
        prop_assert_eq!(parse_condition(&once.to_string()).unwrap(), once.clone());
        let env: tmas_core::Evaluation = [("a", 1), ("b", 0), ("A.c", -2), ("t[1]", 4)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        prop_assert_eq!(c.eval(&env).ok(), once.eval(&env).ok());
    }

    #[test]
    fn random_systems_roundtrip(seed in any::<u64>()) {
        let mg = random_mas(&mut common::rng(seed), &Bounds::default()).unwrap();
        let text = print_system(&mg).unwrap();
        prop_assert_eq!(parse_system(&text).unwrap(), mg);
    }

    #[test]
    fn random_props_roundtrip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let mg = random_mas(&mut rng, &Bounds::default()).unwrap();
        let p = random_prop(&mut rng, &mg, &Default::default());
        let once = parse_prop(&p.to_string()).unwrap();
        prop_assert_eq!(parse_prop(&once.to_string()).unwrap(), once);
    }

    #[test]
    fn random_specs_roundtrip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let mg = random_mas(&mut rng, &Bounds::default()).unwrap();
        if let Some(spec) = random_spec(&mut rng, &mg) {
            let back = AbstractionSpec::from_json(&spec.to_json()).unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}

#[test]
fn voting_models_roundtrip_and_export() {
    for revote in [false, true] {
        let cfg = VotingConfig::faa(2, 2, revote);
        let mg = generate(&cfg).unwrap();
        let text = print_system(&mg).unwrap();
        assert_eq!(parse_system(&text).unwrap(), mg);
        let xml = export_uppaal(&mg).unwrap();
        assert_eq!(xml.matches("<template>").count(), mg.agents.len());
        assert!(xml.contains("clock t;"));
        let q = export_query(&mg, &property(&cfg, Property::Phi1)).unwrap();
        assert!(q.starts_with("A[] ("));
    }
    let cfg = VotingConfig::fpa(1, 1, false);
    let spec = abstraction_preset(&cfg, Preset::A3);
    assert_eq!(AbstractionSpec::parse(&spec.to_json().to_string()).unwrap(), spec);
}

#[test]
fn syntax_errors_carry_positions() {
    let cases = [
        ("system {\n agent A {\n location l0\n edge l0 -> l0 guard: v <\n }\n}", 4),
        ("system {\n agent A {\n var v : 3..1 = 0\n }\n}", 3),
        ("system {\n agent A {\n location l0\n frobnicate\n }\n}", 4),
        ("system {\n agent A {\n location l0\n", 3),
    ];
    for (text, line) in cases {
        match parse_system(text) {
            Err(Error::Syntax { line: l, .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn semantic_errors_after_parsing() {
    let undeclared = "system {\n agent A {\n location l0\n edge l0 -> l1\n }\n}";
    assert!(matches!(parse_system(undeclared), Err(Error::UndeclaredLocation(_))));
    let bad_init = "system {\n agent A {\n var v : 0..1 = 2\n location l0\n }\n}";
    assert!(parse_system(bad_init).is_err());
}

#[test]
fn observation_files() {
    let obs = parse_observation("# frame\nlocations\nvalues sh, V1.vote\nV1@done => V1.np == 0\n").unwrap();
    assert!(obs.locations);
    assert_eq!(obs.values, vec!["sh", "V1.vote"]);
    assert_eq!(obs.props.len(), 1);
}
