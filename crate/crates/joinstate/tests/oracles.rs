mod common;

use common::{arb_type, multiset, table};
use joinstate::oracle::{oracle_live, oracle_subtype, LiveVerdict, OracleVerdict};
use joinstate::semilinear::{live, SubtypeEngine, Verdict};
use joinstate::types::{enumerate_configurations, Tag, TypeExpr};
use proptest::prelude::*;
use std::collections::BTreeMap;

const SIZE: usize = 6;

fn arb_patterns() -> impl Strategy<Value = Vec<BTreeMap<Tag, usize>>> {
    let pattern = proptest::sample::subsequence(vec!["a", "a", "b", "c", "m", "m"], 1..=3).prop_map(|ts| multiset(&ts));
    proptest::collection::vec(pattern, 0..3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn engine_agrees_with_oracle(t in arb_type(), s in arb_type()) {
        let table = table();
        let verdict = SubtypeEngine::new(&table, 4).subtype(&t, &s);
        let oracle = oracle_subtype(&t, &s, SIZE, &table);
        match (&verdict, &oracle) {
            (Verdict::No(c), OracleVerdict::Holds(_)) => {
                // a counterexample beyond the oracle's reach is acceptable
                prop_assert!(c.size() > SIZE, "engine refutes {} ≤ {} with {} but the oracle finds none", t, s, c);
            }
            (Verdict::Yes | Verdict::YesBounded(_), OracleVerdict::Counterexample(c)) => {
                prop_assert!(false, "engine accepts {} ≤ {} but {} is a counterexample", t, s, c);
            }
            _ => {}
        }
    }

    #[test]
    fn engine_agrees_on_related_pairs(t in arb_type(), r in arb_type()) {
        let table = table();
        let pairs = [
            (TypeExpr::Sum(vec![t.clone(), r.clone()]), t.clone()),
            (t.clone(), TypeExpr::Sum(vec![t.clone(), r.clone()])),
            (TypeExpr::star(t.clone()), TypeExpr::Prod(vec![t.clone(), t.clone()])),
            (TypeExpr::Prod(vec![t.clone(), TypeExpr::star(r.clone())]), t.clone()),
        ];
        for (a, b) in pairs {
            let verdict = SubtypeEngine::new(&table, 4).subtype(&a, &b);
            let oracle = oracle_subtype(&a, &b, SIZE, &table);
            prop_assert!(
                verdict.holds() == oracle.holds() || matches!(&verdict, Verdict::No(c) if c.size() > SIZE),
                "{} ≤ {}: engine {:?}, oracle {:?}", a, b, verdict, oracle
            );
        }
    }

    #[test]
    fn engine_counterexamples_are_genuine(t in arb_type(), s in arb_type()) {
        let table = table();
        if let Verdict::No(c) = SubtypeEngine::new(&table, 4).subtype(&t, &s) {
            prop_assert!(enumerate_configurations(&s, c.size(), &table).contains(&c), "{} ∉ ⟦{}⟧", c, s);
        }
    }

    #[test]
    fn liveness_agrees_with_oracle(t in arb_type(), patterns in arb_patterns()) {
        let table = table();
        let fast = live(&t, &patterns, &table);
        match oracle_live(&t, &patterns, SIZE, &table) {
            LiveVerdict::Violation(a) => prop_assert!(!fast, "{} is junk in {} under {:?}", a, t, patterns),
            LiveVerdict::NoViolation(_) => prop_assert!(fast, "{} reported not live under {:?}", t, patterns),
        }
    }
}
