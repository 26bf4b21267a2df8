mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{arb_deps, arb_tag, arb_type, table};
use joinstate::semilinear::{parikh, subtype};
use joinstate::types::{
    derivative, enumerate_configurations, normalize, nullable, relevant, usable, Configuration, Tag, TypeExpr,
};
use proptest::prelude::*;

fn tag_sets(cs: &BTreeSet<Configuration>) -> BTreeSet<BTreeMap<Tag, usize>> {
    cs.iter().map(Configuration::tags).collect()
}

fn leaves(t: &TypeExpr) -> usize {
    match t {
        TypeExpr::Msg(..) => 1,
        TypeExpr::Sum(ts) | TypeExpr::Prod(ts) => ts.iter().map(leaves).sum(),
        TypeExpr::Star(b) => leaves(b),
        _ => 0,
    }
}

fn holds(t: &TypeExpr, s: &TypeExpr) -> bool {
    subtype(t, s, &table()).holds()
}

fn equiv(t: &TypeExpr, s: &TypeExpr) -> bool {
    holds(t, s) && holds(s, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalize_is_idempotent_and_sound(t in arb_type()) {
        let table = table();
        let n = normalize(&t);
        prop_assert_eq!(normalize(&n), n.clone());
        prop_assert_eq!(enumerate_configurations(&t, 4, &table), enumerate_configurations(&n, 4, &table));
    }

    #[test]
    fn predicates_match_enumeration(t in arb_type()) {
        let table = table();
        let empty = enumerate_configurations(&t, 0, &table).contains(&Configuration::empty());
        prop_assert_eq!(nullable(&t, &table), empty);
        prop_assert_eq!(relevant(&t, &table), !empty);
        prop_assert_eq!(usable(&t, &table), !enumerate_configurations(&t, leaves(&t), &table).is_empty());
    }

    #[test]
    fn derivative_removes_one_message(t in arb_type(), m in arb_tag()) {
        let table = table();
        let n = 3;
        let after = tag_sets(&enumerate_configurations(&derivative(&t, m, &table), n, &table));
        let before: BTreeSet<_> = tag_sets(&enumerate_configurations(&t, n + 1, &table))
            .into_iter()
            .filter_map(|mut a| {
                let k = a.get_mut(m)?;
                *k -= 1;
                if *k == 0 { a.remove(m); }
                Some(a)
            })
            .filter(|a| a.values().sum::<usize>() <= n)
            .collect();
        prop_assert_eq!(after, before);
    }

    #[test]
    fn derivatives_commute(t in arb_type(), m1 in arb_tag(), m2 in arb_tag()) {
        let table = table();
        let a = derivative(&derivative(&t, m1, &table), m2, &table);
        let b = derivative(&derivative(&t, m2, &table), m1, &table);
        prop_assert_eq!(enumerate_configurations(&a, 4, &table), enumerate_configurations(&b, 4, &table));
    }

    #[test]
    fn derivative_is_monotone(t in arb_type(), r in arb_type(), m in arb_tag()) {
        let table = table();
        let big = TypeExpr::Sum(vec![t.clone(), r]);
        if subtype(&big, &t, &table).is_exact_yes() {
            let v = subtype(&derivative(&big, m, &table), &derivative(&t, m, &table), &table);
            prop_assert!(v.holds(), "{} {:?}", m, v);
        }
    }

    #[test]
    fn subtyping_laws(t in arb_type(), s in arb_type(), r in arb_type()) {
        let star = TypeExpr::star(t.clone());
        prop_assert!(holds(&star, &TypeExpr::Prod(vec![star.clone(), star.clone()])));
        prop_assert!(holds(&star, &t));
        prop_assert!(equiv(&TypeExpr::Sum(vec![t.clone(), s.clone()]), &TypeExpr::Sum(vec![s.clone(), t.clone()])));
        prop_assert!(equiv(&TypeExpr::Prod(vec![t.clone(), s.clone()]), &TypeExpr::Prod(vec![s.clone(), t.clone()])));
        prop_assert!(equiv(&TypeExpr::Sum(vec![t.clone(), t.clone()]), &t));
        prop_assert!(equiv(&TypeExpr::Sum(vec![t.clone(), TypeExpr::Zero]), &t));
        prop_assert!(equiv(&TypeExpr::Prod(vec![t.clone(), TypeExpr::One]), &t));
        prop_assert!(equiv(&TypeExpr::Prod(vec![t.clone(), TypeExpr::Zero]), &TypeExpr::Zero));
        prop_assert!(equiv(
            &TypeExpr::Prod(vec![TypeExpr::Prod(vec![t.clone(), s.clone()]), r.clone()]),
            &TypeExpr::Prod(vec![t.clone(), TypeExpr::Prod(vec![s.clone(), r.clone()])]),
        ));
        prop_assert!(equiv(
            &TypeExpr::Prod(vec![t.clone(), TypeExpr::Sum(vec![s.clone(), r.clone()])]),
            &TypeExpr::Sum(vec![TypeExpr::Prod(vec![t.clone(), s.clone()]), TypeExpr::Prod(vec![t, r])]),
        ));
    }

    #[test]
    fn precongruence(t in arb_type(), s in arb_type(), r in arb_type()) {
        let sub = TypeExpr::Sum(vec![t.clone(), s]);
        prop_assert!(holds(&sub, &t));
        prop_assert!(holds(&TypeExpr::Prod(vec![sub.clone(), r.clone()]), &TypeExpr::Prod(vec![t.clone(), r.clone()])));
        prop_assert!(holds(&TypeExpr::Sum(vec![sub.clone(), r.clone()]), &TypeExpr::Sum(vec![t.clone(), r])));
        prop_assert!(holds(&TypeExpr::star(sub), &TypeExpr::star(t.clone())));
        prop_assert!(holds(&TypeExpr::msg("m", vec![t.clone()]), &TypeExpr::msg("m", vec![TypeExpr::Sum(vec![t, TypeExpr::atom("z")])])));
    }

    #[test]
    fn parikh_agrees_with_enumeration(t in arb_type()) {
        let table = table();
        let (alpha, set) = parikh(&t, &table);
        let configs = enumerate_configurations(&t, 5, &table);
        for c in &configs {
            let v = alpha.vector(c).expect("slots cover every message");
            prop_assert!(set.member(&v).unwrap(), "{} missing", c);
        }
        let mut v = vec![0u32; alpha.len()];
        let mut ok = true;
        vectors(&mut v, 0, 5, &mut |v| {
            if set.member(v).unwrap() != configs.contains(&alpha.configuration(v)) {
                ok = false;
            }
        });
        prop_assert!(ok);
    }

    #[test]
    fn join_is_associative_and_commutative(d1 in arb_deps(), d2 in arb_deps(), d3 in arb_deps()) {
        let left = d1.join(&d2).and_then(|d| d.join(&d3)).ok();
        let right = d2.join(&d3).and_then(|d| d1.join(&d)).ok();
        prop_assert_eq!(left, right);
        prop_assert_eq!(d1.join(&d2).ok(), d2.join(&d1).ok());
        prop_assert_eq!(d1.join(&Default::default()).ok(), Some(d1.clone()));
    }

    #[test]
    fn restriction_and_compatibility(d1 in arb_deps(), d2 in arb_deps(), a in 0u8..8) {
        if !d2.domain().contains(&a) {
            prop_assert_eq!(d1.compatible(&d2), d1.restrict(&a).compatible(&d2));
        }
    }

    #[test]
    fn blocks_are_cliques(d in arb_deps()) {
        for b in d.blocks() {
            for u in b {
                for v in b {
                    prop_assert_eq!(d.related(u, v), u != v);
                }
            }
        }
    }
}

/// Every vector with entries summing to at most `budget`.
fn vectors(v: &mut Vec<u32>, i: usize, budget: u32, f: &mut dyn FnMut(&[u32])) {
    if i == v.len() {
        f(v);
        return;
    }
    for k in 0..=budget {
        v[i] = k;
        vectors(v, i + 1, budget - k, f);
    }
    v[i] = 0;
}
