#![allow(dead_code, unused_imports)]

use std::collections::BTreeMap;

use joinstate::deps::DependencyRelation;
use joinstate::types::{Tag, TypeExpr};
use proptest::prelude::*;

pub use joinstate::oracle::generator_table as table;

pub const CORPUS: &[(&str, &str)] = &[
    ("future_deadlock", include_str!("../../examples/future_deadlock.cob")),
    ("future_ok", include_str!("../../examples/future_ok.cob")),
    ("missing_b", include_str!("../../examples/missing_b.cob")),
    ("extra_b", include_str!("../../examples/extra_b.cob")),
    ("mutual", include_str!("../../examples/mutual.cob")),
    ("self_dep", include_str!("../../examples/self_dep.cob")),
    ("dup_arg", include_str!("../../examples/dup_arg.cob")),
    ("cd_dup", include_str!("../../examples/cd_dup.cob")),
    ("sync_deadlock", include_str!("../../examples/sync_deadlock.cob")),
    ("sync_fixed", include_str!("../../examples/sync_fixed.cob")),
    ("pi", include_str!("../../examples/pi.cob")),
    ("sieve", include_str!("../../examples/sieve.cob")),
];

pub const ACCEPTED: &[&str] = &["future_ok", "sync_fixed", "pi", "sieve"];

pub fn source(name: &str) -> &'static str {
    CORPUS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s).expect("corpus entry")
}

pub const TAGS: &[&str] = &["a", "b", "c", "m"];

fn arg() -> impl Strategy<Value = TypeExpr> {
    prop_oneof![
        Just(TypeExpr::number()),
        Just(TypeExpr::One),
        Just(TypeExpr::atom("x")),
        Just(TypeExpr::sum([TypeExpr::atom("x"), TypeExpr::One])),
        Just(TypeExpr::Ref("#Reply".into())),
        Just(TypeExpr::Ref("#Stream".into())),
    ]
}

/// Types over `a`, `b`, `c` and `m(…)`, with arguments drawn from a small
/// pool that includes recursive named types.
pub fn arb_type() -> impl Strategy<Value = TypeExpr> {
    let leaf = prop_oneof![
        1 => Just(TypeExpr::Zero),
        2 => Just(TypeExpr::One),
        3 => Just(TypeExpr::atom("a")),
        3 => Just(TypeExpr::atom("b")),
        2 => Just(TypeExpr::atom("c")),
        2 => arg().prop_map(|a| TypeExpr::msg("m", vec![a])),
    ];
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TypeExpr::Sum(vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TypeExpr::Prod(vec![a, b])),
            inner.prop_map(TypeExpr::star),
        ]
    })
}

pub fn arb_tag() -> impl Strategy<Value = &'static str> {
    proptest::sample::select(TAGS)
}

/// A dependency relation over names `0..8`, built from the pairs that can
/// be joined without conflict.
pub fn arb_deps() -> impl Strategy<Value = DependencyRelation<u8>> {
    proptest::collection::vec((0u8..8, 0u8..8), 0..6).prop_map(|pairs| {
        let mut d = DependencyRelation::empty();
        for (u, v) in pairs {
            if let Ok(p) = DependencyRelation::pair(u, v) {
                if let Ok(j) = d.join(&p) {
                    d = j;
                }
            }
        }
        d
    })
}

pub fn multiset(tags: &[&str]) -> BTreeMap<Tag, usize> {
    let mut out = BTreeMap::new();
    for t in tags {
        *out.entry(t.to_string()).or_default() += 1;
    }
    out
}
