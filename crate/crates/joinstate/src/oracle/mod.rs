//! Brute-force oracles over enumerated configurations, random type
//! generation, and schedule fuzzing.

mod fuzz;

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use fuzz::{fuzz_schedules, FuzzConfig, FuzzSummary};

use crate::types::{enumerate_configurations, normalize, Configuration, MsgType, Tag, TypeExpr, TypeTable};

/// Argument recursion budget of [`oracle_subtype`].
pub const ARG_DEPTH: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    /// No counterexample among configurations of at most this size.
    Holds(usize),
    /// A valid configuration of the supertype with no matching one in the
    /// subtype.
    Counterexample(Configuration),
}

impl OracleVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, OracleVerdict::Holds(_))
    }
}

/// `t ≤ s` checked on every configuration of `s` of at most `max_size`
/// messages.
pub fn oracle_subtype(t: &TypeExpr, s: &TypeExpr, max_size: usize, table: &TypeTable) -> OracleVerdict {
    Oracle { table, max_size, memo: HashMap::new() }.subtype(t, s, ARG_DEPTH)
}

struct Oracle<'a> {
    table: &'a TypeTable,
    max_size: usize,
    memo: HashMap<(TypeExpr, TypeExpr, usize), bool>,
}

impl Oracle<'_> {
    fn subtype(&mut self, t: &TypeExpr, s: &TypeExpr, depth: usize) -> OracleVerdict {
        let ours = enumerate_configurations(t, self.max_size, self.table);
        for a in enumerate_configurations(s, self.max_size, self.table) {
            let tags = a.tags();
            let wanted: Vec<&MsgType> = a.messages().collect();
            let found = ours
                .iter()
                .filter(|b| b.tags() == tags)
                .any(|b| self.matching(&wanted, &mut b.messages().collect(), depth));
            if !found {
                return OracleVerdict::Counterexample(a);
            }
        }
        OracleVerdict::Holds(self.max_size)
    }

    /// A bijection from `wanted` to `offered` pairing equal tags with
    /// contravariant arguments.
    fn matching(&mut self, wanted: &[&MsgType], offered: &mut Vec<&MsgType>, depth: usize) -> bool {
        let Some((w, rest)) = wanted.split_first() else { return true };
        for i in 0..offered.len() {
            let o = offered[i];
            if o.tag != w.tag || o.args.len() != w.args.len() {
                continue;
            }
            if !w.args.iter().zip(&o.args).all(|(sa, ta)| self.arg_le(sa, ta, depth)) {
                continue;
            }
            offered.swap_remove(i);
            let ok = self.matching(rest, offered, depth);
            offered.push(o);
            let last = offered.len() - 1;
            offered.swap(i, last);
            if ok {
                return true;
            }
        }
        false
    }

    fn arg_le(&mut self, s: &TypeExpr, t: &TypeExpr, depth: usize) -> bool {
        let (bs, bt) = (self.table.base_of(s), self.table.base_of(t));
        if bs.is_some() || bt.is_some() {
            // values and objects never stand for one another
            return bs == bt;
        }
        if depth == 0 {
            return normalize(s) == normalize(t);
        }
        let key = (s.clone(), t.clone(), depth);
        if let Some(hit) = self.memo.get(&key) {
            return *hit;
        }
        // coinductive hypothesis
        self.memo.insert(key.clone(), true);
        let ok = self.subtype(s, t, depth - 1).holds();
        self.memo.insert(key, ok);
        ok
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiveVerdict {
    NoViolation(usize),
    /// A valid configuration triggering no pattern yet holding a message
    /// with a relevant argument.
    Violation(Configuration),
}

/// Liveness checked on every valid configuration of at most `max_size`
/// messages.
pub fn oracle_live(t: &TypeExpr, patterns: &[BTreeMap<Tag, usize>], max_size: usize, table: &TypeTable) -> LiveVerdict {
    for a in enumerate_configurations(t, max_size, table) {
        let tags = a.tags();
        let fires = patterns
            .iter()
            .any(|b| b.iter().all(|(tag, n)| tags.get(tag).is_some_and(|m| m >= n)));
        if fires {
            continue;
        }
        let junk_ok = a
            .messages()
            .flat_map(|m| &m.args)
            .all(|arg| enumerate_configurations(arg, 0, table).contains(&Configuration::empty()));
        if !junk_ok {
            return LiveVerdict::Violation(a);
        }
    }
    LiveVerdict::NoViolation(max_size)
}

/// Parameters of the random type generator.
#[derive(Clone, Debug)]
pub struct TypeGenSpec {
    pub seed: u64,
    pub max_depth: usize,
    pub tags: usize,
    pub star_probability: f64,
    /// Chance that an argument refers to a recursive named type.
    pub recursion_probability: f64,
}

impl Default for TypeGenSpec {
    fn default() -> Self {
        TypeGenSpec { seed: 0, max_depth: 3, tags: 3, star_probability: 0.2, recursion_probability: 0.3 }
    }
}

/// Named types that generated arguments may refer to.
pub fn generator_table() -> TypeTable {
    let decl = |name: &str, src: &str| (name.to_string(), crate::syntax::parse_type(src).expect("valid type"));
    TypeTable::resolve([
        decl("#Reply", "Reply(#Number)"),
        decl("#Stream", "Next(#Number, #Stream) + 1"),
        decl("#Pool", "*Take(#Reply)"),
    ])
    .expect("contractive")
}

/// A stream of random types over [`generator_table`].
pub struct TypeGen {
    spec: TypeGenSpec,
    rng: ChaCha8Rng,
}

impl TypeGen {
    pub fn new(spec: TypeGenSpec) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(spec.seed);
        TypeGen { spec, rng }
    }

    pub fn next_type(&mut self) -> TypeExpr {
        let depth = self.spec.max_depth;
        self.gen(depth)
    }

    fn tag(&mut self) -> TypeExpr {
        let i = self.rng.gen_range(0..self.spec.tags.max(1));
        let tag = ((b'a' + (i % 26) as u8) as char).to_string();
        // every third tag carries one argument, so arities stay consistent
        if i % 3 == 2 {
            let arg = self.arg();
            TypeExpr::msg(tag, vec![arg])
        } else {
            TypeExpr::atom(tag)
        }
    }

    fn arg(&mut self) -> TypeExpr {
        if self.rng.gen_bool(self.spec.recursion_probability) {
            let names = ["#Reply", "#Stream", "#Pool"];
            TypeExpr::Ref(names[self.rng.gen_range(0..names.len())].into())
        } else if self.rng.gen_bool(0.5) {
            TypeExpr::number()
        } else {
            match self.rng.gen_range(0..3) {
                0 => TypeExpr::One,
                1 => TypeExpr::atom("x"),
                _ => TypeExpr::sum([TypeExpr::atom("x"), TypeExpr::One]),
            }
        }
    }

    fn gen(&mut self, depth: usize) -> TypeExpr {
        if depth == 0 {
            return match self.rng.gen_range(0..6) {
                0 => TypeExpr::Zero,
                1 => TypeExpr::One,
                _ => self.tag(),
            };
        }
        if self.rng.gen_bool(self.spec.star_probability) {
            return TypeExpr::star(self.gen(depth - 1));
        }
        match self.rng.gen_range(0..4) {
            0 => self.gen(0),
            1 => TypeExpr::Sum(vec![self.gen(depth - 1), self.gen(depth - 1)]),
            _ => TypeExpr::Prod(vec![self.gen(depth - 1), self.gen(depth - 1)]),
        }
    }
}

/// A single random type, deterministic in the seed.
pub fn random_type(spec: &TypeGenSpec) -> TypeExpr {
    TypeGen::new(spec.clone()).next_type()
}
