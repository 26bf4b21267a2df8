use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{normalize, Tag, TypeExpr, TypeTable};

/// A message type `m(t̄)` with normalized arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MsgType {
    pub tag: Tag,
    pub args: Vec<TypeExpr>,
}

impl fmt::Display for MsgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&TypeExpr::Msg(self.tag.clone(), self.args.clone()), f)
    }
}

/// A multiset of message types.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    entries: BTreeMap<MsgType, usize>,
}

impl Configuration {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn singleton(msg: MsgType) -> Self {
        let mut c = Self::default();
        c.insert(msg, 1);
        c
    }

    pub fn insert(&mut self, msg: MsgType, count: usize) {
        if count > 0 {
            *self.entries.entry(msg).or_default() += count;
        }
    }

    pub fn union(&self, other: &Configuration) -> Configuration {
        let mut out = self.clone();
        for (m, n) in &other.entries {
            out.insert(m.clone(), *n);
        }
        out
    }

    pub fn size(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MsgType, usize)> {
        self.entries.iter().map(|(m, n)| (m, *n))
    }

    /// Every message, repeated according to multiplicity.
    pub fn messages(&self) -> impl Iterator<Item = &MsgType> {
        self.entries
            .iter()
            .flat_map(|(m, n)| std::iter::repeat_n(m, *n))
    }

    /// Projection onto tags.
    pub fn tags(&self) -> BTreeMap<Tag, usize> {
        let mut out = BTreeMap::new();
        for (m, n) in &self.entries {
            *out.entry(m.tag.clone()).or_default() += n;
        }
        out
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (i, m) in self.messages().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("⟩")
    }
}

/// All valid configurations of `t` with at most `max_size` messages,
/// computed directly from the set semantics of each connective.
pub fn enumerate_configurations(
    t: &TypeExpr,
    max_size: usize,
    table: &TypeTable,
) -> BTreeSet<Configuration> {
    match t {
        TypeExpr::Zero => BTreeSet::new(),
        TypeExpr::One | TypeExpr::Base(_) => BTreeSet::from([Configuration::empty()]),
        TypeExpr::Msg(tag, args) => {
            if max_size == 0 {
                return BTreeSet::new();
            }
            let msg = MsgType { tag: tag.clone(), args: args.iter().map(normalize).collect() };
            BTreeSet::from([Configuration::singleton(msg)])
        }
        TypeExpr::Sum(ts) => ts
            .iter()
            .flat_map(|t| enumerate_configurations(t, max_size, table))
            .collect(),
        TypeExpr::Prod(ts) => {
            let mut acc = BTreeSet::from([Configuration::empty()]);
            for t in ts {
                let part = enumerate_configurations(t, max_size, table);
                acc = combine(&acc, &part, max_size);
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        TypeExpr::Star(body) => {
            let part = enumerate_configurations(body, max_size, table);
            let mut acc = BTreeSet::from([Configuration::empty()]);
            loop {
                let next: BTreeSet<_> = acc.union(&combine(&acc, &part, max_size)).cloned().collect();
                if next.len() == acc.len() {
                    return acc;
                }
                acc = next;
            }
        }
        TypeExpr::Ref(n) => enumerate_configurations(table.lookup(n), max_size, table),
    }
}

fn combine(
    left: &BTreeSet<Configuration>,
    right: &BTreeSet<Configuration>,
    max_size: usize,
) -> BTreeSet<Configuration> {
    let mut out = BTreeSet::new();
    for a in left {
        for b in right {
            if a.size() + b.size() <= max_size {
                out.insert(a.union(b));
            }
        }
    }
    out
}
