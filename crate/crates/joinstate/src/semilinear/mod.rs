//! Parikh images of behavioral types as semilinear sets, and the semantic
//! predicates decided over them.
//!
//! Coordinates are *slots*: message types identified by tag and normalized
//! argument vector. A vector over a [`SlotAlphabet`] counts how many messages
//! of each slot a configuration holds.

mod live;
mod subtype;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::types::{normalize, Configuration, MsgType, TypeExpr, TypeTable};

pub use live::{arg_determinate, live, Determinacy};
pub use subtype::{equivalent, subtype, SubtypeEngine, Verdict, DEFAULT_BOUND};

pub type Vector = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("vector of dimension {got} used with an alphabet of dimension {expected}")]
pub struct DimensionMismatch {
    pub expected: usize,
    pub got: usize,
}

/// Ordered set of slots.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SlotAlphabet {
    slots: Vec<MsgType>,
    index: HashMap<MsgType, usize>,
}

impl SlotAlphabet {
    /// Slots of every message leaf in the head unfoldings of `types`.
    pub fn of<'a>(types: impl IntoIterator<Item = &'a TypeExpr>, table: &TypeTable) -> Self {
        let mut found = BTreeSet::new();
        let mut seen_refs = HashSet::new();
        for t in types {
            collect_slots(t, table, &mut found, &mut seen_refs);
        }
        let slots: Vec<MsgType> = found.into_iter().collect();
        let index = slots.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        SlotAlphabet { slots, index }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[MsgType] {
        &self.slots
    }

    pub fn slot(&self, i: usize) -> &MsgType {
        &self.slots[i]
    }

    pub fn index_of(&self, msg: &MsgType) -> Option<usize> {
        self.index.get(msg).copied()
    }

    pub fn configuration(&self, v: &[u32]) -> Configuration {
        let mut c = Configuration::empty();
        for (i, n) in v.iter().enumerate() {
            c.insert(self.slots[i].clone(), *n as usize);
        }
        c
    }

    /// The vector of a configuration, if all its messages are slots here.
    pub fn vector(&self, c: &Configuration) -> Option<Vector> {
        let mut v = vec![0; self.len()];
        for (m, n) in c.entries() {
            v[self.index_of(m)?] += n as u32;
        }
        Some(v)
    }

    fn render(&self, v: &[u32]) -> String {
        self.configuration(v).to_string()
    }
}

fn collect_slots(
    t: &TypeExpr,
    table: &TypeTable,
    out: &mut BTreeSet<MsgType>,
    seen: &mut HashSet<String>,
) {
    match t {
        TypeExpr::Zero | TypeExpr::One | TypeExpr::Base(_) => {}
        TypeExpr::Msg(tag, args) => {
            out.insert(MsgType { tag: tag.clone(), args: args.iter().map(normalize).collect() });
        }
        TypeExpr::Sum(ts) | TypeExpr::Prod(ts) => {
            ts.iter().for_each(|t| collect_slots(t, table, out, seen))
        }
        TypeExpr::Star(b) => collect_slots(b, table, out, seen),
        TypeExpr::Ref(n) => {
            if seen.insert(n.clone()) {
                collect_slots(table.lookup(n), table, out, seen);
            }
        }
    }
}

/// `{ base + Σ λᵢ·periodᵢ | λᵢ ∈ ℕ }`. Periods are nonzero, sorted and distinct.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearSet {
    pub base: Vector,
    pub periods: Vec<Vector>,
}

impl LinearSet {
    pub fn new(base: Vector, periods: impl IntoIterator<Item = Vector>) -> Self {
        let mut periods: Vec<Vector> =
            periods.into_iter().filter(|p| p.iter().any(|x| *x > 0)).collect();
        periods.sort();
        periods.dedup();
        LinearSet { base, periods }
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        match sub(v, &self.base) {
            Some(r) => in_span(&r, &self.periods),
            None => false,
        }
    }

    /// Sufficient test for `self ⊆ other`.
    fn subsumed_by(&self, other: &LinearSet) -> bool {
        other.contains(&self.base) && self.periods.iter().all(|p| in_span(p, &other.periods))
    }
}

/// A finite union of linear sets over one alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemilinearSet {
    dim: usize,
    components: Vec<LinearSet>,
}

impl SemilinearSet {
    pub fn empty(dim: usize) -> Self {
        SemilinearSet { dim, components: Vec::new() }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_components(dim, [LinearSet::new(vec![0; dim], [])])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut b = vec![0; dim];
        b[i] = 1;
        Self::from_components(dim, [LinearSet::new(b, [])])
    }

    pub fn from_components(dim: usize, components: impl IntoIterator<Item = LinearSet>) -> Self {
        let mut s = SemilinearSet { dim, components: components.into_iter().collect() };
        s.prune();
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[LinearSet] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn union(&self, other: &SemilinearSet) -> SemilinearSet {
        Self::from_components(
            self.dim,
            self.components.iter().chain(&other.components).cloned(),
        )
    }

    /// Minkowski sum.
    pub fn sum(&self, other: &SemilinearSet) -> SemilinearSet {
        let mut out = Vec::new();
        for a in &self.components {
            for b in &other.components {
                out.push(LinearSet::new(
                    add(&a.base, &b.base),
                    a.periods.iter().chain(&b.periods).cloned(),
                ));
            }
        }
        Self::from_components(self.dim, out)
    }

    /// Star closure, as the product of the stars of the components.
    pub fn star(&self) -> SemilinearSet {
        let mut acc = SemilinearSet::zero(self.dim);
        for c in &self.components {
            let starred = if c.base.iter().all(|x| *x == 0) {
                SemilinearSet::from_components(self.dim, [c.clone()])
            } else {
                SemilinearSet::from_components(
                    self.dim,
                    [
                        LinearSet::new(vec![0; self.dim], []),
                        LinearSet::new(
                            c.base.clone(),
                            c.periods.iter().cloned().chain([c.base.clone()]),
                        ),
                    ],
                )
            };
            acc = acc.sum(&starred);
        }
        acc
    }

    pub fn member(&self, v: &[u32]) -> Result<bool, DimensionMismatch> {
        if v.len() != self.dim {
            return Err(DimensionMismatch { expected: self.dim, got: v.len() });
        }
        Ok(self.components.iter().any(|c| c.contains(v)))
    }

    /// Coordinates that are nonzero in some base or period.
    pub fn support(&self) -> Vec<bool> {
        let mut out = vec![false; self.dim];
        for c in &self.components {
            for v in std::iter::once(&c.base).chain(&c.periods) {
                for (i, x) in v.iter().enumerate() {
                    out[i] |= *x > 0;
                }
            }
        }
        out
    }

    fn prune(&mut self) {
        self.components.sort();
        self.components.dedup();
        let zero = vec![0; self.dim];
        // (0; ∅) ∪ (b; {b}) = (0; {b})
        if let Some(z) = self.components.iter().position(|c| c.base == zero && c.periods.is_empty())
        {
            if let Some(j) = self
                .components
                .iter()
                .position(|c| c.periods.len() == 1 && c.periods[0] == c.base)
            {
                let b = self.components[j].base.clone();
                self.components[j] = LinearSet::new(zero.clone(), [b]);
                self.components.remove(z);
            }
        }
        let mut keep = vec![true; self.components.len()];
        for i in 0..self.components.len() {
            let subsumed = (0..self.components.len()).any(|j| {
                j != i && keep[j] && self.components[i].subsumed_by(&self.components[j])
            });
            if subsumed {
                keep[i] = false;
            }
        }
        let mut it = keep.into_iter();
        self.components.retain(|_| it.next().unwrap());
        self.components.sort();
    }

    pub fn display<'a>(&'a self, alphabet: &'a SlotAlphabet) -> impl fmt::Display + 'a {
        DisplaySet { set: self, alphabet }
    }
}

struct DisplaySet<'a> {
    set: &'a SemilinearSet,
    alphabet: &'a SlotAlphabet,
}

impl fmt::Display for DisplaySet<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.set.is_empty() {
            return writeln!(f, "∅");
        }
        for c in &self.set.components {
            write!(f, "{}", self.alphabet.render(&c.base))?;
            for p in &c.periods {
                write!(f, " + N·{}", self.alphabet.render(p))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Parikh image of `t`, with the alphabet of its head unfolding.
pub fn parikh(t: &TypeExpr, table: &TypeTable) -> (SlotAlphabet, SemilinearSet) {
    let alphabet = SlotAlphabet::of([t], table);
    let set = parikh_in(t, &alphabet, table);
    (alphabet, set)
}

/// Parikh image of `t` over an alphabet that covers its head unfolding.
pub fn parikh_in(t: &TypeExpr, alphabet: &SlotAlphabet, table: &TypeTable) -> SemilinearSet {
    let mut memo = HashMap::new();
    parikh_rec(t, alphabet, table, &mut memo)
}

fn parikh_rec(
    t: &TypeExpr,
    alphabet: &SlotAlphabet,
    table: &TypeTable,
    memo: &mut HashMap<String, SemilinearSet>,
) -> SemilinearSet {
    let dim = alphabet.len();
    match t {
        TypeExpr::Zero => SemilinearSet::empty(dim),
        TypeExpr::One | TypeExpr::Base(_) => SemilinearSet::zero(dim),
        TypeExpr::Msg(tag, args) => {
            let m = MsgType { tag: tag.clone(), args: args.iter().map(normalize).collect() };
            let i = alphabet.index_of(&m).expect("alphabet covers the type");
            SemilinearSet::unit(dim, i)
        }
        TypeExpr::Sum(ts) => ts
            .iter()
            .fold(SemilinearSet::empty(dim), |acc, t| acc.union(&parikh_rec(t, alphabet, table, memo))),
        TypeExpr::Prod(ts) => ts
            .iter()
            .fold(SemilinearSet::zero(dim), |acc, t| acc.sum(&parikh_rec(t, alphabet, table, memo))),
        TypeExpr::Star(b) => parikh_rec(b, alphabet, table, memo).star(),
        TypeExpr::Ref(n) => {
            if let Some(s) = memo.get(n) {
                return s.clone();
            }
            let s = parikh_rec(table.lookup(n), alphabet, table, memo);
            memo.insert(n.clone(), s.clone());
            s
        }
    }
}

pub(crate) fn add(a: &[u32], b: &[u32]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn sub(a: &[u32], b: &[u32]) -> Option<Vector> {
    a.iter().zip(b).map(|(x, y)| x.checked_sub(*y)).collect()
}

/// Whether `r` is an ℕ-combination of `periods`.
pub(crate) fn in_span(r: &[u32], periods: &[Vector]) -> bool {
    fn go(r: &[u32], periods: &[Vector], failed: &mut HashSet<Vector>) -> bool {
        let Some(c) = r.iter().position(|x| *x > 0) else {
            return true;
        };
        if failed.contains(r) {
            return false;
        }
        for p in periods.iter().filter(|p| p[c] > 0) {
            if let Some(rest) = sub(r, p) {
                if go(&rest, periods, failed) {
                    return true;
                }
            }
        }
        failed.insert(r.to_vec());
        false
    }
    go(r, periods, &mut HashSet::new())
}
