use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{add, in_span, parikh_in, LinearSet, SemilinearSet, SlotAlphabet, Vector};
use crate::types::{normalize, nullable, Configuration, TypeExpr, TypeTable};

/// Largest period-coefficient sum explored when no exact argument applies.
pub const DEFAULT_BOUND: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "detail")]
pub enum Verdict {
    Yes,
    /// Every configuration reachable with at most this many period
    /// additions per linear set was matched.
    YesBounded(usize),
    /// A configuration of the right-hand side that the left-hand side
    /// cannot match.
    No(#[serde(serialize_with = "as_string")] Configuration),
}

fn as_string<S: serde::Serializer>(c: &Configuration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&c.to_string())
}

impl Verdict {
    pub fn holds(&self) -> bool {
        !matches!(self, Verdict::No(_))
    }

    pub fn is_exact_yes(&self) -> bool {
        matches!(self, Verdict::Yes)
    }

    fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::No(c), _) | (_, Verdict::No(c)) => Verdict::No(c),
            (Verdict::YesBounded(k), _) | (_, Verdict::YesBounded(k)) => Verdict::YesBounded(k),
            _ => Verdict::Yes,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Yes => f.write_str("yes"),
            Verdict::YesBounded(k) => write!(f, "yes (bounded, K = {k})"),
            Verdict::No(c) => write!(f, "no, counterexample {c}"),
        }
    }
}

/// `t ≤ s` with a fresh engine.
pub fn subtype(t: &TypeExpr, s: &TypeExpr, table: &TypeTable) -> Verdict {
    SubtypeEngine::new(table, DEFAULT_BOUND).subtype(t, s)
}

/// `t ≤ s` and `s ≤ t`.
pub fn equivalent(t: &TypeExpr, s: &TypeExpr, table: &TypeTable) -> Verdict {
    let mut engine = SubtypeEngine::new(table, DEFAULT_BOUND);
    engine.equivalent(t, s)
}

/// Subtype checker with a memo of settled pairs.
pub struct SubtypeEngine<'a> {
    table: &'a TypeTable,
    bound: usize,
    memo: HashMap<(TypeExpr, TypeExpr), Verdict>,
    stack: Vec<(TypeExpr, TypeExpr)>,
}

struct Outcome {
    verdict: Verdict,
    /// Lowest stack frame assumed to hold, `usize::MAX` if none.
    low: usize,
}

impl<'a> SubtypeEngine<'a> {
    pub fn new(table: &'a TypeTable, bound: usize) -> Self {
        SubtypeEngine { table, bound, memo: HashMap::new(), stack: Vec::new() }
    }

    pub fn table(&self) -> &'a TypeTable {
        self.table
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn subtype(&mut self, t: &TypeExpr, s: &TypeExpr) -> Verdict {
        self.check(t, s).verdict
    }

    pub fn equivalent(&mut self, t: &TypeExpr, s: &TypeExpr) -> Verdict {
        let forward = self.subtype(t, s);
        if !forward.holds() {
            return forward;
        }
        forward.and(self.subtype(s, t))
    }

    fn check(&mut self, t: &TypeExpr, s: &TypeExpr) -> Outcome {
        let key = (normalize(t), normalize(s));
        if let Some(v) = self.memo.get(&key) {
            return Outcome { verdict: v.clone(), low: usize::MAX };
        }
        if let Some(i) = self.stack.iter().position(|k| *k == key) {
            return Outcome { verdict: Verdict::Yes, low: i };
        }
        let frame = self.stack.len();
        self.stack.push(key.clone());
        let Outcome { verdict, low } = self.decide(&key.0, &key.1);
        self.stack.pop();
        if !verdict.holds() || low >= frame {
            self.memo.insert(key, verdict.clone());
        }
        Outcome { verdict, low: if low >= frame { usize::MAX } else { low } }
    }

    fn decide(&mut self, t: &TypeExpr, s: &TypeExpr) -> Outcome {
        let exact = |verdict| Outcome { verdict, low: usize::MAX };
        if t == s || *s == TypeExpr::Zero {
            return exact(Verdict::Yes);
        }
        match (self.table.base_of(t), self.table.base_of(s)) {
            (Some(a), Some(b)) if a == b => return exact(Verdict::Yes),
            (None, None) => {}
            _ => return exact(Verdict::No(Configuration::empty())),
        }
        if nullable(s, self.table) && !nullable(t, self.table) {
            return exact(Verdict::No(Configuration::empty()));
        }

        let alphabet = SlotAlphabet::of([t, s], self.table);
        let pt = parikh_in(t, &alphabet, self.table);
        let ps = parikh_in(s, &alphabet, self.table);
        let mut m = Matcher::new(self, &alphabet, &pt);
        let mut verdict = Verdict::Yes;
        for comp in ps.components() {
            match m.cover(comp) {
                Verdict::No(c) => {
                    verdict = Verdict::No(c);
                    break;
                }
                v => verdict = verdict.and(v),
            }
        }
        Outcome { verdict, low: m.low }
    }
}

/// Matching of right-hand configurations against the left-hand Parikh image.
struct Matcher<'e, 'a, 's> {
    engine: &'e mut SubtypeEngine<'a>,
    alphabet: &'s SlotAlphabet,
    pt: &'s SemilinearSet,
    support: Vec<bool>,
    /// `compat[cs][ct]`: slot `ct` of the left side may stand for slot `cs`.
    compat: Vec<Vec<Option<bool>>>,
    bounded: bool,
    low: usize,
}

impl<'e, 'a, 's> Matcher<'e, 'a, 's> {
    fn new(engine: &'e mut SubtypeEngine<'a>, alphabet: &'s SlotAlphabet, pt: &'s SemilinearSet) -> Self {
        let n = alphabet.len();
        Matcher {
            engine,
            alphabet,
            pt,
            support: pt.support(),
            compat: vec![vec![None; n]; n],
            bounded: false,
            low: usize::MAX,
        }
    }

    fn compatible(&mut self, cs: usize, ct: usize) -> bool {
        if let Some(b) = self.compat[cs][ct] {
            return b;
        }
        let (ms, mt) = (self.alphabet.slot(cs), self.alphabet.slot(ct));
        let mut ok = ms.tag == mt.tag && ms.args.len() == mt.args.len();
        if ok && cs != ct {
            for (sa, ta) in ms.args.iter().zip(&mt.args) {
                let out = self.engine.check(sa, ta);
                self.low = self.low.min(out.low);
                match out.verdict {
                    Verdict::No(_) => {
                        ok = false;
                        break;
                    }
                    Verdict::YesBounded(_) => self.bounded = true,
                    Verdict::Yes => {}
                }
            }
        }
        self.compat[cs][ct] = Some(ok);
        ok
    }

    fn candidates(&mut self, cs: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for ct in 0..self.alphabet.len() {
            if (self.support[ct] || ct == cs) && self.compatible(cs, ct) {
                out.push(ct);
            }
        }
        out
    }

    fn cover(&mut self, comp: &LinearSet) -> Verdict {
        if self.fast_path(comp) {
            return self.finish(true);
        }
        let mut seen = HashSet::new();
        let mut stack: Vec<(Vector, usize, usize)> = vec![(comp.base.clone(), 0, 0)];
        while let Some((v, from, used)) = stack.pop() {
            if seen.insert(v.clone()) && !self.matches(&v) {
                return Verdict::No(self.alphabet.configuration(&v));
            }
            if used == self.engine.bound {
                continue;
            }
            for (i, p) in comp.periods.iter().enumerate().skip(from) {
                stack.push((add(&v, p), i, used + 1));
            }
        }
        self.finish(comp.periods.is_empty())
    }

    fn finish(&self, exact: bool) -> Verdict {
        if exact && !self.bounded {
            Verdict::Yes
        } else {
            Verdict::YesBounded(self.engine.bound)
        }
    }

    /// Maps each right-hand slot to one left-hand slot and tests inclusion of
    /// the whole image in a single left-hand linear set.
    fn fast_path(&mut self, comp: &LinearSet) -> bool {
        let n = self.alphabet.len();
        let mut image = vec![usize::MAX; n];
        for v in std::iter::once(&comp.base).chain(&comp.periods) {
            for cs in 0..n {
                if v[cs] == 0 || image[cs] != usize::MAX {
                    continue;
                }
                let cands = self.candidates(cs);
                image[cs] = if cands.contains(&cs) && self.support[cs] {
                    cs
                } else if let Some(&c) = cands.first() {
                    c
                } else {
                    return false;
                };
            }
        }
        let map = |v: &Vector| {
            let mut w = vec![0; n];
            for (cs, x) in v.iter().enumerate() {
                if *x > 0 {
                    w[image[cs]] += x;
                }
            }
            w
        };
        let base = map(&comp.base);
        let periods: Vec<Vector> = comp.periods.iter().map(map).collect();
        self.pt
            .components()
            .iter()
            .any(|l| l.contains(&base) && periods.iter().all(|p| in_span(p, &l.periods)))
    }

    /// Searches a transport of `v` onto compatible left-hand slots whose
    /// column sums form a member of the left-hand image.
    fn matches(&mut self, v: &[u32]) -> bool {
        let rows: Vec<(usize, u32, Vec<usize>)> = (0..v.len())
            .filter(|&c| v[c] > 0)
            .map(|c| (c, v[c], self.candidates(c)))
            .collect();
        if rows.iter().any(|(_, _, cands)| cands.is_empty()) {
            return false;
        }
        let mut tried = HashSet::new();
        let mut w = vec![0; v.len()];
        distribute(&rows, 0, 0, &mut w, &mut |w| {
            tried.insert(w.to_vec()) && self.pt.components().iter().any(|l| l.contains(w))
        })
    }
}

/// Enumerates every way to spread each row's count over its candidate
/// columns, stopping at the first `w` accepted by `accept`.
fn distribute(
    rows: &[(usize, u32, Vec<usize>)],
    row: usize,
    col: usize,
    w: &mut Vector,
    accept: &mut impl FnMut(&Vector) -> bool,
) -> bool {
    let Some((_, count, cands)) = rows.get(row) else {
        return accept(w);
    };
    spread(rows, row, col, *count, cands, w, accept)
}

fn spread(
    rows: &[(usize, u32, Vec<usize>)],
    row: usize,
    col: usize,
    left: u32,
    cands: &[usize],
    w: &mut Vector,
    accept: &mut impl FnMut(&Vector) -> bool,
) -> bool {
    if col + 1 == cands.len() {
        w[cands[col]] += left;
        let found = distribute(rows, row + 1, 0, w, accept);
        w[cands[col]] -= left;
        return found;
    }
    for k in (0..=left).rev() {
        w[cands[col]] += k;
        let found = spread(rows, row, col + 1, left - k, cands, w, accept);
        w[cands[col]] -= k;
        if found {
            return true;
        }
    }
    false
}
