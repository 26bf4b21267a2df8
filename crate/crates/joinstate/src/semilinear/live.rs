use std::collections::{BTreeMap, BTreeSet};

use super::{add, parikh, LinearSet, SlotAlphabet, Vector};
use crate::types::{nullable, Configuration, Tag, TypeExpr, TypeTable};

/// Whether every valid configuration of `t` that triggers none of the
/// `patterns` carries only messages with irrelevant arguments.
pub fn live(t: &TypeExpr, patterns: &[BTreeMap<Tag, usize>], table: &TypeTable) -> bool {
    let (alpha, set) = parikh(t, table);
    let relevant: Vec<usize> = (0..alpha.len())
        .filter(|&c| alpha.slot(c).args.iter().any(|a| !nullable(a, table)))
        .collect();
    if relevant.is_empty() {
        return true;
    }
    let tags: BTreeSet<&Tag> = alpha.slots().iter().map(|m| &m.tag).collect();
    // A pattern mentioning a tag outside the alphabet never fires.
    let choices: Vec<Vec<(&Tag, usize)>> = patterns
        .iter()
        .filter(|b| b.keys().all(|tag| tags.contains(tag)))
        .map(|b| b.iter().map(|(tag, n)| (tag, n - 1)).collect())
        .collect();
    set.components()
        .iter()
        .all(|comp| !violated(comp, &alpha, &relevant, &choices, &mut BTreeMap::new()))
}

/// Looks for a configuration in `comp` that stays within the chosen upper
/// bounds and holds a relevant slot.
fn violated<'a>(
    comp: &LinearSet,
    alpha: &SlotAlphabet,
    relevant: &[usize],
    choices: &[Vec<(&'a Tag, usize)>],
    bounds: &mut BTreeMap<&'a Tag, usize>,
) -> bool {
    let within = |v: &Vector, bounds: &BTreeMap<&Tag, usize>| {
        bounds.iter().all(|(tag, max)| tag_count(alpha, v, tag) <= *max)
    };
    if !within(&comp.base, bounds) {
        return false;
    }
    let Some((first, rest)) = choices.split_first() else {
        return relevant.iter().any(|&c| {
            comp.base[c] >= 1
                || comp
                    .periods
                    .iter()
                    .any(|p| p[c] >= 1 && within(&add(&comp.base, p), bounds))
        });
    };
    for &(tag, max) in first {
        let previous = bounds.get(tag).copied();
        let tightened = previous.map_or(max, |p| p.min(max));
        bounds.insert(tag, tightened);
        let found = violated(comp, alpha, relevant, rest, bounds);
        match previous {
            Some(p) => bounds.insert(tag, p),
            None => bounds.remove(tag),
        };
        if found {
            return true;
        }
    }
    false
}

fn tag_count(alpha: &SlotAlphabet, v: &[u32], tag: &str) -> usize {
    v.iter()
        .enumerate()
        .filter(|(c, _)| alpha.slot(*c).tag == tag)
        .map(|(_, n)| *n as usize)
        .sum()
}

/// Outcome of resolving the argument types of a pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Determinacy {
    /// Argument types for each tag of the pattern.
    Unique(BTreeMap<Tag, Vec<TypeExpr>>),
    /// Distinct slot assignments extend to valid configurations.
    Ambiguous(Vec<Configuration>),
    /// No valid configuration contains the pattern.
    Dead,
}

/// Resolves the argument types of a multiset of `(tag, arity)` messages
/// against the configurations of `t` that contain them.
pub fn arg_determinate(t: &TypeExpr, pattern: &[(Tag, usize)], table: &TypeTable) -> Determinacy {
    let (alpha, set) = parikh(t, table);
    let mut groups: BTreeMap<(&Tag, usize), u32> = BTreeMap::new();
    for (tag, arity) in pattern {
        *groups.entry((tag, *arity)).or_default() += 1;
    }
    let mut partial: Vec<Vector> = vec![vec![0; alpha.len()]];
    for ((tag, arity), n) in groups {
        let cands: Vec<usize> = (0..alpha.len())
            .filter(|&c| alpha.slot(c).tag == *tag && alpha.slot(c).args.len() == arity)
            .collect();
        let mut next = Vec::new();
        for v in &partial {
            multisets(&cands, n, 0, &mut v.clone(), &mut next);
        }
        partial = next;
    }
    let feasible: Vec<Vector> = partial
        .into_iter()
        .filter(|s| set.components().iter().any(|comp| extends(comp, s)))
        .collect();
    match feasible.as_slice() {
        [] => Determinacy::Dead,
        [s] => {
            let mut out: BTreeMap<Tag, Vec<TypeExpr>> = BTreeMap::new();
            for (c, n) in s.iter().enumerate() {
                if *n == 0 {
                    continue;
                }
                let slot = alpha.slot(c);
                if out.insert(slot.tag.clone(), slot.args.clone()).is_some() {
                    return Determinacy::Ambiguous(vec![alpha.configuration(s)]);
                }
            }
            Determinacy::Unique(out)
        }
        many => Determinacy::Ambiguous(many.iter().map(|s| alpha.configuration(s)).collect()),
    }
}

fn multisets(cands: &[usize], left: u32, from: usize, v: &mut Vector, out: &mut Vec<Vector>) {
    if left == 0 {
        out.push(v.clone());
        return;
    }
    for i in from..cands.len() {
        v[cands[i]] += 1;
        multisets(cands, left - 1, i, v, out);
        v[cands[i]] -= 1;
    }
}

/// Whether some vector of `comp` dominates `s`.
fn extends(comp: &LinearSet, s: &[u32]) -> bool {
    s.iter()
        .enumerate()
        .all(|(c, n)| *n <= comp.base[c] || comp.periods.iter().any(|p| p[c] > 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(tag: &str) -> TypeExpr {
        TypeExpr::atom(tag)
    }

    fn bag(tags: &[&str]) -> BTreeMap<Tag, usize> {
        let mut out = BTreeMap::new();
        for t in tags {
            *out.entry(t.to_string()).or_default() += 1;
        }
        out
    }

    fn future() -> TypeExpr {
        let reply = TypeExpr::msg("Reply", vec![TypeExpr::number()]);
        TypeExpr::prod([
            TypeExpr::sum([
                TypeExpr::prod([a("EMPTY"), TypeExpr::msg("Resolve", vec![TypeExpr::number()])]),
                TypeExpr::msg("RESOLVED", vec![TypeExpr::number()]),
            ]),
            TypeExpr::star(TypeExpr::msg("Get", vec![reply])),
        ])
    }

    #[test]
    fn future_is_live() {
        let x = [bag(&["EMPTY", "Resolve"]), bag(&["RESOLVED", "Get"])];
        assert!(live(&future(), &x, &TypeTable::new()));
        assert!(!live(&future(), &[bag(&["EMPTY", "Resolve"])], &TypeTable::new()));
    }

    #[test]
    fn lone_message_with_relevant_argument() {
        let t = TypeExpr::msg("m", vec![TypeExpr::msg("Reply", vec![TypeExpr::number()])]);
        assert!(!live(&t, &[bag(&["m", "m"])], &TypeTable::new()));
        assert!(live(&t, &[bag(&["m"])], &TypeTable::new()));
    }

    #[test]
    fn unit_is_live() {
        assert!(live(&TypeExpr::One, &[], &TypeTable::new()));
    }

    #[test]
    fn determinacy() {
        let s1 = a("s1");
        let s2 = a("s2");
        let t = TypeExpr::sum([
            TypeExpr::prod([a("A"), TypeExpr::msg("m", vec![s1.clone()])]),
            TypeExpr::prod([a("B"), TypeExpr::msg("m", vec![s2])]),
        ]);
        let table = TypeTable::new();
        let m = ("m".to_string(), 1);
        assert!(matches!(arg_determinate(&t, &[m.clone()], &table), Determinacy::Ambiguous(_)));
        let got = arg_determinate(&t, &[("A".to_string(), 0), m], &table);
        let expected = BTreeMap::from([("A".to_string(), vec![]), ("m".to_string(), vec![s1])]);
        assert_eq!(got, Determinacy::Unique(expected));
        assert_eq!(arg_determinate(&a("a"), &[("b".to_string(), 0)], &table), Determinacy::Dead);
    }
}
