//! Dependency relations between object names.
//!
//! A relation is kept as a partition of names into cliques: every pair of
//! distinct names in a block depends on each other. Blocks of size one are
//! never stored. Combining two relations runs a disjoint-set union seeded
//! with the first partition; a union whose endpoints are already connected
//! means the two relations share a dependency or close a cycle, and the
//! combination is rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Disjoint-set forest over dense indices, with path compression and union
/// by rank.
#[derive(Clone, Debug, Default)]
pub struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(len: usize) -> Self {
        DisjointSet { parent: (0..len).collect(), rank: vec![0; len] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Returns false if `a` and `b` were already in the same set.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` cannot depend on itself")]
pub struct SelfDependency<N: fmt::Display + fmt::Debug>(pub N);

/// A dependency relation as a clique partition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DependencyRelation<N: Ord> {
    blocks: BTreeSet<BTreeSet<N>>,
}

/// The pair whose union closed a shared edge or a cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incompatible<N> {
    pub left: N,
    pub right: N,
}

impl<N: Ord> Default for DependencyRelation<N> {
    fn default() -> Self {
        DependencyRelation { blocks: BTreeSet::new() }
    }
}

impl<N: Ord + Clone> DependencyRelation<N> {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `u ∼ v`.
    pub fn pair(u: N, v: N) -> Result<Self, SelfDependency<N>>
    where
        N: fmt::Display + fmt::Debug,
    {
        if u == v {
            return Err(SelfDependency(u));
        }
        Ok(DependencyRelation { blocks: BTreeSet::from([BTreeSet::from([u, v])]) })
    }

    /// The total relation over `names`. Callers must pass distinct names.
    pub fn clique(names: impl IntoIterator<Item = N>) -> Self {
        let block: BTreeSet<N> = names.into_iter().collect();
        let mut blocks = BTreeSet::new();
        if block.len() >= 2 {
            blocks.insert(block);
        }
        DependencyRelation { blocks }
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> impl Iterator<Item = &BTreeSet<N>> {
        self.blocks.iter()
    }

    pub fn domain(&self) -> BTreeSet<N> {
        self.blocks.iter().flatten().cloned().collect()
    }

    /// Whether `(u, v)` belongs to the relation.
    pub fn related(&self, u: &N, v: &N) -> bool {
        u != v && self.blocks.iter().any(|b| b.contains(u) && b.contains(v))
    }

    /// `D1 ⊔ D2`, or the first union that would repeat an edge or close a cycle.
    pub fn join(&self, other: &Self) -> Result<Self, Incompatible<N>> {
        let (mut forest, names) = self.seeded_forest(other);
        let index: BTreeMap<&N, usize> = names.iter().enumerate().map(|(i, n)| (n, i)).collect();
        for block in &other.blocks {
            let mut it = block.iter();
            let first = it.next().expect("blocks are never empty");
            for x in it {
                if !forest.union(index[first], index[x]) {
                    return Err(Incompatible { left: first.clone(), right: x.clone() });
                }
            }
        }
        Ok(Self::from_forest(&mut forest, &names))
    }

    /// Merges the two partitions without the compatibility check. The result
    /// is the transitive closure of the union, which contains both inputs.
    pub fn merge(&self, other: &Self) -> Self {
        let (mut forest, names) = self.seeded_forest(other);
        let index: BTreeMap<&N, usize> = names.iter().enumerate().map(|(i, n)| (n, i)).collect();
        for block in &other.blocks {
            let mut it = block.iter();
            let first = it.next().expect("blocks are never empty");
            for x in it {
                forest.union(index[first], index[x]);
            }
        }
        Self::from_forest(&mut forest, &names)
    }

    pub fn compatible(&self, other: &Self) -> bool {
        self.join(other).is_ok()
    }

    /// `D \ a`.
    pub fn restrict(&self, a: &N) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut b = b.clone();
                b.remove(a);
                b
            })
            .filter(|b| b.len() >= 2)
            .collect();
        DependencyRelation { blocks }
    }

    /// Renames every name through `f`. `f` must be injective on the domain.
    pub fn map<M: Ord + Clone>(&self, mut f: impl FnMut(&N) -> M) -> DependencyRelation<M> {
        DependencyRelation {
            blocks: self.blocks.iter().map(|b| b.iter().map(&mut f).collect()).collect(),
        }
    }

    fn seeded_forest(&self, other: &Self) -> (DisjointSet, Vec<N>) {
        let names: Vec<N> = self
            .domain()
            .into_iter()
            .chain(other.domain())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&N, usize> = names.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut forest = DisjointSet::new(names.len());
        for block in &self.blocks {
            let mut it = block.iter();
            let first = index[it.next().unwrap()];
            for x in it {
                forest.union(first, index[x]);
            }
        }
        (forest, names)
    }

    fn from_forest(forest: &mut DisjointSet, names: &[N]) -> Self {
        let mut groups: BTreeMap<usize, BTreeSet<N>> = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            groups.entry(forest.find(i)).or_default().insert(n.clone());
        }
        DependencyRelation { blocks: groups.into_values().filter(|b| b.len() >= 2).collect() }
    }
}

impl<N: Ord + fmt::Display> fmt::Display for DependencyRelation<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("{")?;
            for (j, n) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{n}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Rel = DependencyRelation<&'static str>;

    fn rel(blocks: &[&[&'static str]]) -> Rel {
        blocks.iter().fold(Rel::empty(), |acc, b| acc.merge(&Rel::clique(b.iter().copied())))
    }

    #[test]
    fn pair_rejects_self() {
        assert!(Rel::pair("a", "a").is_err());
        assert_eq!(Rel::pair("user", "future").unwrap(), rel(&[&["future", "user"]]));
    }

    #[test]
    fn shared_edge_is_incompatible() {
        let d = Rel::pair("user", "future").unwrap();
        assert!(d.join(&d).is_err());
        assert!(!d.compatible(&d));
    }

    #[test]
    fn four_cycle_is_incompatible() {
        let d12 = rel(&[&["a", "b"], &["c", "d"]]);
        let d34 = rel(&[&["a", "c"], &["b", "d"]]);
        assert!(d12.join(&d34).is_err());
    }

    #[test]
    fn disjoint_domains_join() {
        let d = rel(&[&["a", "b"]]).join(&rel(&[&["c", "d"]])).unwrap();
        assert_eq!(d, rel(&[&["a", "b"], &["c", "d"]]));
    }

    #[test]
    fn star_shapes_join_into_one_block() {
        let d = rel(&[&["a", "b"]]).join(&rel(&[&["b", "c"]])).unwrap();
        assert_eq!(d, rel(&[&["a", "b", "c"]]));
        assert!(d.related(&"a", &"c"));
    }

    #[test]
    fn restriction() {
        assert_eq!(rel(&[&["a", "b", "c"]]).restrict(&"a"), rel(&[&["b", "c"]]));
        assert_eq!(rel(&[&["a", "b"]]).restrict(&"c"), rel(&[&["a", "b"]]));
        assert!(rel(&[&["a", "b"]]).restrict(&"a").is_empty());
        assert!(Rel::pair("a", "b").unwrap().restrict(&"b").is_empty());
    }

    #[test]
    fn display_sorted() {
        assert_eq!(rel(&[&["b", "a"], &["d", "c"]]).to_string(), "{{a, b}, {c, d}}");
    }
}
