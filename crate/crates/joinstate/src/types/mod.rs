//! Behavioral types: commutative regular expressions over message types.
//!
//! A [`TypeExpr`] is a finite expression whose `Ref` leaves point into a
//! [`TypeTable`] of named, possibly mutually recursive definitions. Together
//! they denote regular type trees. References in head position (outside of
//! message arguments) must form an acyclic graph, which keeps every head
//! unfolding finite.

mod algebra;
mod enumerate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use algebra::{derivative, derivative_config, normalize, nullable, relevant, usable};
pub use enumerate::{enumerate_configurations, Configuration, MsgType};

/// Message tag, e.g. `Get` or `RESOLVED`.
pub type Tag = String;

/// Name of a builtin numeric type.
pub const NUMBER: &str = "#Number";
/// Name of a builtin boolean type.
pub const BOOL: &str = "#Bool";

/// A behavioral type.
///
/// The derived ordering ranks constructors first, then tags, then children,
/// which is the canonical order used by [`normalize`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeExpr {
    Zero,
    One,
    /// Basic values (`#Number`, `#Bool`): usable, irrelevant, no messages.
    Base(String),
    Msg(Tag, Vec<TypeExpr>),
    Sum(Vec<TypeExpr>),
    Prod(Vec<TypeExpr>),
    Star(Box<TypeExpr>),
    Ref(String),
}

impl TypeExpr {
    pub fn msg(tag: impl Into<Tag>, args: Vec<TypeExpr>) -> TypeExpr {
        TypeExpr::Msg(tag.into(), args)
    }

    /// Nullary message type.
    pub fn atom(tag: impl Into<Tag>) -> TypeExpr {
        TypeExpr::Msg(tag.into(), Vec::new())
    }

    pub fn sum(items: impl IntoIterator<Item = TypeExpr>) -> TypeExpr {
        let items: Vec<_> = items.into_iter().collect();
        match items.len() {
            0 => TypeExpr::Zero,
            1 => items.into_iter().next().unwrap(),
            _ => TypeExpr::Sum(items),
        }
    }

    pub fn prod(items: impl IntoIterator<Item = TypeExpr>) -> TypeExpr {
        let items: Vec<_> = items.into_iter().collect();
        match items.len() {
            0 => TypeExpr::One,
            1 => items.into_iter().next().unwrap(),
            _ => TypeExpr::Prod(items),
        }
    }

    pub fn star(body: TypeExpr) -> TypeExpr {
        TypeExpr::Star(Box::new(body))
    }

    pub fn number() -> TypeExpr {
        TypeExpr::Base(NUMBER.to_string())
    }

    pub fn is_base(&self) -> bool {
        matches!(self, TypeExpr::Base(_))
    }

    /// References occurring outside message arguments.
    pub fn head_refs(&self, out: &mut Vec<String>) {
        match self {
            TypeExpr::Zero | TypeExpr::One | TypeExpr::Base(_) | TypeExpr::Msg(..) => {}
            TypeExpr::Sum(ts) | TypeExpr::Prod(ts) => ts.iter().for_each(|t| t.head_refs(out)),
            TypeExpr::Star(t) => t.head_refs(out),
            TypeExpr::Ref(n) => out.push(n.clone()),
        }
    }

    /// Every reference, including those in argument position.
    pub fn all_refs(&self, out: &mut Vec<String>) {
        match self {
            TypeExpr::Zero | TypeExpr::One | TypeExpr::Base(_) => {}
            TypeExpr::Msg(_, args) => args.iter().for_each(|t| t.all_refs(out)),
            TypeExpr::Sum(ts) | TypeExpr::Prod(ts) => ts.iter().for_each(|t| t.all_refs(out)),
            TypeExpr::Star(t) => t.all_refs(out),
            TypeExpr::Ref(n) => out.push(n.clone()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            TypeExpr::Sum(_) => 0,
            TypeExpr::Prod(_) => 1,
            _ => 2,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            TypeExpr::Zero => f.write_str("0")?,
            TypeExpr::One => f.write_str("1")?,
            TypeExpr::Base(n) | TypeExpr::Ref(n) => f.write_str(n)?,
            TypeExpr::Msg(tag, args) => {
                f.write_str(tag)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        a.fmt_at(f, 0)?;
                    }
                    f.write_str(")")?;
                }
            }
            TypeExpr::Sum(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    t.fmt_at(f, 1)?;
                }
            }
            TypeExpr::Prod(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" · ")?;
                    }
                    t.fmt_at(f, 2)?;
                }
            }
            TypeExpr::Star(t) => {
                f.write_str("*")?;
                t.fmt_at(f, 2)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Errors raised while building a [`TypeTable`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeTableError {
    #[error("duplicate type declaration `{0}`")]
    Duplicate(String),
    #[error("unknown type name `{0}`")]
    Unknown(String),
    #[error("type `{0}` is not contractive: {1}")]
    HeadCycle(String, String),
    #[error("tag `{tag}` used with arities {first} and {second} in `{owner}`")]
    Arity { owner: String, tag: Tag, first: usize, second: usize },
}

/// Named type definitions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeTable {
    defs: BTreeMap<String, TypeExpr>,
}

impl TypeTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from declarations, rejecting duplicates, unknown names
    /// and definitions whose head references loop back on themselves.
    ///
    /// Occurrences of `#Number` and `#Bool` are replaced by base types.
    pub fn resolve<I, S>(decls: I) -> Result<TypeTable, TypeTableError>
    where
        I: IntoIterator<Item = (S, TypeExpr)>,
        S: Into<String>,
    {
        let mut defs = BTreeMap::new();
        for (name, ty) in decls {
            let name = name.into();
            if is_builtin_name(&name) || defs.contains_key(&name) {
                return Err(TypeTableError::Duplicate(name));
            }
            defs.insert(name, ty);
        }
        let open = TypeTable { defs };
        let mut table = TypeTable::new();
        for (name, ty) in &open.defs {
            let ty = open.close(ty.clone())?;
            check_arity(name, &ty)?;
            table.defs.insert(name.clone(), ty);
        }
        table.check_contractive()?;
        Ok(table)
    }

    /// Replaces builtin references by base types and checks that every other
    /// reference is declared.
    pub fn close(&self, ty: TypeExpr) -> Result<TypeExpr, TypeTableError> {
        Ok(match ty {
            TypeExpr::Ref(n) if is_builtin_name(&n) => TypeExpr::Base(n),
            TypeExpr::Ref(n) => {
                if !self.defs.contains_key(&n) {
                    return Err(TypeTableError::Unknown(n));
                }
                TypeExpr::Ref(n)
            }
            TypeExpr::Msg(tag, args) => TypeExpr::Msg(
                tag,
                args.into_iter().map(|a| self.close(a)).collect::<Result<_, _>>()?,
            ),
            TypeExpr::Sum(ts) => {
                TypeExpr::Sum(ts.into_iter().map(|a| self.close(a)).collect::<Result<_, _>>()?)
            }
            TypeExpr::Prod(ts) => {
                TypeExpr::Prod(ts.into_iter().map(|a| self.close(a)).collect::<Result<_, _>>()?)
            }
            TypeExpr::Star(t) => TypeExpr::Star(Box::new(self.close(*t)?)),
            other => other,
        })
    }

    fn check_contractive(&self) -> Result<(), TypeTableError> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        fn visit<'a>(
            table: &'a TypeTable,
            name: &'a str,
            state: &mut BTreeMap<&'a str, u8>,
            path: &mut Vec<&'a str>,
        ) -> Result<(), TypeTableError> {
            match state.get(name) {
                Some(2) => return Ok(()),
                Some(1) => {
                    let start = path.iter().position(|n| *n == name).unwrap_or(0);
                    let mut cycle: Vec<&str> = path[start..].to_vec();
                    cycle.push(name);
                    return Err(TypeTableError::HeadCycle(name.to_string(), cycle.join(" -> ")));
                }
                _ => {}
            }
            state.insert(name, 1);
            path.push(name);
            let mut refs = Vec::new();
            table.defs[name].head_refs(&mut refs);
            for r in refs {
                let (key, _) = table.defs.get_key_value(r.as_str()).unwrap();
                visit(table, key, state, path)?;
            }
            path.pop();
            state.insert(name, 2);
            Ok(())
        }
        for name in self.defs.keys() {
            visit(self, name, &mut state, &mut Vec::new())?;
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&TypeExpr> {
        self.defs.get(name)
    }

    /// Definition of a name known to be in the table.
    pub fn lookup(&self, name: &str) -> &TypeExpr {
        self.defs
            .get(name)
            .unwrap_or_else(|| panic!("type `{name}` is not declared"))
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &TypeExpr)> {
        self.defs.iter()
    }

    /// Follows head references until a non-`Ref` node is reached.
    pub fn unfold<'a>(&'a self, mut ty: &'a TypeExpr) -> &'a TypeExpr {
        while let TypeExpr::Ref(n) = ty {
            ty = self.lookup(n);
        }
        ty
    }

    /// The base type a type head-unfolds to, if any.
    pub fn base_of<'a>(&'a self, ty: &'a TypeExpr) -> Option<&'a str> {
        match self.unfold(ty) {
            TypeExpr::Base(n) => Some(n),
            _ => None,
        }
    }

    /// Names referenced (transitively) from `ty`, in any position.
    pub fn reachable(&self, ty: &TypeExpr) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = Vec::new();
        ty.all_refs(&mut stack);
        while let Some(n) = stack.pop() {
            if seen.insert(n.clone()) {
                if let Some(def) = self.defs.get(&n) {
                    def.all_refs(&mut stack);
                }
            }
        }
        seen
    }
}

impl fmt::Display for TypeTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, ty)) in self.defs.iter().enumerate() {
            let kw = if i == 0 { "type" } else { "and " };
            writeln!(f, "{kw} {name} = {ty}")?;
        }
        Ok(())
    }
}

pub fn is_builtin_name(name: &str) -> bool {
    name == NUMBER || name == BOOL
}

fn check_arity(owner: &str, ty: &TypeExpr) -> Result<(), TypeTableError> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    fn walk<'a>(
        owner: &str,
        ty: &'a TypeExpr,
        seen: &mut BTreeMap<&'a str, usize>,
    ) -> Result<(), TypeTableError> {
        match ty {
            TypeExpr::Msg(tag, args) => {
                if let Some(&first) = seen.get(tag.as_str()) {
                    if first != args.len() {
                        return Err(TypeTableError::Arity {
                            owner: owner.to_string(),
                            tag: tag.clone(),
                            first,
                            second: args.len(),
                        });
                    }
                } else {
                    seen.insert(tag, args.len());
                }
                Ok(())
            }
            TypeExpr::Sum(ts) | TypeExpr::Prod(ts) => {
                ts.iter().try_for_each(|t| walk(owner, t, seen))
            }
            TypeExpr::Star(t) => walk(owner, t, seen),
            _ => Ok(()),
        }
    }
    walk(owner, ty, &mut seen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: &str) -> TypeExpr {
        TypeExpr::Ref(n.into())
    }

    #[test]
    fn head_cycle_is_rejected() {
        let err = TypeTable::resolve([("#T", TypeExpr::sum([r("#T"), TypeExpr::atom("A")]))])
            .unwrap_err();
        assert!(matches!(err, TypeTableError::HeadCycle(..)));
    }

    #[test]
    fn guarded_recursion_is_accepted() {
        let table = TypeTable::resolve([("#T", TypeExpr::msg("m", vec![r("#T")]))]).unwrap();
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn unknown_and_duplicate_names() {
        let err = TypeTable::resolve([("#T", r("#U"))]).unwrap_err();
        assert_eq!(err, TypeTableError::Unknown("#U".into()));
        let err = TypeTable::resolve([("#T", TypeExpr::One), ("#T", TypeExpr::Zero)]).unwrap_err();
        assert_eq!(err, TypeTableError::Duplicate("#T".into()));
    }

    #[test]
    fn builtins_become_base_types() {
        let table =
            TypeTable::resolve([("#R", TypeExpr::msg("Reply", vec![r(NUMBER)]))]).unwrap();
        assert_eq!(
            table.lookup("#R"),
            &TypeExpr::msg("Reply", vec![TypeExpr::number()])
        );
    }

    #[test]
    fn arity_must_be_uniform_within_an_entry() {
        let err = TypeTable::resolve([(
            "#T",
            TypeExpr::sum([TypeExpr::atom("m"), TypeExpr::msg("m", vec![TypeExpr::One])]),
        )])
        .unwrap_err();
        assert!(matches!(err, TypeTableError::Arity { .. }));
    }

    #[test]
    fn display_uses_surface_syntax() {
        let t = TypeExpr::prod([
            TypeExpr::sum([
                TypeExpr::prod([TypeExpr::atom("EMPTY"), TypeExpr::atom("Resolve")]),
                TypeExpr::atom("RESOLVED"),
            ]),
            TypeExpr::star(TypeExpr::msg("Get", vec![r("#Reply")])),
        ]);
        assert_eq!(t.to_string(), "(EMPTY · Resolve + RESOLVED) · *Get(#Reply)");
    }
}
