use std::collections::BTreeMap;

use crate::syntax::Name;
use crate::types::TypeExpr;

/// Synthesized usage of each free name.
pub type TypeEnv = BTreeMap<Name, TypeExpr>;

/// `Γ1 · Γ2`: shared names are used according to the product of both usages.
pub fn combine_env(g1: &TypeEnv, g2: &TypeEnv) -> TypeEnv {
    let mut out = g1.clone();
    for (name, ty) in g2 {
        out.entry(name.clone())
            .and_modify(|t| *t = TypeExpr::prod([t.clone(), ty.clone()]))
            .or_insert_with(|| ty.clone());
    }
    out
}

/// Usage of a conditional: each name is used as in one arm or the other,
/// and a name missing from an arm is used according to `1` there.
pub fn choice_env(g1: &TypeEnv, g2: &TypeEnv) -> TypeEnv {
    let mut out = TypeEnv::new();
    for name in g1.keys().chain(g2.keys()) {
        let a = g1.get(name).cloned().unwrap_or(TypeExpr::One);
        let b = g2.get(name).cloned().unwrap_or(TypeExpr::One);
        out.insert(name.clone(), TypeExpr::sum([a, b]));
    }
    out
}
