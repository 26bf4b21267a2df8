use super::{Tag, TypeExpr, TypeTable};

/// Canonical form modulo the commutative Kleene algebra laws that can be
/// applied syntactically: flattening, sorting, `+` idempotence, units and
/// absorption. Arguments of message types are normalized as well.
pub fn normalize(t: &TypeExpr) -> TypeExpr {
    match t {
        TypeExpr::Zero | TypeExpr::One | TypeExpr::Base(_) | TypeExpr::Ref(_) => t.clone(),
        TypeExpr::Msg(tag, args) => TypeExpr::Msg(tag.clone(), args.iter().map(normalize).collect()),
        TypeExpr::Sum(ts) => {
            let mut items = Vec::new();
            for t in ts {
                match normalize(t) {
                    TypeExpr::Zero => {}
                    TypeExpr::Sum(inner) => items.extend(inner),
                    other => items.push(other),
                }
            }
            items.sort();
            items.dedup();
            TypeExpr::sum(items)
        }
        TypeExpr::Prod(ts) => {
            let mut items = Vec::new();
            for t in ts {
                match normalize(t) {
                    TypeExpr::Zero => return TypeExpr::Zero,
                    TypeExpr::One => {}
                    TypeExpr::Prod(inner) => items.extend(inner),
                    other => items.push(other),
                }
            }
            items.sort();
            TypeExpr::prod(items)
        }
        TypeExpr::Star(body) => {
            // *(1 + t) = *t, *0 = *1 = 1, **t = *t
            let body = match normalize(body) {
                TypeExpr::Sum(items) => {
                    TypeExpr::sum(items.into_iter().filter(|i| *i != TypeExpr::One))
                }
                other => other,
            };
            match body {
                TypeExpr::Zero | TypeExpr::One => TypeExpr::One,
                s @ TypeExpr::Star(_) => s,
                other => TypeExpr::star(other),
            }
        }
    }
}

/// Whether the empty configuration is valid for `t`.
pub fn nullable(t: &TypeExpr, table: &TypeTable) -> bool {
    match t {
        TypeExpr::Zero | TypeExpr::Msg(..) => false,
        TypeExpr::One | TypeExpr::Base(_) | TypeExpr::Star(_) => true,
        TypeExpr::Sum(ts) => ts.iter().any(|t| nullable(t, table)),
        TypeExpr::Prod(ts) => ts.iter().all(|t| nullable(t, table)),
        TypeExpr::Ref(n) => nullable(table.lookup(n), table),
    }
}

/// A relevant type must still be used: its empty configuration is invalid.
pub fn relevant(t: &TypeExpr, table: &TypeTable) -> bool {
    !nullable(t, table)
}

/// Whether `t` has at least one valid configuration.
pub fn usable(t: &TypeExpr, table: &TypeTable) -> bool {
    match t {
        TypeExpr::Zero => false,
        TypeExpr::One | TypeExpr::Base(_) | TypeExpr::Msg(..) | TypeExpr::Star(_) => true,
        TypeExpr::Sum(ts) => ts.iter().any(|t| usable(t, table)),
        TypeExpr::Prod(ts) => ts.iter().all(|t| usable(t, table)),
        TypeExpr::Ref(n) => usable(table.lookup(n), table),
    }
}

/// Residual of `t` after one message with tag `tag` has been sent.
pub fn derivative(t: &TypeExpr, tag: &str, table: &TypeTable) -> TypeExpr {
    normalize(&raw_derivative(t, tag, table))
}

fn raw_derivative(t: &TypeExpr, tag: &str, table: &TypeTable) -> TypeExpr {
    match t {
        TypeExpr::Zero | TypeExpr::One | TypeExpr::Base(_) => TypeExpr::Zero,
        TypeExpr::Msg(m, _) => {
            if m == tag {
                TypeExpr::One
            } else {
                TypeExpr::Zero
            }
        }
        TypeExpr::Sum(ts) => TypeExpr::sum(ts.iter().map(|t| raw_derivative(t, tag, table))),
        TypeExpr::Prod(ts) => {
            let mut terms = Vec::new();
            for (i, ti) in ts.iter().enumerate() {
                let d = normalize(&raw_derivative(ti, tag, table));
                if d == TypeExpr::Zero {
                    continue;
                }
                let mut factors = Vec::with_capacity(ts.len());
                factors.push(d);
                factors.extend(ts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, t)| t.clone()));
                terms.push(TypeExpr::prod(factors));
            }
            TypeExpr::sum(terms)
        }
        TypeExpr::Star(body) => {
            TypeExpr::prod([raw_derivative(body, tag, table), t.clone()])
        }
        TypeExpr::Ref(n) => raw_derivative(table.lookup(n), tag, table),
    }
}

/// Folds [`derivative`] over a sequence of tags.
pub fn derivative_config<'a, I>(t: &TypeExpr, tags: I, table: &TypeTable) -> TypeExpr
where
    I: IntoIterator<Item = &'a Tag>,
{
    tags.into_iter()
        .fold(normalize(t), |acc, tag| derivative(&acc, tag, table))
}
