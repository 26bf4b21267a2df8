//! Re-typing of running solutions.

use std::collections::HashSet;
use std::rc::Rc;

use super::{Checker, Code, Decl, Diagnostic, Origin};
use crate::runtime::{Soup, Value};
use crate::semilinear::{live, Verdict};
use crate::syntax::core::{CExpr, CMsg, Name, Process};
use crate::syntax::Span;
use crate::types::TypeExpr;

/// Runtime objects get names above every source identifier.
const OBJECT_IDS: u32 = 1 << 30;

#[derive(Clone, Debug, Default)]
pub struct SolutionCheck {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
}

fn object_name(soup: &Soup, o: usize) -> Name {
    Name { id: OBJECT_IDS + o as u32, text: soup.label(o) }
}

/// Checks a running solution: every definition against its type, liveness
/// per definition, and the pending messages against the declared types.
pub fn check_solution(soup: &Soup, bound: usize) -> SolutionCheck {
    let mut c = Checker::new(soup.table(), bound);
    let objects = soup.objects();
    for (o, obj) in objects.iter().enumerate().filter(|(_, o)| !o.is_builtin()) {
        c.decls.insert(
            OBJECT_IDS + o as u32,
            Decl { ty: obj.ty.clone(), stateless: obj.stateless, origin: Origin::New },
        );
    }

    let mut seen = HashSet::new();
    for obj in objects {
        let (Some(def), Some(ty)) = (&obj.def, &obj.ty) else { continue };
        if !seen.insert(Rc::as_ptr(def)) {
            continue;
        }
        for (id, v) in obj.env.iter() {
            let decl = match v {
                Value::Obj(r) => Decl { ty: objects[*r].ty.clone(), stateless: objects[*r].stateless, origin: Origin::New },
                _ => Decl { ty: Some(TypeExpr::number()), stateless: false, origin: Origin::Pattern },
            };
            c.decls.entry(*id).or_insert(decl);
        }
        let patterns = c.check_class(def, ty);
        if !live(ty, &patterns, soup.table()) {
            c.diag(
                Code::NotLive,
                def.span,
                format!("some configuration of {ty} triggers no reaction of `{}`", def.name),
                &[&def.name],
                &[ty],
            );
        }
    }

    let arg = |v: &Value| match v {
        Value::Obj(r) => CExpr::Var(object_name(soup, *r)),
        Value::Num(n) => CExpr::Num(*n),
        Value::Bool(b) => CExpr::Bool(*b),
    };
    let mut sends = Vec::new();
    for o in 0..objects.len() {
        for m in soup.mailbox(o) {
            let msg = CMsg { tag: m.tag.clone(), args: m.args.iter().map(arg).collect(), span: Span::default() };
            sends.push(Process::Send { target: object_name(soup, o), msgs: vec![msg], span: Span::default() });
        }
    }
    let (mut env, _) = c.check_process(&Process::Par(sends));

    for (o, obj) in objects.iter().enumerate().filter(|(_, o)| !o.is_builtin()) {
        let name = object_name(soup, o);
        let usage = env.remove(&name).unwrap_or(TypeExpr::One);
        let Some(t) = &obj.ty else { continue };
        if let Verdict::No(cfg) = c.subtype(t, &usage, || format!("object `{name}`")) {
            c.diag(
                Code::ProtocolViolation,
                Span::default(),
                format!("`{name}` is declared {t} but its pending messages form {usage}: {cfg} is not allowed"),
                &[&name],
                &[t, &usage],
            );
        }
    }
    let diagnostics = c.diagnostics;
    SolutionCheck { ok: diagnostics.is_empty(), diagnostics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::check_program;
    use crate::runtime::RunConfig;
    use crate::syntax::compile;

    fn states(src: &str, seed: u64, steps: usize) -> Vec<SolutionCheck> {
        let checked = check_program(&compile(src).unwrap(), 4);
        let mut out = Vec::new();
        let cfg = RunConfig { seed, max_steps: steps, monitors: false };
        crate::runtime::run_with(&checked.program, &cfg, |s| out.push(check_solution(s, 4))).unwrap();
        out
    }

    #[test]
    fn accepted_programs_stay_typed() {
        for src in [
            include_str!("../../examples/future_ok.cob"),
            include_str!("../../examples/sync_fixed.cob"),
            include_str!("../../examples/sieve.cob"),
            include_str!("../../examples/pi.cob"),
        ] {
            for seed in 0..3 {
                for (i, s) in states(src, seed, 60).iter().enumerate() {
                    assert!(s.ok, "seed {seed} state {i}: {:?}", s.diagnostics);
                }
            }
        }
    }

    #[test]
    fn halted_deadlock_is_ill_typed() {
        let s = states(include_str!("../../examples/future_deadlock.cob"), 0, 10);
        let last = s.last().unwrap();
        assert!(!last.ok);
        assert!(last.diagnostics.iter().any(|d| d.span == Span::default() && d.names.contains(&"future#2".to_string())), "{:?}", last.diagnostics);
    }
}
