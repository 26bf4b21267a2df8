//! Translation of the surface language into the core calculus: classes,
//! synchronous calls, `let`, and anonymous objects.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use super::ast::*;
use super::core::*;
use super::{FrontendError, Span};
use crate::types::{Tag, TypeExpr, TypeTable};

pub const CLOSURE: &str = "CLOSURE";
pub const REPLY: &str = "Reply";

/// Declared types of the builtin objects.
pub fn builtin_type(id: u32) -> Option<TypeExpr> {
    let n = TypeExpr::number;
    match id {
        SYSTEM_ID => Some(TypeExpr::star(TypeExpr::msg("Print", vec![n()]))),
        NUMBER_ID => Some(TypeExpr::star(TypeExpr::msg(
            "Pow",
            vec![n(), n(), TypeExpr::msg(REPLY, vec![n()])],
        ))),
        _ => None,
    }
}

pub fn desugar(program: &SurfaceProgram, next: u32) -> Result<CoreProgram, FrontendError> {
    let decls: Vec<(String, TypeExpr)> =
        program.types.iter().map(|d| (d.name.clone(), d.ty.clone())).collect();
    let table = TypeTable::resolve(decls).map_err(|source| {
        let name = match &source {
            crate::types::TypeTableError::Duplicate(n)
            | crate::types::TypeTableError::HeadCycle(n, _) => Some(n.clone()),
            crate::types::TypeTableError::Arity { owner, .. } => Some(owner.clone()),
            crate::types::TypeTableError::Unknown(_) => None,
        };
        let span = program
            .types
            .iter()
            .rev()
            .find(|d| Some(&d.name) == name.as_ref())
            .or(program.types.first())
            .map(|d| d.span)
            .unwrap_or_default();
        FrontendError::TypeTable { span, source }
    })?;
    let mut d = Desugarer { table, next, globals: BTreeMap::new(), conts: 0, anons: 0, results: 0 };
    let process = d.process(&program.body)?;
    check_closed(&process, &d.globals)?;
    Ok(CoreProgram { process, table: d.table })
}

enum Hoisted<'a> {
    Call { result: Name, target: Name, tag: Tag, args: Vec<CExpr>, span: Span },
    Block { name: Name, rules: &'a [Rule], span: Span },
}

struct Desugarer {
    table: TypeTable,
    next: u32,
    /// Classes in scope and their declared types.
    globals: BTreeMap<u32, TypeExpr>,
    conts: u32,
    anons: u32,
    results: u32,
}

fn err(span: Span, message: impl Into<String>) -> FrontendError {
    FrontendError::Desugar { span, message: message.into() }
}

fn name(ident: &Ident) -> Name {
    Name { id: ident.id, text: ident.name.clone() }
}

impl Desugarer {
    fn fresh(&mut self, text: impl Into<String>) -> Name {
        let id = self.next;
        self.next += 1;
        Name { id, text: text.into() }
    }

    fn is_global(&self, n: &Name) -> bool {
        n.is_builtin() || self.globals.contains_key(&n.id)
    }

    fn annotation(&self, ty: &TypeExpr, span: Span) -> Result<TypeExpr, FrontendError> {
        self.table
            .close(ty.clone())
            .map_err(|source| FrontendError::TypeTable { span, source })
    }

    fn process(&mut self, p: &Proc) -> Result<Process, FrontendError> {
        match p {
            Proc::Done(_) => Ok(Process::Done),
            Proc::Send { target, msgs, span } => {
                let mut items = Vec::new();
                let mut out = Vec::new();
                for m in msgs {
                    let args = m
                        .args
                        .iter()
                        .map(|a| self.expr(a, &mut items))
                        .collect::<Result<Vec<_>, _>>()?;
                    out.push(CMsg { tag: m.tag.clone(), args, span: m.span });
                }
                let send = Process::Send { target: name(target), msgs: out, span: *span };
                self.wrap(items, send)
            }
            Proc::Par(ps) => {
                Ok(Process::par(ps.iter().map(|q| self.process(q)).collect::<Result<_, _>>()?))
            }
            Proc::New { name: n, ty, rules, body, span } => {
                let ty = ty.as_ref().map(|t| self.annotation(t, *span)).transpose()?;
                let rules = self.rules(rules)?;
                check_arities(&rules)?;
                let def = ObjDef { name: name(n), ty, stateless: false, rules, span: *span };
                Ok(Process::New(Rc::new(def), Box::new(self.process(body)?)))
            }
            Proc::Class { name: n, ty, rules, body, span } => {
                let Some(ty) = ty else {
                    return Err(err(*span, format!("class `{}` needs a type annotation", n.name)));
                };
                let ty = self.annotation(ty, *span)?;
                self.globals.insert(n.id, ty.clone());
                let rules = self.rules(rules)?;
                check_arities(&rules)?;
                if let Some(r) = rules.iter().find(|r| r.pattern.len() != 1) {
                    return Err(err(
                        r.span,
                        format!("class `{}` has a pattern with more than one message", n.name),
                    ));
                }
                let def = ObjDef { name: name(n), ty: Some(ty), stateless: true, rules, span: *span };
                Ok(Process::New(Rc::new(def), Box::new(self.process(body)?)))
            }
            Proc::Let { names, value, body, span } => {
                let mut items = Vec::new();
                if let Expr::Call { target, tag, args, span: cspan } = value {
                    let args = args
                        .iter()
                        .map(|a| self.expr(a, &mut items))
                        .collect::<Result<Vec<_>, _>>()?;
                    let results: Vec<Name> = names.iter().map(name).collect();
                    let body = self.process(body)?;
                    let call = self.sync_call(results, name(target), tag.clone(), args, body, *cspan)?;
                    return self.wrap(items, call);
                }
                if names.len() != 1 {
                    return Err(err(*span, "only a synchronous call can bind several names"));
                }
                let v = self.expr(value, &mut items)?;
                let body = self.process(body)?;
                let body = substitute(&body, names[0].id, &v)
                    .map_err(|s| err(s, format!("`{}` is not a name and cannot be a target", names[0].name)))?;
                self.wrap(items, body)
            }
            Proc::If { cond, then, els, span } => {
                let mut items = Vec::new();
                let cond = self.expr(cond, &mut items)?;
                let p = Process::If {
                    cond,
                    then: Box::new(self.process(then)?),
                    els: Box::new(self.process(els)?),
                    span: *span,
                };
                self.wrap(items, p)
            }
        }
    }

    fn rules(&mut self, rules: &[Rule]) -> Result<Vec<CRule>, FrontendError> {
        rules
            .iter()
            .map(|r| {
                Ok(CRule {
                    pattern: r
                        .pattern
                        .iter()
                        .map(|p| CPattern {
                            tag: p.tag.clone(),
                            params: p.params.iter().map(name).collect(),
                            span: p.span,
                        })
                        .collect(),
                    body: self.process(&r.body)?,
                    span: r.span,
                })
            })
            .collect()
    }

    fn expr<'a>(&mut self, e: &'a Expr, items: &mut Vec<Hoisted<'a>>) -> Result<CExpr, FrontendError> {
        Ok(match e {
            Expr::Num(n, _) => CExpr::Num(*n),
            Expr::Bool(b, _) => CExpr::Bool(*b),
            Expr::Var(i) => CExpr::Var(name(i)),
            Expr::Neg(inner, _) => match self.expr(inner, items)? {
                CExpr::Num(n) => CExpr::Num(-n),
                other => CExpr::Neg(Box::new(other)),
            },
            Expr::Bin(op, l, r) => {
                let l = self.expr(l, items)?;
                let r = self.expr(r, items)?;
                CExpr::Bin(*op, Box::new(l), Box::new(r))
            }
            Expr::Call { target, tag, args, span } => {
                let args = args.iter().map(|a| self.expr(a, items)).collect::<Result<Vec<_>, _>>()?;
                self.results += 1;
                let result = self.fresh(format!("r{}", self.results));
                items.push(Hoisted::Call {
                    result: result.clone(),
                    target: name(target),
                    tag: tag.clone(),
                    args,
                    span: *span,
                });
                CExpr::Var(result)
            }
            Expr::Block(rules, span) => {
                self.anons += 1;
                let n = self.fresh(format!("anon{}", self.anons));
                items.push(Hoisted::Block { name: n.clone(), rules, span: *span });
                CExpr::Var(n)
            }
        })
    }

    fn wrap(&mut self, items: Vec<Hoisted<'_>>, mut body: Process) -> Result<Process, FrontendError> {
        for item in items.into_iter().rev() {
            body = match item {
                Hoisted::Call { result, target, tag, args, span } => {
                    self.sync_call(vec![result], target, tag, args, body, span)?
                }
                Hoisted::Block { name, rules, span } => self.block(name, rules, body, span)?,
            };
        }
        Ok(body)
    }

    /// Free names of `body` that a continuation must capture.
    fn captures(&self, free: Vec<Name>, bound: &BTreeSet<u32>) -> Vec<Name> {
        free.into_iter().filter(|n| !bound.contains(&n.id) && !self.is_global(n)).collect()
    }

    fn closure(&mut self, captured: &[Name]) -> (Vec<Name>, HashMap<u32, Name>) {
        let copies: Vec<Name> = captured.iter().map(|y| self.fresh(y.text.clone())).collect();
        let map = captured.iter().map(|y| y.id).zip(copies.iter().cloned()).collect();
        (copies, map)
    }

    fn sync_call(
        &mut self,
        results: Vec<Name>,
        target: Name,
        tag: Tag,
        mut args: Vec<CExpr>,
        body: Process,
        span: Span,
    ) -> Result<Process, FrontendError> {
        let known = builtin_type(target.id).or_else(|| self.globals.get(&target.id).cloned());
        if let Some(ty) = known {
            match tag_arity(&ty, &tag, &self.table) {
                Some(n) if n == args.len() + 1 => {}
                _ => {
                    return Err(err(
                        span,
                        format!("`{target}.{tag}` has no slot for a continuation after {} argument(s)", args.len()),
                    ))
                }
            }
        }
        let bound: BTreeSet<u32> = results.iter().map(|r| r.id).collect();
        let captured = self.captures(body.free_names(), &bound);
        let (copies, map) = self.closure(&captured);
        self.conts += 1;
        let cont = self.fresh(format!("cont{}", self.conts));
        let mut pattern = Vec::new();
        if !copies.is_empty() {
            pattern.push(CPattern { tag: CLOSURE.into(), params: copies, span });
        }
        pattern.push(CPattern { tag: REPLY.into(), params: results, span });
        let def = ObjDef {
            name: cont.clone(),
            ty: None,
            stateless: false,
            rules: vec![CRule { pattern, body: body.rename(&map), span }],
            span,
        };
        args.push(CExpr::Var(cont.clone()));
        let mut parts = Vec::new();
        if !captured.is_empty() {
            parts.push(closure_send(&cont, &captured, span));
        }
        parts.push(Process::Send { target, msgs: vec![CMsg { tag, args, span }], span });
        Ok(Process::New(Rc::new(def), Box::new(Process::par(parts))))
    }

    fn block(&mut self, anon: Name, rules: &[Rule], body: Process, span: Span) -> Result<Process, FrontendError> {
        let mut rules = self.rules(rules)?;
        check_arities(&rules)?;
        let mut free = Vec::new();
        let mut seen = BTreeSet::new();
        for r in &rules {
            let params: BTreeSet<u32> = r.params().map(|p| p.id).collect();
            for n in self.captures(r.body.free_names(), &params) {
                if seen.insert(n.id) {
                    free.push(n);
                }
            }
        }
        if free.is_empty() {
            let def = ObjDef { name: anon, ty: None, stateless: false, rules, span };
            return Ok(Process::New(Rc::new(def), Box::new(body)));
        }
        if rules.len() > 1 {
            return Err(err(span, "an anonymous object with several reactions cannot capture names"));
        }
        let (copies, map) = self.closure(&free);
        let rule = &mut rules[0];
        rule.body = rule.body.rename(&map);
        rule.pattern.insert(0, CPattern { tag: CLOSURE.into(), params: copies, span });
        let def = ObjDef { name: anon.clone(), ty: None, stateless: false, rules, span };
        let body = Process::par(vec![closure_send(&anon, &free, span), body]);
        Ok(Process::New(Rc::new(def), Box::new(body)))
    }
}

fn closure_send(target: &Name, captured: &[Name], span: Span) -> Process {
    Process::Send {
        target: target.clone(),
        msgs: vec![CMsg {
            tag: CLOSURE.into(),
            args: captured.iter().cloned().map(CExpr::Var).collect(),
            span,
        }],
        span,
    }
}

fn check_arities(rules: &[CRule]) -> Result<(), FrontendError> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for p in rules.iter().flat_map(|r| &r.pattern) {
        match seen.insert(&p.tag, p.params.len()) {
            Some(n) if n != p.params.len() => {
                return Err(err(
                    p.span,
                    format!("tag `{}` used with arities {n} and {}", p.tag, p.params.len()),
                ));
            }
            _ => {}
        }
    }
    Ok(())
}

/// Arity of the first message with `tag` found in `ty`, following references.
pub fn tag_arity(ty: &TypeExpr, tag: &str, table: &TypeTable) -> Option<usize> {
    fn walk(ty: &TypeExpr, tag: &str, table: &TypeTable, seen: &mut BTreeSet<String>) -> Option<usize> {
        match ty {
            TypeExpr::Msg(t, args) if t == tag => Some(args.len()),
            TypeExpr::Sum(ts) | TypeExpr::Prod(ts) => ts.iter().find_map(|t| walk(t, tag, table, seen)),
            TypeExpr::Star(t) => walk(t, tag, table, seen),
            TypeExpr::Ref(n) if seen.insert(n.clone()) => walk(table.get(n)?, tag, table, seen),
            _ => None,
        }
    }
    walk(ty, tag, table, &mut BTreeSet::new())
}

/// Replaces `id` by `value`; fails with the span of a send that targets `id`
/// when `value` is not a name.
fn substitute(p: &Process, id: u32, value: &CExpr) -> Result<Process, Span> {
    let expr = |e: &CExpr| subst_expr(e, id, value);
    Ok(match p {
        Process::Done => Process::Done,
        Process::Send { target, msgs, span } => {
            let target = if target.id == id {
                value.as_name().cloned().ok_or(*span)?
            } else {
                target.clone()
            };
            let msgs = msgs
                .iter()
                .map(|m| CMsg { tag: m.tag.clone(), args: m.args.iter().map(expr).collect(), span: m.span })
                .collect();
            Process::Send { target, msgs, span: *span }
        }
        Process::Par(ps) => {
            Process::Par(ps.iter().map(|q| substitute(q, id, value)).collect::<Result<_, _>>()?)
        }
        Process::New(def, body) => {
            let mut d = (**def).clone();
            for r in &mut d.rules {
                r.body = substitute(&r.body, id, value)?;
            }
            Process::New(Rc::new(d), Box::new(substitute(body, id, value)?))
        }
        Process::If { cond, then, els, span } => Process::If {
            cond: expr(cond),
            then: Box::new(substitute(then, id, value)?),
            els: Box::new(substitute(els, id, value)?),
            span: *span,
        },
    })
}

fn subst_expr(e: &CExpr, id: u32, value: &CExpr) -> CExpr {
    match e {
        CExpr::Var(n) if n.id == id => value.clone(),
        CExpr::Neg(e) => CExpr::Neg(Box::new(subst_expr(e, id, value))),
        CExpr::Bin(op, l, r) => CExpr::Bin(
            *op,
            Box::new(subst_expr(l, id, value)),
            Box::new(subst_expr(r, id, value)),
        ),
        other => other.clone(),
    }
}

/// Reaction bodies may only use their pattern variables, the object itself
/// and global objects.
fn check_closed(p: &Process, globals: &BTreeMap<u32, TypeExpr>) -> Result<(), FrontendError> {
    for def in p.definitions() {
        for r in &def.rules {
            let params: BTreeSet<u32> = r.params().map(|x| x.id).collect();
            let outside = r.body.free_names().into_iter().find(|n| {
                n.id != def.name.id && !params.contains(&n.id) && !n.is_builtin() && !globals.contains_key(&n.id)
            });
            if let Some(n) = outside {
                return Err(err(
                    r.span,
                    format!("a reaction of `{}` uses `{}` from an enclosing scope", def.name, n),
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::compile;

    const FUTURE: &str = "type #Future = (EMPTY · Resolve(#Number) + RESOLVED(#Number)) · *Get(#Reply)
and #FutureUser = Resolve(#Number) · *Get(#Reply)
and #Reply = Reply(#Number)
class Future : *New(Reply(#FutureUser)) [ New(r) ▶
  new this : #Future
  [ EMPTY & Resolve(n) ▶ this!RESOLVED(n)
  | RESOLVED(n) & Get(user) ▶ user!Reply(n) & this!RESOLVED(n) ]
  in this!EMPTY & r!Reply(this) ]
";

    #[test]
    fn pure_let_substitutes() {
        let p = compile("let x = 1 in done").unwrap();
        assert_eq!(p.process, Process::Done);
        let p = compile("let x = 1 + 2 in System!Print(x)").unwrap();
        assert_eq!(pretty(&p.process), "System!Print(1 + 2)");
    }

    #[test]
    fn sync_deadlock_expansion() {
        let src = format!("{FUTURE}let future = Future.New in future!Resolve(future.Get)");
        let p = compile(&src).unwrap();
        let Process::New(class, rest) = &p.process else { panic!() };
        assert!(class.stateless);
        let expected = compile(&format!(
            "{FUTURE}new cont1 [ Reply(future) ▶
               new cont2 [ CLOSURE(future) & Reply(n) ▶ future!Resolve(n) ]
               in cont2!CLOSURE(future) & future!Get(cont2) ]
             in Future!New(cont1)"
        ))
        .unwrap();
        let Process::New(_, expected_rest) = &expected.process else { panic!() };
        assert!(alpha_eq(rest, expected_rest), "{}", pretty(rest));
    }

    #[test]
    fn anonymous_block_threads_closure() {
        let src = "type #W = L(#Number) + 1
            new w : #W [ L(v) ▶ done ] in
            Number!Pow(2, 3, [ Reply(v) ▶ w!L(v) ])";
        let p = compile(src).unwrap();
        let text = pretty(&p.process);
        assert!(text.contains("CLOSURE(w_"), "{text}");
        assert!(text.contains("anon1!CLOSURE(w"), "{text}");
        let defs = p.process.definitions();
        assert_eq!(defs.len(), 2);
        assert_eq!(defs[1].rules[0].pattern[0].tag, CLOSURE);
    }

    #[test]
    fn sync_calls_add_one_object_each() {
        let src = format!(
            "{FUTURE}let future = Future.New in
             future!Resolve(42) & System!Print(future.Get) & System!Print(future.Get)"
        );
        let p = compile(&src).unwrap();
        // class + three continuations + the future instance
        assert_eq!(p.process.definitions().len(), 5);
        let Process::New(_, rest) = &p.process else { panic!() };
        // Future!New, Resolve, two Prints, two Gets
        assert_eq!(rest.message_count(), 6);
    }

    #[test]
    fn errors() {
        assert!(compile("class K [ New(r) ▶ done ] done").unwrap_err().to_string().contains("annotation"));
        assert!(compile("System!Print(System.Print(1))").unwrap_err().to_string().contains("continuation"));
        let err = compile("new a [ M(x) ▶ new b [ N ▶ x!M(x) ] in done ] in done").unwrap_err();
        assert!(err.to_string().contains("enclosing scope"), "{err}");
        let err = compile("type #T = #T + A\ndone").unwrap_err();
        assert!(matches!(err, FrontendError::TypeTable { .. }));
    }
}
