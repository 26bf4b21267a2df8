//! Type checker for core programs.
//!
//! Usage environments and dependency relations are synthesized bottom-up;
//! declared types are compared against synthesized usages at binders.

mod env;
mod solution;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use serde::Serialize;

pub use env::{choice_env, combine_env, TypeEnv};
pub use solution::{check_solution, SolutionCheck};

use crate::deps::{DependencyRelation, Incompatible};
use crate::semilinear::{arg_determinate, live, Determinacy, SubtypeEngine, Verdict};
use crate::syntax::core::{CExpr, CMsg, CRule, CoreProgram, Name, ObjDef, Process, NUMBER_ID, SYSTEM_ID};
use crate::syntax::desugar::{builtin_type, tag_arity, CLOSURE};
use crate::syntax::Span;
use crate::types::{derivative_config, normalize, usable, Tag, TypeExpr, TypeTable};

pub type Deps = DependencyRelation<Name>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Code {
    ProtocolViolation,
    SelfDependency,
    DuplicateArgument,
    IncompatibleDeps,
    NotLive,
    AmbiguousArgs,
    DeadReaction,
    UnusableArg,
    ObligationUnmet,
    AritySumError,
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub code: Code,
    pub span: Span,
    pub message: String,
    pub names: Vec<String>,
    pub types: Vec<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.code, self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    New,
    Pattern,
    Builtin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub ty: Option<TypeExpr>,
    pub stateless: bool,
    pub origin: Origin,
}

/// Declared type of every binder in scope, keyed by binder id.
pub type DeclTable = HashMap<u32, Decl>;

pub fn builtin_decls() -> DeclTable {
    [SYSTEM_ID, NUMBER_ID]
        .into_iter()
        .map(|id| (id, Decl { ty: builtin_type(id), stateless: true, origin: Origin::Builtin }))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObjectReport {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub inferred: bool,
    pub patterns: Vec<String>,
    pub live: bool,
    /// Dependency blocks of the object's scope before it is restricted away.
    pub deps: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundedUse {
    pub left: String,
    pub right: String,
    pub bound: usize,
    pub context: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Accepted,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub verdict: Outcome,
    pub diagnostics: Vec<Diagnostic>,
    pub objects: Vec<ObjectReport>,
    #[serde(rename = "boundedSubtypeUses")]
    pub bounded_subtype_uses: Vec<BoundedUse>,
}

impl Report {
    pub fn accepted(&self) -> bool {
        self.verdict == Outcome::Accepted
    }

    pub fn codes(&self) -> Vec<Code> {
        self.diagnostics.iter().map(|d| d.code).collect()
    }
}

/// The result of checking a program, together with the program whose
/// unannotated objects carry their inferred types.
pub struct Checked {
    pub report: Report,
    pub program: CoreProgram,
}

pub fn check_program(program: &CoreProgram, bound: usize) -> Checked {
    let mut c = Checker::new(&program.table, bound);
    let (env, _) = c.check_process(&program.process);
    c.check_globals(env, Span::default());
    let process = elaborate(&program.process, &c.inferred);
    let report = c.into_report();
    Checked { report, program: CoreProgram { process, table: program.table.clone() } }
}

fn slot_pattern(msgs: impl IntoIterator<Item = (Tag, usize)>) -> Vec<(Tag, usize)> {
    msgs.into_iter().collect()
}

fn tags_text<'a>(tags: impl IntoIterator<Item = &'a Tag>) -> String {
    let tags: Vec<&str> = tags.into_iter().map(String::as_str).collect();
    format!("⟨{}⟩", tags.join(", "))
}

fn multiset_text(tags: &BTreeMap<Tag, usize>) -> String {
    tags_text(tags.iter().flat_map(|(t, n)| std::iter::repeat(t).take(*n)))
}

pub struct Checker<'a> {
    table: &'a TypeTable,
    engine: SubtypeEngine<'a>,
    pub decls: DeclTable,
    pub diagnostics: Vec<Diagnostic>,
    pub objects: Vec<ObjectReport>,
    pub bounded: Vec<BoundedUse>,
    pub inferred: HashMap<u32, TypeExpr>,
}

impl<'a> Checker<'a> {
    pub fn new(table: &'a TypeTable, bound: usize) -> Self {
        Checker {
            table,
            engine: SubtypeEngine::new(table, bound),
            decls: builtin_decls(),
            diagnostics: Vec::new(),
            objects: Vec::new(),
            bounded: Vec::new(),
            inferred: HashMap::new(),
        }
    }

    pub fn into_report(self) -> Report {
        let verdict = if self.diagnostics.is_empty() { Outcome::Accepted } else { Outcome::Rejected };
        Report {
            verdict,
            diagnostics: self.diagnostics,
            objects: self.objects,
            bounded_subtype_uses: self.bounded,
        }
    }

    pub(crate) fn diag(&mut self, code: Code, span: Span, message: String, names: &[&Name], types: &[&TypeExpr]) {
        self.diagnostics.push(Diagnostic {
            code,
            span,
            message,
            names: names.iter().map(|n| n.text.clone()).collect(),
            types: types.iter().map(|t| t.to_string()).collect(),
        });
    }

    fn decl_type(&self, n: &Name) -> Option<TypeExpr> {
        self.decls.get(&n.id).and_then(|d| d.ty.clone())
    }

    fn is_value(&self, n: &Name) -> bool {
        self.decls
            .get(&n.id)
            .and_then(|d| d.ty.as_ref())
            .is_some_and(|t| self.table.base_of(t).is_some())
    }

    fn is_global(&self, n: &Name) -> bool {
        self.decls.get(&n.id).is_some_and(|d| d.stateless)
    }

    /// `t ≤ s`, recording bounded verdicts.
    pub fn subtype(&mut self, t: &TypeExpr, s: &TypeExpr, context: impl FnOnce() -> String) -> Verdict {
        let v = self.engine.subtype(t, s);
        if let Verdict::YesBounded(bound) = v {
            self.bounded.push(BoundedUse {
                left: t.to_string(),
                right: s.to_string(),
                bound,
                context: context(),
            });
        }
        v
    }

    /// Argument slot types of a molecule sent to an object of type `t`.
    fn resolve_slots(&self, t: &TypeExpr, msgs: &[CMsg]) -> Result<Vec<Vec<TypeExpr>>, (Code, String)> {
        if self.table.base_of(t).is_some() {
            return Err((Code::ProtocolViolation, format!("a value of type {t} cannot receive messages")));
        }
        for m in msgs {
            if let Some(n) = tag_arity(t, &m.tag, self.table) {
                if n != m.args.len() {
                    return Err((
                        Code::AritySumError,
                        format!("`{}` carries {} argument(s) in {t} but is sent with {}", m.tag, n, m.args.len()),
                    ));
                }
            }
        }
        let pattern = slot_pattern(msgs.iter().map(|m| (m.tag.clone(), m.args.len())));
        match arg_determinate(t, &pattern, self.table) {
            Determinacy::Unique(map) => Ok(msgs.iter().map(|m| map[&m.tag].clone()).collect()),
            Determinacy::Dead => Err((
                Code::ProtocolViolation,
                format!("no valid configuration of {t} contains {}", tags_text(msgs.iter().map(|m| &m.tag))),
            )),
            Determinacy::Ambiguous(options) => {
                let options: Vec<String> = options.iter().map(|c| c.to_string()).collect();
                Err((
                    Code::AmbiguousArgs,
                    format!("the argument types of {} are ambiguous in {t}: {}", tags_text(msgs.iter().map(|m| &m.tag)), options.join(" or ")),
                ))
            }
        }
    }

    /// Type of the molecule, usage of its object arguments, and those arguments.
    pub fn check_molecule(&mut self, target: &Name, msgs: &[CMsg], span: Span) -> Option<(TypeExpr, TypeEnv, Vec<Name>)> {
        let Some(t) = self.decl_type(target) else {
            self.diag(Code::ProtocolViolation, span, format!("the type of `{target}` is unknown"), &[target], &[]);
            return None;
        };
        let slots = match self.resolve_slots(&t, msgs) {
            Ok(s) => s,
            Err((code, message)) => {
                self.diag(code, span, format!("`{target}`: {message}"), &[target], &[&t]);
                return None;
            }
        };
        let mut env = TypeEnv::new();
        let mut objects: Vec<Name> = Vec::new();
        let mut parts = Vec::new();
        for (m, slot) in msgs.iter().zip(&slots) {
            parts.push(TypeExpr::msg(m.tag.clone(), slot.clone()));
            for (arg, st) in m.args.iter().zip(slot) {
                let slot_is_value = self.table.base_of(st).is_some();
                match arg.as_name() {
                    Some(n) if !self.is_value(n) => {
                        if slot_is_value {
                            self.diag(
                                Code::ProtocolViolation,
                                m.span,
                                format!("object `{n}` is passed where {} expects a value of type {st}", m.tag),
                                &[n],
                                &[st],
                            );
                            return None;
                        }
                        if !usable(st, self.table) {
                            self.diag(Code::UnusableArg, m.span, format!("argument `{n}` of {} has the unusable type {st}", m.tag), &[n], &[st]);
                            return None;
                        }
                        if n == target {
                            self.diag(Code::SelfDependency, m.span, format!("`{n}` is sent to itself"), &[n], &[]);
                            return None;
                        }
                        if objects.contains(n) {
                            self.diag(Code::DuplicateArgument, m.span, format!("`{n}` occurs twice as an argument of the same molecule"), &[n], &[]);
                            return None;
                        }
                        objects.push(n.clone());
                        env.insert(n.clone(), st.clone());
                    }
                    _ => {
                        let mut names = Vec::new();
                        arg.names(&mut names);
                        if let Some(n) = names.iter().find(|n| !self.is_value(n)) {
                            let n = n.clone();
                            self.diag(Code::ProtocolViolation, m.span, format!("object `{n}` cannot be used in an arithmetic expression"), &[&n], &[]);
                            return None;
                        }
                        if !slot_is_value {
                            self.diag(Code::ProtocolViolation, m.span, format!("a value is passed where {} expects {st}", m.tag), &[], &[st]);
                            return None;
                        }
                    }
                }
            }
        }
        Some((TypeExpr::prod(parts), env, objects))
    }

    pub fn check_process(&mut self, p: &Process) -> (TypeEnv, Deps) {
        match p {
            Process::Done => Default::default(),
            Process::Send { target, msgs, span } => {
                let Some((mol, args, objects)) = self.check_molecule(target, msgs, *span) else {
                    return Default::default();
                };
                let env = combine_env(&TypeEnv::from([(target.clone(), mol)]), &args);
                let deps = if self.is_global(target) {
                    Deps::clique(objects)
                } else {
                    Deps::clique(std::iter::once(target.clone()).chain(objects))
                };
                (env, deps)
            }
            Process::Par(ps) => {
                let mut env = TypeEnv::new();
                let mut deps = Deps::empty();
                for q in ps {
                    let (e, d) = self.check_process(q);
                    env = combine_env(&env, &e);
                    deps = match deps.join(&d) {
                        Ok(j) => j,
                        Err(Incompatible { left, right }) => {
                            self.diag(
                                Code::IncompatibleDeps,
                                span_of(q),
                                format!("the dependency between `{left}` and `{right}` arises more than once"),
                                &[&left, &right],
                                &[],
                            );
                            deps.merge(&d)
                        }
                    };
                }
                (env, deps)
            }
            Process::If { cond, then, els, span } => {
                let mut names = Vec::new();
                cond.names(&mut names);
                if let Some(n) = names.iter().find(|n| !self.is_value(n)) {
                    let n = n.clone();
                    self.diag(Code::ProtocolViolation, *span, format!("object `{n}` cannot be used in a condition"), &[&n], &[]);
                }
                let (e1, d1) = self.check_process(then);
                let (e2, d2) = self.check_process(els);
                (choice_env(&e1, &e2), d1.merge(&d2))
            }
            Process::New(def, body) => self.check_new(def, body),
        }
    }

    fn check_new(&mut self, def: &ObjDef, body: &Process) -> (TypeEnv, Deps) {
        let ty = match &def.ty {
            Some(t) => Some(t.clone()),
            None => {
                let t = self.infer(def, body);
                if t.is_none() {
                    self.diag(
                        Code::ProtocolViolation,
                        def.span,
                        format!("cannot infer a type for `{}`; annotate it", def.name),
                        &[&def.name],
                        &[],
                    );
                }
                t
            }
        };
        let origin = Origin::New;
        self.decls.insert(def.name.id, Decl { ty: ty.clone(), stateless: def.stateless, origin });
        let patterns = match &ty {
            Some(t) => self.check_class(def, t),
            None => Vec::new(),
        };
        let (mut env, deps) = self.check_process(body);
        let usage = env.remove(&def.name).unwrap_or(TypeExpr::One);
        if let Some(t) = &ty {
            let name = def.name.clone();
            let v = self.subtype(t, &usage, || format!("declared type of `{name}`"));
            if let Verdict::No(c) = v {
                self.diag(
                    Code::ProtocolViolation,
                    def.span,
                    format!("`{}` is declared {t} but used as {usage}: {c} is not a valid configuration of {t}", def.name),
                    &[&def.name],
                    &[t, &usage],
                );
            }
            let is_live = live(t, &patterns, self.table);
            if !is_live {
                self.diag(
                    Code::NotLive,
                    def.span,
                    format!("some configuration of {t} carries relevant arguments but triggers no reaction of `{}`", def.name),
                    &[&def.name],
                    &[t],
                );
            }
            self.objects.push(ObjectReport {
                name: def.name.text.clone(),
                ty: t.to_string(),
                inferred: def.ty.is_none(),
                patterns: patterns.iter().map(multiset_text).collect(),
                live: is_live,
                deps: deps.blocks().map(|b| b.iter().map(|n| n.text.clone()).collect()).collect(),
            });
        }
        (env, deps.restrict(&def.name))
    }

    /// Checks every reaction of `def` against `t0` and returns the pattern
    /// tag multisets.
    pub fn check_class(&mut self, def: &ObjDef, t0: &TypeExpr) -> Vec<BTreeMap<Tag, usize>> {
        let mut patterns = Vec::new();
        for rule in &def.rules {
            if let Some(tags) = self.check_reaction(def, t0, rule) {
                patterns.push(tags);
            }
        }
        patterns
    }

    fn check_reaction(&mut self, def: &ObjDef, t0: &TypeExpr, rule: &CRule) -> Option<BTreeMap<Tag, usize>> {
        let tags = rule.tags();
        for p in &rule.pattern {
            if let Some(n) = tag_arity(t0, &p.tag, self.table) {
                if n != p.params.len() {
                    self.diag(
                        Code::AritySumError,
                        p.span,
                        format!("pattern `{}` of `{}` binds {} argument(s) but {t0} gives it {n}", p.tag, def.name, p.params.len()),
                        &[&def.name],
                        &[t0],
                    );
                    return None;
                }
            }
        }
        let pattern = slot_pattern(rule.pattern.iter().map(|p| (p.tag.clone(), p.params.len())));
        let map = match arg_determinate(t0, &pattern, self.table) {
            Determinacy::Unique(map) => map,
            Determinacy::Dead => {
                self.diag(
                    Code::DeadReaction,
                    rule.span,
                    format!("no valid configuration of {t0} contains the pattern {} of `{}`", multiset_text(&tags), def.name),
                    &[&def.name],
                    &[t0],
                );
                return None;
            }
            Determinacy::Ambiguous(options) => {
                let options: Vec<String> = options.iter().map(|c| c.to_string()).collect();
                self.diag(
                    Code::AmbiguousArgs,
                    rule.span,
                    format!("argument types of pattern {} are not determined by {t0}: {}", multiset_text(&tags), options.join(" or ")),
                    &[&def.name],
                    &[t0],
                );
                return Some(tags);
            }
        };
        let mut params = Vec::new();
        for p in &rule.pattern {
            for (x, ty) in p.params.iter().zip(&map[&p.tag]) {
                self.decls.insert(x.id, Decl { ty: Some(ty.clone()), stateless: false, origin: Origin::Pattern });
                params.push((x.clone(), ty.clone()));
            }
        }
        let (mut env, _) = self.check_process(&rule.body);
        for (x, declared) in &params {
            if self.table.base_of(declared).is_some() {
                continue;
            }
            let used = env.remove(x);
            let usage = used.clone().unwrap_or(TypeExpr::One);
            let name = x.clone();
            if let Verdict::No(c) = self.subtype(declared, &usage, || format!("argument `{name}`")) {
                let (code, how) = match used {
                    None => (Code::ObligationUnmet, "never uses it".to_string()),
                    Some(_) => (Code::ProtocolViolation, format!("uses it as {usage}")),
                };
                self.diag(
                    code,
                    rule.span,
                    format!("argument `{x}` has type {declared} but the reaction {how}; {c} is not allowed"),
                    &[x],
                    &[declared, &usage],
                );
            }
        }
        let s0 = env.remove(&def.name).unwrap_or(TypeExpr::One);
        let residual = derivative_config(t0, rule.pattern.iter().map(|p| &p.tag), self.table);
        let after = TypeExpr::prod([residual, s0.clone()]);
        let name = def.name.clone();
        if let Verdict::No(c) = self.subtype(t0, &after, || format!("reaction {} of `{name}`", multiset_text(&tags))) {
            self.diag(
                Code::ProtocolViolation,
                rule.span,
                format!("after {} fires, `{}` may hold {c}, which {t0} does not allow", multiset_text(&tags), def.name),
                &[&def.name],
                &[t0, &s0],
            );
        }
        self.check_globals(env, rule.span);
        Some(tags)
    }

    /// Usages of global objects are checked where they occur.
    fn check_globals(&mut self, env: TypeEnv, span: Span) {
        for (n, usage) in env {
            if !self.is_global(&n) {
                self.diag(Code::ProtocolViolation, span, format!("`{n}` is used outside its scope"), &[&n], &[]);
                continue;
            }
            let Some(t) = self.decl_type(&n) else { continue };
            let name = n.clone();
            if let Verdict::No(c) = self.subtype(&t, &usage, || format!("use of `{name}`")) {
                self.diag(
                    Code::ProtocolViolation,
                    span,
                    format!("`{n}` is declared {t} but used as {usage}: {c} is not allowed"),
                    &[&n],
                    &[&t, &usage],
                );
            }
        }
    }

    /// Type of an unannotated continuation: `CLOSURE(τ̄) · S + 1`, where `S`
    /// is the slot the object is passed in and `τ̄` the usages of the
    /// captured names.
    fn infer(&mut self, def: &ObjDef, body: &Process) -> Option<TypeExpr> {
        let mut uses = Vec::new();
        find_argument_uses(body, &def.name, &mut uses);
        let [(target, msgs, (i, j))] = uses.as_slice() else { return None };
        let tt = self.decl_type(target)?;
        let slots = self.resolve_slots(&tt, msgs).ok()?;
        let s = slots[*i][*j].clone();
        let ty = match def.rules.as_slice() {
            [rule] if rule.pattern.first().is_some_and(|p| p.tag == CLOSURE) => {
                let captured = find_closure_send(body, &def.name)?;
                let closure = &rule.pattern[0];
                if captured.len() != closure.params.len() {
                    return None;
                }
                let outer: Vec<Option<TypeExpr>> = captured
                    .iter()
                    .map(|e| match e.as_name() {
                        Some(n) => self.decl_type(n),
                        None => Some(TypeExpr::number()),
                    })
                    .collect();
                let rest = slot_pattern(rule.pattern[1..].iter().map(|p| (p.tag.clone(), p.params.len())));
                let Determinacy::Unique(map) = arg_determinate(&s, &rest, self.table) else { return None };
                for (x, t) in closure.params.iter().zip(&outer) {
                    self.decls.insert(x.id, Decl { ty: t.clone(), stateless: false, origin: Origin::Pattern });
                }
                for p in &rule.pattern[1..] {
                    for (x, t) in p.params.iter().zip(&map[&p.tag]) {
                        self.decls.insert(x.id, Decl { ty: Some(t.clone()), stateless: false, origin: Origin::Pattern });
                    }
                }
                let marks = (self.diagnostics.len(), self.objects.len(), self.bounded.len());
                let (env, _) = self.check_process(&rule.body);
                self.diagnostics.truncate(marks.0);
                self.objects.truncate(marks.1);
                self.bounded.truncate(marks.2);
                let mut taus = Vec::new();
                for (x, t) in closure.params.iter().zip(outer) {
                    let t = t?;
                    taus.push(if self.table.base_of(&t).is_some() {
                        t
                    } else {
                        normalize(env.get(x).unwrap_or(&TypeExpr::One))
                    });
                }
                TypeExpr::prod([TypeExpr::msg(CLOSURE, taus), s])
            }
            _ => s,
        };
        let ty = TypeExpr::sum([ty, TypeExpr::One]);
        self.inferred.insert(def.name.id, ty.clone());
        Some(ty)
    }
}

fn span_of(p: &Process) -> Span {
    match p {
        Process::Done => Span::default(),
        Process::Send { span, .. } | Process::If { span, .. } => *span,
        Process::Par(ps) => ps.first().map(span_of).unwrap_or_default(),
        Process::New(def, _) => def.span,
    }
}

/// Sends in `p` (outside reaction bodies) that pass `name` as an argument,
/// with the message and argument position.
fn find_argument_uses<'p>(p: &'p Process, name: &Name, out: &mut Vec<(&'p Name, &'p [CMsg], (usize, usize))>) {
    match p {
        Process::Done => {}
        Process::Send { target, msgs, .. } => {
            for (i, m) in msgs.iter().enumerate() {
                for (j, a) in m.args.iter().enumerate() {
                    if a.as_name() == Some(name) {
                        out.push((target, msgs, (i, j)));
                    }
                }
            }
        }
        Process::Par(ps) => ps.iter().for_each(|q| find_argument_uses(q, name, out)),
        Process::New(_, body) => find_argument_uses(body, name, out),
        Process::If { then, els, .. } => {
            find_argument_uses(then, name, out);
            find_argument_uses(els, name, out);
        }
    }
}

fn find_closure_send<'p>(p: &'p Process, name: &Name) -> Option<&'p [CExpr]> {
    match p {
        Process::Send { target, msgs, .. } if target == name => {
            msgs.iter().find(|m| m.tag == CLOSURE).map(|m| m.args.as_slice())
        }
        Process::Par(ps) => ps.iter().find_map(|q| find_closure_send(q, name)),
        Process::New(_, body) => find_closure_send(body, name),
        _ => None,
    }
}

/// Fills in inferred object types.
pub fn elaborate(p: &Process, inferred: &HashMap<u32, TypeExpr>) -> Process {
    match p {
        Process::Done | Process::Send { .. } => p.clone(),
        Process::Par(ps) => Process::Par(ps.iter().map(|q| elaborate(q, inferred)).collect()),
        Process::New(def, body) => {
            let mut d = (**def).clone();
            if d.ty.is_none() {
                d.ty = inferred.get(&d.name.id).cloned();
            }
            for r in &mut d.rules {
                r.body = elaborate(&r.body, inferred);
            }
            Process::New(Rc::new(d), Box::new(elaborate(body, inferred)))
        }
        Process::If { cond, then, els, span } => Process::If {
            cond: cond.clone(),
            then: Box::new(elaborate(then, inferred)),
            els: Box::new(elaborate(els, inferred)),
            span: *span,
        },
    }
}

#[cfg(test)]
mod tests;
