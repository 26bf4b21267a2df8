//! Core calculus: done, sends of molecules, parallel composition, object
//! definitions and conditionals. Binders carry globally unique ids.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use super::ast::BinOp;
use super::Span;
use crate::types::{Tag, TypeExpr, TypeTable};

pub const SYSTEM_ID: u32 = 1;
pub const NUMBER_ID: u32 = 2;
/// First id handed out to user binders.
pub const FIRST_USER_ID: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    pub id: u32,
    pub text: String,
}

impl Name {
    pub fn system() -> Name {
        Name { id: SYSTEM_ID, text: "System".into() }
    }

    pub fn number() -> Name {
        Name { id: NUMBER_ID, text: "Number".into() }
    }

    pub fn is_builtin(&self) -> bool {
        self.id < FIRST_USER_ID
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CExpr {
    Num(f64),
    Bool(bool),
    Var(Name),
    Neg(Box<CExpr>),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
}

impl CExpr {
    pub fn as_name(&self) -> Option<&Name> {
        match self {
            CExpr::Var(n) => Some(n),
            _ => None,
        }
    }

    pub fn names(&self, out: &mut Vec<Name>) {
        match self {
            CExpr::Num(_) | CExpr::Bool(_) => {}
            CExpr::Var(n) => out.push(n.clone()),
            CExpr::Neg(e) => e.names(out),
            CExpr::Bin(_, l, r) => {
                l.names(out);
                r.names(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CMsg {
    pub tag: Tag,
    pub args: Vec<CExpr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CPattern {
    pub tag: Tag,
    pub params: Vec<Name>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CRule {
    pub pattern: Vec<CPattern>,
    pub body: Process,
    pub span: Span,
}

impl CRule {
    pub fn tags(&self) -> BTreeMap<Tag, usize> {
        let mut out = BTreeMap::new();
        for p in &self.pattern {
            *out.entry(p.tag.clone()).or_default() += 1;
        }
        out
    }

    pub fn params(&self) -> impl Iterator<Item = &Name> {
        self.pattern.iter().flat_map(|p| &p.params)
    }
}

/// An object definition `new a : t = [C]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjDef {
    pub name: Name,
    /// `None` until the checker infers a type for an unannotated object.
    pub ty: Option<TypeExpr>,
    pub stateless: bool,
    pub rules: Vec<CRule>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Process {
    Done,
    Send { target: Name, msgs: Vec<CMsg>, span: Span },
    Par(Vec<Process>),
    New(Rc<ObjDef>, Box<Process>),
    If { cond: CExpr, then: Box<Process>, els: Box<Process>, span: Span },
}

impl Process {
    pub fn par(parts: Vec<Process>) -> Process {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Process::Done => {}
                Process::Par(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Process::Done,
            1 => flat.pop().unwrap(),
            _ => Process::Par(flat),
        }
    }

    /// Free names in order of first occurrence.
    pub fn free_names(&self) -> Vec<Name> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        self.collect_free(&mut BTreeSet::new(), &mut seen, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut BTreeSet<u32>, seen: &mut BTreeSet<u32>, out: &mut Vec<Name>) {
        let mut note = |n: &Name, bound: &BTreeSet<u32>| {
            if !bound.contains(&n.id) && seen.insert(n.id) {
                out.push(n.clone());
            }
        };
        match self {
            Process::Done => {}
            Process::Send { target, msgs, .. } => {
                note(target, bound);
                for m in msgs {
                    let mut names = Vec::new();
                    m.args.iter().for_each(|a| a.names(&mut names));
                    names.iter().for_each(|n| note(n, bound));
                }
            }
            Process::Par(ps) => ps.iter().for_each(|p| p.collect_free(bound, seen, out)),
            Process::New(def, body) => {
                let fresh = bound.insert(def.name.id);
                for r in &def.rules {
                    let added: Vec<u32> =
                        r.params().map(|p| p.id).filter(|id| bound.insert(*id)).collect();
                    r.body.collect_free(bound, seen, out);
                    added.iter().for_each(|id| {
                        bound.remove(id);
                    });
                }
                body.collect_free(bound, seen, out);
                if fresh {
                    bound.remove(&def.name.id);
                }
            }
            Process::If { cond, then, els, .. } => {
                let mut names = Vec::new();
                cond.names(&mut names);
                names.iter().for_each(|n| note(n, bound));
                then.collect_free(bound, seen, out);
                els.collect_free(bound, seen, out);
            }
        }
    }

    /// Replaces names by id. Ids are unique, so no capture can occur.
    pub fn rename(&self, map: &HashMap<u32, Name>) -> Process {
        let name = |n: &Name| map.get(&n.id).cloned().unwrap_or_else(|| n.clone());
        match self {
            Process::Done => Process::Done,
            Process::Send { target, msgs, span } => Process::Send {
                target: name(target),
                msgs: msgs
                    .iter()
                    .map(|m| CMsg {
                        tag: m.tag.clone(),
                        args: m.args.iter().map(|a| rename_expr(a, map)).collect(),
                        span: m.span,
                    })
                    .collect(),
                span: *span,
            },
            Process::Par(ps) => Process::Par(ps.iter().map(|p| p.rename(map)).collect()),
            Process::New(def, body) => {
                let def = ObjDef {
                    name: name(&def.name),
                    ty: def.ty.clone(),
                    stateless: def.stateless,
                    rules: def
                        .rules
                        .iter()
                        .map(|r| CRule {
                            pattern: r
                                .pattern
                                .iter()
                                .map(|p| CPattern {
                                    tag: p.tag.clone(),
                                    params: p.params.iter().map(name).collect(),
                                    span: p.span,
                                })
                                .collect(),
                            body: r.body.rename(map),
                            span: r.span,
                        })
                        .collect(),
                    span: def.span,
                };
                Process::New(Rc::new(def), Box::new(body.rename(map)))
            }
            Process::If { cond, then, els, span } => Process::If {
                cond: rename_expr(cond, map),
                then: Box::new(then.rename(map)),
                els: Box::new(els.rename(map)),
                span: *span,
            },
        }
    }

    /// Every definition in the process, outermost first.
    pub fn definitions(&self) -> Vec<Rc<ObjDef>> {
        let mut out = Vec::new();
        self.walk_defs(&mut |d| out.push(d.clone()));
        out
    }

    fn walk_defs(&self, f: &mut impl FnMut(&Rc<ObjDef>)) {
        match self {
            Process::Done | Process::Send { .. } => {}
            Process::Par(ps) => ps.iter().for_each(|p| p.walk_defs(f)),
            Process::New(def, body) => {
                f(def);
                def.rules.iter().for_each(|r| r.body.walk_defs(f));
                body.walk_defs(f);
            }
            Process::If { then, els, .. } => {
                then.walk_defs(f);
                els.walk_defs(f);
            }
        }
    }

    /// Number of sends, counting each molecule once per message.
    pub fn message_count(&self) -> usize {
        match self {
            Process::Done => 0,
            Process::Send { msgs, .. } => msgs.len(),
            Process::Par(ps) => ps.iter().map(Process::message_count).sum(),
            Process::New(def, body) => {
                def.rules.iter().map(|r| r.body.message_count()).sum::<usize>() + body.message_count()
            }
            Process::If { then, els, .. } => then.message_count() + els.message_count(),
        }
    }
}

pub fn rename_expr(e: &CExpr, map: &HashMap<u32, Name>) -> CExpr {
    match e {
        CExpr::Var(n) => CExpr::Var(map.get(&n.id).cloned().unwrap_or_else(|| n.clone())),
        CExpr::Neg(e) => CExpr::Neg(Box::new(rename_expr(e, map))),
        CExpr::Bin(op, l, r) => {
            CExpr::Bin(*op, Box::new(rename_expr(l, map)), Box::new(rename_expr(r, map)))
        }
        other => other.clone(),
    }
}

/// A desugared program.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreProgram {
    pub process: Process,
    pub table: TypeTable,
}

// ---- alpha-equivalence ----

/// Equality up to a consistent bijective renaming of binders.
pub fn alpha_eq(a: &Process, b: &Process) -> bool {
    Alpha::default().process(a, b)
}

#[derive(Default)]
struct Alpha {
    left: HashMap<u32, u32>,
    right: HashMap<u32, u32>,
}

impl Alpha {
    fn bind(&mut self, a: &Name, b: &Name) -> bool {
        match (self.left.get(&a.id), self.right.get(&b.id)) {
            (None, None) => {
                self.left.insert(a.id, b.id);
                self.right.insert(b.id, a.id);
                true
            }
            (Some(x), Some(y)) => *x == b.id && *y == a.id,
            _ => false,
        }
    }

    fn name(&mut self, a: &Name, b: &Name) -> bool {
        if a.is_builtin() || b.is_builtin() {
            return a.id == b.id;
        }
        self.bind(a, b)
    }

    fn expr(&mut self, a: &CExpr, b: &CExpr) -> bool {
        match (a, b) {
            (CExpr::Num(x), CExpr::Num(y)) => x == y,
            (CExpr::Bool(x), CExpr::Bool(y)) => x == y,
            (CExpr::Var(x), CExpr::Var(y)) => self.name(x, y),
            (CExpr::Neg(x), CExpr::Neg(y)) => self.expr(x, y),
            (CExpr::Bin(o1, l1, r1), CExpr::Bin(o2, l2, r2)) => {
                o1 == o2 && self.expr(l1, l2) && self.expr(r1, r2)
            }
            _ => false,
        }
    }

    fn process(&mut self, a: &Process, b: &Process) -> bool {
        match (a, b) {
            (Process::Done, Process::Done) => true,
            (Process::Send { target: t1, msgs: m1, .. }, Process::Send { target: t2, msgs: m2, .. }) => {
                self.name(t1, t2)
                    && m1.len() == m2.len()
                    && m1.iter().zip(m2).all(|(x, y)| {
                        x.tag == y.tag
                            && x.args.len() == y.args.len()
                            && x.args.iter().zip(&y.args).all(|(p, q)| self.expr(p, q))
                    })
            }
            (Process::Par(p1), Process::Par(p2)) => {
                p1.len() == p2.len() && p1.iter().zip(p2).all(|(x, y)| self.process(x, y))
            }
            (Process::New(d1, b1), Process::New(d2, b2)) => {
                d1.ty == d2.ty
                    && d1.stateless == d2.stateless
                    && d1.rules.len() == d2.rules.len()
                    && self.name(&d1.name, &d2.name)
                    && d1.rules.iter().zip(&d2.rules).all(|(r1, r2)| {
                        r1.pattern.len() == r2.pattern.len()
                            && r1.pattern.iter().zip(&r2.pattern).all(|(p, q)| {
                                p.tag == q.tag
                                    && p.params.len() == q.params.len()
                                    && p.params.iter().zip(&q.params).all(|(x, y)| self.name(x, y))
                            })
                            && self.process(&r1.body, &r2.body)
                    })
                    && self.process(b1, b2)
            }
            (
                Process::If { cond: c1, then: t1, els: e1, .. },
                Process::If { cond: c2, then: t2, els: e2, .. },
            ) => self.expr(c1, c2) && self.process(t1, t2) && self.process(e1, e2),
            _ => false,
        }
    }
}

// ---- pretty printing ----

/// Prints the process in surface syntax that parses back to an
/// alpha-equivalent program.
pub fn pretty(p: &Process) -> String {
    let mut texts: HashMap<String, BTreeSet<u32>> = HashMap::new();
    collect_names(p, &mut |n: &Name| {
        texts.entry(n.text.clone()).or_default().insert(n.id);
    });
    let clashing: BTreeSet<u32> = texts
        .values()
        .filter(|ids| ids.len() > 1)
        .flatten()
        .copied()
        .filter(|id| *id >= FIRST_USER_ID)
        .collect();
    let mut out = String::new();
    Printer { clashing: &clashing, out: &mut out }.process(p, 0);
    out
}

fn collect_names(p: &Process, f: &mut impl FnMut(&Name)) {
    match p {
        Process::Done => {}
        Process::Send { target, msgs, .. } => {
            f(target);
            for m in msgs {
                let mut names = Vec::new();
                m.args.iter().for_each(|a| a.names(&mut names));
                names.iter().for_each(&mut *f);
            }
        }
        Process::Par(ps) => ps.iter().for_each(|q| collect_names(q, f)),
        Process::New(def, body) => {
            f(&def.name);
            for r in &def.rules {
                r.params().for_each(&mut *f);
                collect_names(&r.body, f);
            }
            collect_names(body, f);
        }
        Process::If { cond, then, els, .. } => {
            let mut names = Vec::new();
            cond.names(&mut names);
            names.iter().for_each(&mut *f);
            collect_names(then, f);
            collect_names(els, f);
        }
    }
}

struct Printer<'a> {
    clashing: &'a BTreeSet<u32>,
    out: &'a mut String,
}

impl Printer<'_> {
    fn name(&mut self, n: &Name) {
        self.out.push_str(&n.text);
        if self.clashing.contains(&n.id) {
            self.out.push_str(&format!("_{}", n.id));
        }
    }

    fn indent(&mut self, depth: usize) {
        self.out.push('\n');
        for _ in 0..depth {
            self.out.push_str("  ");
        }
    }

    fn process(&mut self, p: &Process, depth: usize) {
        match p {
            Process::Done => self.out.push_str("done"),
            Process::Send { target, msgs, .. } => {
                self.name(target);
                self.out.push('!');
                if msgs.len() > 1 {
                    self.out.push('(');
                }
                for (i, m) in msgs.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(" & ");
                    }
                    self.out.push_str(&m.tag);
                    self.args(&m.args);
                }
                if msgs.len() > 1 {
                    self.out.push(')');
                }
            }
            Process::Par(ps) => {
                for (i, q) in ps.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(" &");
                        self.indent(depth);
                    }
                    let wrap = matches!(q, Process::New(..) | Process::If { .. } | Process::Par(_));
                    if wrap {
                        self.out.push('(');
                    }
                    self.process(q, depth);
                    if wrap {
                        self.out.push(')');
                    }
                }
            }
            Process::New(def, body) => {
                if def.stateless {
                    self.out.push_str("class ");
                } else {
                    self.out.push_str("new ");
                }
                self.name(&def.name);
                if let Some(t) = &def.ty {
                    self.out.push_str(&format!(" : {t}"));
                }
                self.out.push_str(" [ ");
                for (i, r) in def.rules.iter().enumerate() {
                    if i > 0 {
                        self.indent(depth);
                        self.out.push_str("| ");
                    }
                    for (j, pat) in r.pattern.iter().enumerate() {
                        if j > 0 {
                            self.out.push_str(" & ");
                        }
                        self.out.push_str(&pat.tag);
                        if !pat.params.is_empty() {
                            self.out.push('(');
                            for (k, x) in pat.params.iter().enumerate() {
                                if k > 0 {
                                    self.out.push_str(", ");
                                }
                                self.name(x);
                            }
                            self.out.push(')');
                        }
                    }
                    self.out.push_str(" ▶ ");
                    self.process(&r.body, depth + 1);
                }
                self.out.push_str(" ]");
                if def.stateless {
                    self.indent(depth);
                } else {
                    self.out.push_str(" in");
                    self.indent(depth);
                }
                self.process(body, depth);
            }
            Process::If { cond, then, els, .. } => {
                self.out.push_str("if ");
                self.expr(cond, 0);
                self.out.push_str(" then (");
                self.process(then, depth + 1);
                self.out.push_str(") else (");
                self.process(els, depth + 1);
                self.out.push(')');
            }
        }
    }

    fn args(&mut self, args: &[CExpr]) {
        if args.is_empty() {
            return;
        }
        self.out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.expr(a, 0);
        }
        self.out.push(')');
    }

    fn expr(&mut self, e: &CExpr, min: u8) {
        match e {
            CExpr::Num(n) => self.out.push_str(&format_num(*n)),
            CExpr::Bool(b) => self.out.push_str(if *b { "true" } else { "false" }),
            CExpr::Var(n) => self.name(n),
            CExpr::Neg(e) => {
                self.out.push('-');
                self.expr(e, 3);
            }
            CExpr::Bin(op, l, r) => {
                let level = op.level();
                let paren = level < min;
                if paren {
                    self.out.push('(');
                }
                self.expr(l, level);
                self.out.push_str(&format!(" {} ", op.symbol()));
                self.expr(r, level + 1);
                if paren {
                    self.out.push(')');
                }
            }
        }
    }
}

pub fn format_num(n: f64) -> String {
    if n.fract() == 0.0 && n.abs() < 1e15 {
        format!("{}", n as i64)
    } else {
        format!("{n}")
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}
