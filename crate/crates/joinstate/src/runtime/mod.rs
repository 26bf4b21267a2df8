//! A chemical abstract machine for core programs, with a seeded scheduler
//! and monitors for conformance and deadlock freedom.

mod monitor;
mod trace;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use monitor::{Violation, ViolationKind};
pub use trace::{EventKind, TraceEvent};

use crate::syntax::ast::BinOp;
use crate::syntax::core::{format_num, CExpr, CoreProgram, ObjDef, Process, NUMBER_ID, SYSTEM_ID};
use crate::syntax::desugar::{builtin_type, REPLY};
use crate::types::{Tag, TypeExpr, TypeTable};

pub const DEFAULT_MAX_STEPS: usize = 100_000;

const SYSTEM: usize = 0;
const NUMBER: usize = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Obj(usize),
    Num(f64),
    Bool(bool),
}

impl Eq for Value {}

impl std::hash::Hash for Value {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Value::Obj(o) => (0u8, *o).hash(state),
            // 0.0 and -0.0 compare equal, so they must hash alike
            Value::Num(n) => (1u8, if *n == 0.0 { 0 } else { n.to_bits() }).hash(state),
            Value::Bool(b) => (2u8, *b).hash(state),
        }
    }
}

impl Value {
    pub fn as_obj(&self) -> Option<usize> {
        match self {
            Value::Obj(o) => Some(*o),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RuntimeError {
    #[error("`{0}` is not an object and cannot receive messages")]
    NotAnObject(String),
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("condition is not a boolean")]
    NotABoolean,
    #[error("`{0}` is not bound at run time")]
    Unbound(String),
    #[error("builtin `{0}` received an unexpected message `{1}`")]
    Builtin(String, String),
}

pub type Env = Rc<HashMap<u32, Value>>;

#[derive(Clone, Debug, PartialEq)]
pub struct Message {
    pub tag: Tag,
    pub args: Vec<Value>,
}

/// A live object: its class, the environment its reactions close over,
/// and its declared type.
#[derive(Clone, Debug)]
pub struct Object {
    pub name: String,
    pub def: Option<Rc<ObjDef>>,
    pub env: Env,
    pub ty: Option<TypeExpr>,
    pub stateless: bool,
}

impl Object {
    pub fn is_builtin(&self) -> bool {
        self.def.is_none()
    }
}

/// A reaction that can fire: a rule of an object and the mailbox positions
/// of the selected messages, aligned with the rule's pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reaction {
    pub object: usize,
    pub rule: usize,
    pub selection: Vec<usize>,
}

/// Runtime state: definitions and per-object mailboxes. Between steps the
/// solution is fully heated, so no process is pending.
#[derive(Clone, Debug)]
pub struct Soup {
    table: TypeTable,
    objects: Vec<Object>,
    mailboxes: Vec<Vec<Message>>,
    /// Occurrences of each object among mailbox payloads.
    refs: Vec<usize>,
    /// Enabled reactions per object; `None` when the mailbox changed since
    /// the last enumeration.
    enabled: Vec<Option<Vec<Reaction>>>,
    stale: Vec<usize>,
    counts: Fenwick,
    residuals: RefCell<HashMap<(TypeExpr, Vec<Tag>), (bool, bool)>>,
    touched: BTreeSet<usize>,
    events: Vec<TraceEvent>,
    prints: Vec<String>,
    step: usize,
    messages: usize,
    stored: usize,
}

impl Soup {
    /// The heated initial solution of a program.
    pub fn new(program: &CoreProgram) -> Result<Soup, RuntimeError> {
        let builtin = |name: &str, id: u32| Object {
            name: name.into(),
            def: None,
            env: Env::default(),
            ty: builtin_type(id),
            stateless: true,
        };
        let mut soup = Soup {
            table: program.table.clone(),
            objects: vec![builtin("System", SYSTEM_ID), builtin("Number", NUMBER_ID)],
            mailboxes: vec![Vec::new(), Vec::new()],
            refs: vec![0, 0],
            enabled: vec![Some(Vec::new()), Some(Vec::new())],
            stale: Vec::new(),
            counts: Fenwick::with_len(2),
            residuals: RefCell::default(),
            touched: BTreeSet::new(),
            events: Vec::new(),
            prints: Vec::new(),
            step: 0,
            messages: 0,
            stored: 0,
        };
        let env = Env::new(HashMap::from([(SYSTEM_ID, Value::Obj(SYSTEM)), (NUMBER_ID, Value::Obj(NUMBER))]));
        soup.heat(&program.process, &env)?;
        Ok(soup)
    }

    pub fn table(&self) -> &TypeTable {
        &self.table
    }

    pub fn objects(&self) -> &[Object] {
        &self.objects
    }

    pub fn mailbox(&self, object: usize) -> &[Message] {
        &self.mailboxes[object]
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn prints(&self) -> &[String] {
        &self.prints
    }

    /// Total number of messages delivered so far.
    pub fn messages_sent(&self) -> usize {
        self.messages
    }

    /// Messages that went into mailboxes rather than to builtins.
    pub fn messages_stored(&self) -> usize {
        self.stored
    }

    /// Messages currently waiting in mailboxes.
    pub fn pending(&self) -> usize {
        self.mailboxes.iter().map(Vec::len).sum()
    }

    pub fn label(&self, object: usize) -> String {
        format!("{}#{}", self.objects[object].name, object)
    }

    pub fn render(&self, v: &Value) -> String {
        match v {
            Value::Obj(o) => self.label(*o),
            Value::Num(n) => format_num(*n),
            Value::Bool(b) => b.to_string(),
        }
    }

    /// Objects created so far, counted by declared type.
    pub fn objects_by_type(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for o in self.objects.iter().filter(|o| !o.is_builtin()) {
            let key = o.ty.as_ref().map_or_else(|| "?".to_string(), |t| t.to_string());
            *out.entry(key).or_default() += 1;
        }
        out
    }

    fn take_events(&mut self) -> Vec<TraceEvent> {
        std::mem::take(&mut self.events)
    }

    // ---- heating ----

    /// Applies the structural rules until only messages remain.
    fn heat(&mut self, p: &Process, env: &Env) -> Result<(), RuntimeError> {
        let mut work = vec![(p.clone(), env.clone())];
        while let Some((p, env)) = work.pop() {
            match p {
                Process::Done => {}
                Process::Par(ps) => work.extend(ps.into_iter().rev().map(|q| (q, env.clone()))),
                Process::New(def, body) => {
                    let id = self.objects.len();
                    let mut inner = (*env).clone();
                    inner.insert(def.name.id, Value::Obj(id));
                    let inner = Env::new(inner);
                    self.objects.push(Object {
                        name: def.name.text.clone(),
                        ty: def.ty.clone(),
                        stateless: def.stateless,
                        env: inner.clone(),
                        def: Some(def),
                    });
                    self.mailboxes.push(Vec::new());
                    self.refs.push(0);
                    self.enabled.push(Some(Vec::new()));
                    self.counts.push();
                    work.push((*body, inner));
                }
                Process::Send { target, msgs, .. } => {
                    let to = match env.get(&target.id) {
                        Some(Value::Obj(o)) => *o,
                        Some(_) => return Err(RuntimeError::NotAnObject(target.text)),
                        None => return Err(RuntimeError::Unbound(target.text)),
                    };
                    for m in msgs {
                        let args = m.args.iter().map(|a| eval(a, &env)).collect::<Result<Vec<_>, _>>()?;
                        self.deliver(to, Message { tag: m.tag, args })?;
                    }
                }
                Process::If { cond, then, els, .. } => match eval(&cond, &env)? {
                    Value::Bool(true) => work.push((*then, env)),
                    Value::Bool(false) => work.push((*els, env)),
                    _ => return Err(RuntimeError::NotABoolean),
                },
            }
        }
        Ok(())
    }

    fn deliver(&mut self, to: usize, msg: Message) -> Result<(), RuntimeError> {
        self.messages += 1;
        if self.objects[to].is_builtin() {
            return self.native(to, msg);
        }
        for o in msg.args.iter().filter_map(Value::as_obj) {
            self.refs[o] += 1;
            self.touched.insert(o);
        }
        self.mailboxes[to].push(msg);
        self.stored += 1;
        self.changed(to);
        Ok(())
    }

    fn changed(&mut self, o: usize) {
        if self.enabled[o].take().is_some() {
            self.stale.push(o);
        }
        self.touched.insert(o);
    }

    fn native(&mut self, to: usize, msg: Message) -> Result<(), RuntimeError> {
        let unexpected = || RuntimeError::Builtin(self.objects[to].name.clone(), msg.tag.clone());
        match (to, msg.tag.as_str(), msg.args.as_slice()) {
            (SYSTEM, "Print", [v]) => {
                let text = self.render(v);
                self.events.push(TraceEvent {
                    step: self.step,
                    kind: EventKind::Print,
                    object: "System".into(),
                    tags: "Print".into(),
                    detail: text.clone(),
                });
                self.prints.push(text);
                Ok(())
            }
            (NUMBER, "Pow", [Value::Num(a), Value::Num(b), Value::Obj(k)]) => {
                let k = *k;
                self.deliver(k, Message { tag: REPLY.into(), args: vec![Value::Num(a.powf(*b))] })
            }
            _ => Err(unexpected()),
        }
    }

    // ---- reactions ----

    fn reactions_of(&self, o: usize) -> Vec<Reaction> {
        let Some(def) = &self.objects[o].def else { return Vec::new() };
        let mailbox = &self.mailboxes[o];
        let mut out = Vec::new();
        for (r, rule) in def.rules.iter().enumerate() {
            let mut chosen = Vec::new();
            select(mailbox, &rule.pattern, &mut chosen, &mut |sel| {
                out.push(Reaction { object: o, rule: r, selection: sel.to_vec() })
            });
        }
        out
    }

    fn refresh(&mut self) {
        while let Some(o) = self.stale.pop() {
            let rs = self.reactions_of(o);
            self.counts.set(o, rs.len());
            self.enabled[o] = Some(rs);
        }
    }

    /// Every reaction that can fire, grouped by object in creation order.
    pub fn enabled_reactions(&mut self) -> Vec<Reaction> {
        self.refresh();
        self.enabled.iter().flatten().flatten().cloned().collect()
    }

    /// Picks an enabled reaction uniformly at random.
    pub fn pick(&mut self, rng: &mut impl Rng) -> Option<Reaction> {
        self.refresh();
        let total = self.counts.total();
        if total == 0 {
            return None;
        }
        let (o, k) = self.counts.find(rng.gen_range(0..total));
        self.enabled[o].as_ref().map(|rs| rs[k].clone())
    }

    /// Fires a reaction: removes the selected messages atomically and heats
    /// the instantiated body. Returns the events it produced.
    pub fn step(&mut self, reaction: &Reaction) -> Result<Vec<TraceEvent>, RuntimeError> {
        self.step += 1;
        let o = reaction.object;
        let obj = &self.objects[o];
        let def = obj.def.clone().expect("builtins have no reactions");
        let rule = &def.rules[reaction.rule];
        let mut env = (*obj.env).clone();
        let mut binding = Vec::new();
        for (p, &i) in rule.pattern.iter().zip(&reaction.selection) {
            let msg = &self.mailboxes[o][i];
            for (x, v) in p.params.iter().zip(&msg.args) {
                binding.push(format!("{}={}", x.text, self.render(v)));
                env.insert(x.id, v.clone());
            }
        }
        let mut indices = reaction.selection.clone();
        indices.sort_unstable_by(|a, b| b.cmp(a));
        for i in indices {
            let msg = self.mailboxes[o].remove(i);
            for r in msg.args.iter().filter_map(Value::as_obj) {
                self.refs[r] -= 1;
                self.touched.insert(r);
            }
        }
        self.changed(o);
        self.events.push(TraceEvent {
            step: self.step,
            kind: EventKind::Fire,
            object: self.label(o),
            tags: rule.pattern.iter().map(|p| p.tag.as_str()).collect::<Vec<_>>().join(" & "),
            detail: binding.join(", "),
        });
        let body = rule.body.clone();
        self.heat(&body, &Env::new(env))?;
        Ok(self.take_events())
    }
}

/// Prefix sums over per-object reaction counts.
#[derive(Clone, Debug, Default)]
struct Fenwick {
    values: Vec<usize>,
    tree: Vec<usize>,
}

impl Fenwick {
    fn with_len(n: usize) -> Self {
        let mut f = Fenwick::default();
        (0..n).for_each(|_| f.push());
        f
    }

    fn push(&mut self) {
        self.values.push(0);
        if self.values.len() > self.tree.len() {
            let cap = (self.values.len() * 2).next_power_of_two();
            let old = std::mem::take(&mut self.values);
            self.tree = vec![0; cap];
            self.values = vec![0; old.len()];
            for (i, v) in old.into_iter().enumerate() {
                self.set(i, v);
            }
        }
    }

    fn set(&mut self, i: usize, v: usize) {
        let old = std::mem::replace(&mut self.values[i], v);
        let mut j = i + 1;
        while j <= self.tree.len() {
            self.tree[j - 1] = self.tree[j - 1] + v - old;
            j += j & j.wrapping_neg();
        }
    }

    fn total(&self) -> usize {
        self.tree.last().copied().unwrap_or(0)
    }

    /// The entry containing the `k`-th unit, and the offset within it.
    fn find(&self, mut k: usize) -> (usize, usize) {
        let mut pos = 0;
        let mut step = self.tree.len();
        while step > 0 {
            if pos + step <= self.tree.len() && self.tree[pos + step - 1] <= k {
                k -= self.tree[pos + step - 1];
                pos += step;
            }
            step /= 2;
        }
        (pos, k)
    }
}

/// Enumerates injective choices of mailbox positions for a pattern, skipping
/// choices that only swap messages with identical payloads.
fn select(
    mailbox: &[Message],
    pattern: &[crate::syntax::core::CPattern],
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    let Some(p) = pattern.get(chosen.len()) else {
        emit(chosen);
        return;
    };
    let mut seen: HashSet<&[Value]> = HashSet::new();
    for (i, m) in mailbox.iter().enumerate() {
        if m.tag != p.tag || m.args.len() != p.params.len() || chosen.contains(&i) {
            continue;
        }
        if !seen.insert(&m.args) {
            continue;
        }
        chosen.push(i);
        select(mailbox, pattern, chosen, emit);
        chosen.pop();
    }
}

pub fn eval(e: &CExpr, env: &HashMap<u32, Value>) -> Result<Value, RuntimeError> {
    let num = |v: Value| match v {
        Value::Num(n) => Ok(n),
        _ => Err(RuntimeError::Arithmetic("expected a number".into())),
    };
    Ok(match e {
        CExpr::Num(n) => Value::Num(*n),
        CExpr::Bool(b) => Value::Bool(*b),
        CExpr::Var(n) => env.get(&n.id).cloned().ok_or_else(|| RuntimeError::Unbound(n.text.clone()))?,
        CExpr::Neg(e) => Value::Num(-num(eval(e, env)?)?),
        CExpr::Bin(BinOp::Eq, l, r) => match (eval(l, env)?, eval(r, env)?) {
            (Value::Num(a), Value::Num(b)) => Value::Bool(a == b),
            (Value::Bool(a), Value::Bool(b)) => Value::Bool(a == b),
            _ => return Err(RuntimeError::Arithmetic("`=` compares numbers or booleans".into())),
        },
        CExpr::Bin(op, l, r) => {
            let a = num(eval(l, env)?)?;
            let b = num(eval(r, env)?)?;
            match op {
                BinOp::Add => Value::Num(a + b),
                BinOp::Sub => Value::Num(a - b),
                BinOp::Mul => Value::Num(a * b),
                BinOp::Div => Value::Num(a / b),
                BinOp::Mod => {
                    if a.fract() != 0.0 || b.fract() != 0.0 || b == 0.0 {
                        return Err(RuntimeError::Arithmetic(format!("{a} % {b} needs integral operands")));
                    }
                    Value::Num(a % b)
                }
                BinOp::Lt => Value::Bool(a < b),
                BinOp::Le => Value::Bool(a <= b),
                BinOp::Gt => Value::Bool(a > b),
                BinOp::Ge => Value::Bool(a >= b),
                BinOp::Eq => unreachable!(),
            }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", content = "deadlocked")]
pub enum RunVerdict {
    Terminated,
    Deadlocked(Vec<String>),
    StepBudgetExhausted,
}

impl fmt::Display for RunVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunVerdict::Terminated => f.write_str("Terminated"),
            RunVerdict::Deadlocked(objs) => write!(f, "Deadlocked([{}])", objs.join(", ")),
            RunVerdict::StepBudgetExhausted => f.write_str("StepBudgetExhausted"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub max_steps: usize,
    pub monitors: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 0, max_steps: DEFAULT_MAX_STEPS, monitors: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub verdict: RunVerdict,
    pub violations: Vec<Violation>,
    pub trace: Vec<TraceEvent>,
    pub prints: Vec<String>,
    pub steps: usize,
    pub messages: usize,
    pub objects: BTreeMap<String, usize>,
}

/// Runs a program to quiescence or until the step budget is spent.
pub fn run(program: &CoreProgram, config: &RunConfig) -> Result<RunResult, RuntimeError> {
    run_with(program, config, |_| {})
}

/// Like [`run`], calling `observe` on the heated solution before the first
/// step and after every step.
pub fn run_with(
    program: &CoreProgram,
    config: &RunConfig,
    mut observe: impl FnMut(&Soup),
) -> Result<RunResult, RuntimeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut soup = Soup::new(program)?;
    let mut trace = soup.take_events();
    let mut violations = Vec::new();
    if config.monitors {
        violations.extend(soup.monitor_touched(&mut trace));
    }
    observe(&soup);
    let verdict = loop {
        let Some(choice) = soup.pick(&mut rng) else {
            let verdict = soup.check_quiescence();
            trace.push(TraceEvent {
                step: soup.step,
                kind: EventKind::Quiesce,
                object: String::new(),
                tags: String::new(),
                detail: verdict.to_string(),
            });
            break verdict;
        };
        if soup.step >= config.max_steps {
            break RunVerdict::StepBudgetExhausted;
        }
        trace.extend(soup.step(&choice)?);
        if config.monitors {
            violations.extend(soup.monitor_touched(&mut trace));
        }
        observe(&soup);
    };
    Ok(RunResult {
        verdict,
        violations,
        trace,
        prints: soup.prints.clone(),
        steps: soup.step,
        messages: soup.messages,
        objects: soup.objects_by_type(),
    })
}
