//! Name resolution: gives every binder a unique id and points each use at
//! its binder.

use std::collections::HashSet;

use super::ast::*;
use super::core::{FIRST_USER_ID, NUMBER_ID, SYSTEM_ID};
use super::FrontendError;

/// Resolves names in place and returns the next unused id.
pub fn resolve(program: &mut SurfaceProgram) -> Result<u32, FrontendError> {
    let mut r = Resolver {
        scope: vec![("System".into(), SYSTEM_ID), ("Number".into(), NUMBER_ID)],
        next: FIRST_USER_ID,
    };
    r.process(&mut program.body)?;
    Ok(r.next)
}

struct Resolver {
    scope: Vec<(String, u32)>,
    next: u32,
}

impl Resolver {
    fn bind(&mut self, ident: &mut Ident) {
        ident.id = self.next;
        self.next += 1;
        self.scope.push((ident.name.clone(), ident.id));
    }

    fn lookup(&self, ident: &mut Ident) -> Result<(), FrontendError> {
        match self.scope.iter().rev().find(|(n, _)| *n == ident.name) {
            Some((_, id)) => {
                ident.id = *id;
                Ok(())
            }
            None => Err(FrontendError::Resolve {
                span: ident.span,
                message: format!("unknown name `{}`", ident.name),
            }),
        }
    }

    fn process(&mut self, p: &mut Proc) -> Result<(), FrontendError> {
        match p {
            Proc::Done(_) => Ok(()),
            Proc::Send { target, msgs, .. } => {
                self.lookup(target)?;
                for m in msgs {
                    for a in &mut m.args {
                        self.expr(a)?;
                    }
                }
                Ok(())
            }
            Proc::Par(ps) => ps.iter_mut().try_for_each(|q| self.process(q)),
            Proc::New { name, rules, body, .. } | Proc::Class { name, rules, body, .. } => {
                let mark = self.scope.len();
                self.bind(name);
                self.rules(rules)?;
                self.process(body)?;
                self.scope.truncate(mark);
                Ok(())
            }
            Proc::Let { names, value, body, .. } => {
                self.expr(value)?;
                let mark = self.scope.len();
                let mut seen = HashSet::new();
                for n in names.iter_mut() {
                    if !seen.insert(n.name.clone()) {
                        return Err(FrontendError::Resolve {
                            span: n.span,
                            message: format!("`{}` is bound twice", n.name),
                        });
                    }
                    self.bind(n);
                }
                self.process(body)?;
                self.scope.truncate(mark);
                Ok(())
            }
            Proc::If { cond, then, els, .. } => {
                self.expr(cond)?;
                self.process(then)?;
                self.process(els)
            }
        }
    }

    fn rules(&mut self, rules: &mut [Rule]) -> Result<(), FrontendError> {
        for rule in rules {
            let mark = self.scope.len();
            let mut seen = HashSet::new();
            for pat in &mut rule.pattern {
                for x in &mut pat.params {
                    if !seen.insert(x.name.clone()) {
                        return Err(FrontendError::Resolve {
                            span: x.span,
                            message: format!("pattern variable `{}` occurs twice", x.name),
                        });
                    }
                    self.bind(x);
                }
            }
            self.process(&mut rule.body)?;
            self.scope.truncate(mark);
        }
        Ok(())
    }

    fn expr(&mut self, e: &mut Expr) -> Result<(), FrontendError> {
        match e {
            Expr::Num(..) | Expr::Bool(..) => Ok(()),
            Expr::Var(i) => self.lookup(i),
            Expr::Neg(e, _) => self.expr(e),
            Expr::Bin(_, l, r) => {
                self.expr(l)?;
                self.expr(r)
            }
            Expr::Call { target, args, .. } => {
                self.lookup(target)?;
                args.iter_mut().try_for_each(|a| self.expr(a))
            }
            Expr::Block(rules, _) => self.rules(rules),
        }
    }
}
