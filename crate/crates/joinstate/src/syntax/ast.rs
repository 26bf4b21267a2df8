//! Surface syntax tree.

use super::Span;
use crate::types::{Tag, TypeExpr};

/// An identifier occurrence. `id` is zero until name resolution assigns the
/// binder it refers to.
#[derive(Clone, Debug, PartialEq)]
pub struct Ident {
    pub name: String,
    pub id: u32,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: Span) -> Self {
        Ident { name: name.into(), id: 0, span }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeDecl {
    pub name: String,
    pub ty: TypeExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceProgram {
    pub types: Vec<TypeDecl>,
    pub body: Proc,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Proc {
    Done(Span),
    Send { target: Ident, msgs: Vec<Message>, span: Span },
    Par(Vec<Proc>),
    New { name: Ident, ty: Option<TypeExpr>, rules: Vec<Rule>, body: Box<Proc>, span: Span },
    Class { name: Ident, ty: Option<TypeExpr>, rules: Vec<Rule>, body: Box<Proc>, span: Span },
    Let { names: Vec<Ident>, value: Expr, body: Box<Proc>, span: Span },
    If { cond: Expr, then: Box<Proc>, els: Box<Proc>, span: Span },
}

impl Proc {
    pub fn span(&self) -> Span {
        match self {
            Proc::Done(span)
            | Proc::Send { span, .. }
            | Proc::New { span, .. }
            | Proc::Class { span, .. }
            | Proc::Let { span, .. }
            | Proc::If { span, .. } => *span,
            Proc::Par(ps) => ps.first().map(Proc::span).unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Message {
    pub tag: Tag,
    pub args: Vec<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternMsg {
    pub tag: Tag,
    pub params: Vec<Ident>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub pattern: Vec<PatternMsg>,
    pub body: Proc,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "×",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn level(self) -> u8 {
        match self {
            BinOp::Eq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 0,
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64, Span),
    Bool(bool, Span),
    Var(Ident),
    Neg(Box<Expr>, Span),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Synchronous call `o.M(ē)`.
    Call { target: Ident, tag: Tag, args: Vec<Expr>, span: Span },
    /// Anonymous object `[ rules ]`.
    Block(Vec<Rule>, Span),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Num(_, s) | Expr::Bool(_, s) | Expr::Neg(_, s) | Expr::Block(_, s) => *s,
            Expr::Var(i) => i.span,
            Expr::Bin(_, l, _) => l.span(),
            Expr::Call { span, .. } => *span,
        }
    }

    /// Whether the expression has no calls or anonymous objects.
    pub fn is_pure(&self) -> bool {
        match self {
            Expr::Num(..) | Expr::Bool(..) | Expr::Var(_) => true,
            Expr::Neg(e, _) => e.is_pure(),
            Expr::Bin(_, l, r) => l.is_pure() && r.is_pure(),
            Expr::Call { .. } | Expr::Block(..) => false,
        }
    }
}
