use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::{Span, SyntaxError};
use crate::types::TypeExpr;

type Result<T> = std::result::Result<T, SyntaxError>;

pub fn parse_program(src: &str) -> Result<SurfaceProgram> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let types = p.type_block()?;
    let body = p.process()?;
    p.expect(&Tok::Eof)?;
    Ok(SurfaceProgram { types, body })
}

/// Parses a standalone type expression; builtin names stay as references.
pub fn parse_type(src: &str) -> Result<TypeExpr> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let t = p.ty()?;
    p.expect(&Tok::Eof)?;
    Ok(t)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<Span> {
        let span = self.span();
        if self.eat(tok) {
            Ok(span)
        } else {
            Err(self.unexpected(&format!("{tok}")))
        }
    }

    fn unexpected(&self, wanted: &str) -> SyntaxError {
        SyntaxError::new(self.span(), format!("expected {wanted}, found {}", self.peek()))
    }

    fn ident(&mut self) -> Result<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident::new(name, span))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn tag(&mut self) -> Result<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) if starts_upper(&name) => Ok((name, self.bump().span)),
            _ => Err(self.unexpected("a message tag")),
        }
    }

    // ---- types ----

    fn type_block(&mut self) -> Result<Vec<TypeDecl>> {
        let mut decls = Vec::new();
        if !self.eat(&Tok::Kw("type")) {
            return Ok(decls);
        }
        loop {
            let span = self.span();
            let name = match self.peek().clone() {
                Tok::TypeName(n) => {
                    self.bump();
                    n
                }
                _ => return Err(self.unexpected("a type name")),
            };
            self.expect(&Tok::Eq)?;
            let ty = self.ty()?;
            decls.push(TypeDecl { name, ty, span });
            if !self.eat(&Tok::Kw("and")) {
                return Ok(decls);
            }
        }
    }

    fn ty(&mut self) -> Result<TypeExpr> {
        let mut items = vec![self.ty_prod()?];
        while self.eat(&Tok::Plus) {
            items.push(self.ty_prod()?);
        }
        Ok(TypeExpr::sum(items))
    }

    fn ty_prod(&mut self) -> Result<TypeExpr> {
        let mut items = vec![self.ty_unary()?];
        while matches!(self.peek(), Tok::Middot | Tok::Dot) {
            self.bump();
            items.push(self.ty_unary()?);
        }
        Ok(TypeExpr::prod(items))
    }

    fn ty_unary(&mut self) -> Result<TypeExpr> {
        if self.eat(&Tok::Star) {
            return Ok(TypeExpr::star(self.ty_unary()?));
        }
        match self.peek().clone() {
            Tok::Num(n) if n == 0.0 => {
                self.bump();
                Ok(TypeExpr::Zero)
            }
            Tok::Num(n) if n == 1.0 => {
                self.bump();
                Ok(TypeExpr::One)
            }
            Tok::TypeName(n) => {
                self.bump();
                Ok(TypeExpr::Ref(n))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(_) => {
                let (tag, _) = self.tag()?;
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.ty()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(&Tok::Comma)?;
                        }
                    }
                }
                Ok(TypeExpr::Msg(tag, args))
            }
            _ => Err(self.unexpected("a type")),
        }
    }

    // ---- processes ----

    fn process(&mut self) -> Result<Proc> {
        let mut parts = vec![self.unit()?];
        while self.eat(&Tok::Amp) {
            parts.push(self.unit()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Proc::Par(parts) })
    }

    fn unit(&mut self) -> Result<Proc> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Kw("done") => {
                self.bump();
                Ok(Proc::Done(span))
            }
            Tok::LParen => {
                self.bump();
                let p = self.process()?;
                self.expect(&Tok::RParen)?;
                Ok(p)
            }
            Tok::Kw("new") => {
                self.bump();
                let name = self.ident()?;
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                let rules = self.rule_block()?;
                self.expect(&Tok::Kw("in"))?;
                let body = Box::new(self.process()?);
                Ok(Proc::New { name, ty, rules, body, span })
            }
            Tok::Kw("class") => {
                self.bump();
                let name = self.ident()?;
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                let rules = self.rule_block()?;
                let body = if self.starts_process() {
                    self.process()?
                } else {
                    Proc::Done(self.span())
                };
                Ok(Proc::Class { name, ty, rules, body: Box::new(body), span })
            }
            Tok::Kw("let") => {
                self.bump();
                let mut names = vec![self.ident()?];
                while self.eat(&Tok::Comma) {
                    names.push(self.ident()?);
                }
                self.expect(&Tok::Eq)?;
                let value = self.expr()?;
                self.expect(&Tok::Kw("in"))?;
                let body = Box::new(self.process()?);
                Ok(Proc::Let { names, value, body, span })
            }
            Tok::Kw("if") => {
                self.bump();
                let cond = self.expr()?;
                self.expect(&Tok::Kw("then"))?;
                let then = Box::new(self.process()?);
                self.expect(&Tok::Kw("else"))?;
                let els = Box::new(self.process()?);
                Ok(Proc::If { cond, then, els, span })
            }
            Tok::Ident(_) => self.send(),
            _ => Err(self.unexpected("a process")),
        }
    }

    fn starts_process(&self) -> bool {
        match self.peek() {
            Tok::Kw(k) => matches!(*k, "done" | "new" | "class" | "let" | "if"),
            Tok::Ident(_) => matches!(self.peek_at(1), Tok::Bang),
            Tok::LParen => true,
            _ => false,
        }
    }

    fn send(&mut self) -> Result<Proc> {
        let target = self.ident()?;
        let span = target.span;
        self.expect(&Tok::Bang)?;
        let mut msgs = Vec::new();
        if self.eat(&Tok::LParen) {
            msgs.push(self.message()?);
            while self.eat(&Tok::Amp) {
                msgs.push(self.message()?);
            }
            self.expect(&Tok::RParen)?;
        } else {
            msgs.push(self.message()?);
            // `u!A & B` joins B into the molecule; `u!A & v!B` is parallel.
            while *self.peek() == Tok::Amp
                && matches!(self.peek_at(1), Tok::Ident(n) if starts_upper(n))
                && !matches!(self.peek_at(2), Tok::Bang | Tok::Dot)
            {
                self.bump();
                msgs.push(self.message()?);
            }
        }
        Ok(Proc::Send { target, msgs, span })
    }

    fn message(&mut self) -> Result<Message> {
        let (tag, span) = self.tag()?;
        let args = self.call_args()?;
        Ok(Message { tag, args, span })
    }

    fn call_args(&mut self) -> Result<Vec<Expr>> {
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                args.push(self.expr()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        Ok(args)
    }

    fn rule_block(&mut self) -> Result<Vec<Rule>> {
        self.expect(&Tok::LBrack)?;
        let mut rules = vec![self.rule()?];
        while self.eat(&Tok::Bar) {
            rules.push(self.rule()?);
        }
        self.expect(&Tok::RBrack)?;
        Ok(rules)
    }

    fn rule(&mut self) -> Result<Rule> {
        let span = self.span();
        let mut pattern = vec![self.pattern_msg()?];
        while self.eat(&Tok::Amp) {
            pattern.push(self.pattern_msg()?);
        }
        self.expect(&Tok::Arrow)?;
        let body = self.process()?;
        Ok(Rule { pattern, body, span })
    }

    fn pattern_msg(&mut self) -> Result<PatternMsg> {
        let (tag, span) = self.tag()?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                params.push(self.ident()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        Ok(PatternMsg { tag, params, span })
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr> {
        self.binary(0)
    }

    fn binary(&mut self, level: u8) -> Result<Expr> {
        if level > 2 {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Eq => BinOp::Eq,
                Tok::Lt => BinOp::Lt,
                Tok::Le => BinOp::Le,
                Tok::Gt => BinOp::Gt,
                Tok::Ge => BinOp::Ge,
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                Tok::Times | Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => return Ok(lhs),
            };
            if op.level() != level {
                return Ok(lhs);
            }
            self.bump();
            let rhs = self.binary(level + 1)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
            if level == 0 {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?), span))
            }
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Num(n, span))
            }
            Tok::Kw("true") => {
                self.bump();
                Ok(Expr::Bool(true, span))
            }
            Tok::Kw("false") => {
                self.bump();
                Ok(Expr::Bool(false, span))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrack => {
                let rules = self.rule_block()?;
                Ok(Expr::Block(rules, span))
            }
            Tok::Ident(_) => {
                let target = self.ident()?;
                if self.eat(&Tok::Dot) {
                    let (tag, _) = self.tag()?;
                    let args = self.call_args()?;
                    Ok(Expr::Call { target, tag, args, span })
                } else {
                    Ok(Expr::Var(target))
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_program() {
        let p = parse_program("done").unwrap();
        assert!(matches!(p.body, Proc::Done(_)));
        assert!(p.types.is_empty());
    }

    #[test]
    fn molecule_versus_parallel() {
        let p = parse_program("a!A & B & b!C & c!(D & E)").unwrap();
        let Proc::Par(parts) = p.body else { panic!() };
        assert_eq!(parts.len(), 3);
        let Proc::Send { msgs, .. } = &parts[0] else { panic!() };
        assert_eq!(msgs.len(), 2);
        let Proc::Send { msgs, .. } = &parts[2] else { panic!() };
        assert_eq!(msgs.len(), 2);
    }

    #[test]
    fn types_with_ascii_aliases() {
        let t = parse_type("*(A.B(A)) + 0 · 1").unwrap();
        assert_eq!(t.to_string(), "*(A · B(A)) + 0 · 1");
    }

    #[test]
    fn arithmetic_precedence() {
        let p = parse_program("p!Reply(4. × (1 - (n % 2) × 2) / (2 × n + 1))").unwrap();
        let Proc::Send { msgs, .. } = p.body else { panic!() };
        assert!(matches!(msgs[0].args[0], Expr::Bin(BinOp::Div, ..)));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_program("new x [ A ▶ done in x!A").unwrap_err();
        assert_eq!(err.span, Span { line: 1, col: 18 });
    }
}
