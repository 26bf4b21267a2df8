use std::fmt;

use super::{Span, SyntaxError};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    TypeName(String),
    Num(f64),
    Kw(&'static str),
    Bang,
    Amp,
    Bar,
    Arrow,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Colon,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Times,
    Slash,
    Percent,
    Dot,
    Middot,
    Eof,
}

const KEYWORDS: &[&str] =
    &["new", "in", "class", "let", "if", "then", "else", "done", "type", "and", "true", "false"];

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) | Tok::TypeName(s) => return write!(f, "`{s}`"),
            Tok::Num(n) => return write!(f, "`{n}`"),
            Tok::Kw(k) => return write!(f, "`{k}`"),
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Arrow => "▶",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Times => "×",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Dot => ".",
            Tok::Middot => "·",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let start = i;
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word),
            }
        } else if c == '#' {
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if i == start + 1 {
                return Err(SyntaxError::new(span, "expected a type name after `#`"));
            }
            col += (i - start) as u32;
            Tok::TypeName(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if chars.get(i) == Some(&'.') {
                match chars.get(i + 1) {
                    Some(d) if d.is_ascii_digit() => {
                        i += 1;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                    None => i += 1,
                    Some(d) if d.is_whitespace() || matches!(d, ')' | ',' | ']') => i += 1,
                    _ => {}
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let text = text.trim_end_matches('.');
            Tok::Num(text.parse().map_err(|_| SyntaxError::new(span, "malformed number"))?)
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, len) = match (c, next) {
                ('|', Some('>')) => (Tok::Arrow, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('!', _) => (Tok::Bang, 1),
                ('&', _) => (Tok::Amp, 1),
                ('|', _) => (Tok::Bar, 1),
                ('▶', _) => (Tok::Arrow, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('[', _) => (Tok::LBrack, 1),
                (']', _) => (Tok::RBrack, 1),
                (',', _) => (Tok::Comma, 1),
                (':', _) => (Tok::Colon, 1),
                ('=', _) => (Tok::Eq, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('×', _) => (Tok::Times, 1),
                ('/', _) => (Tok::Slash, 1),
                ('%', _) => (Tok::Percent, 1),
                ('.', _) => (Tok::Dot, 1),
                ('·', _) => (Tok::Middot, 1),
                _ => return Err(SyntaxError::new(span, format!("unknown character `{c}`"))),
            };
            advance(len, &mut i, &mut col);
            tok
        };
        out.push(Token { tok, span });
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn trailing_dot_numbers() {
        assert_eq!(toks("4. × n"), vec![Tok::Num(4.0), Tok::Times, Tok::Ident("n".into()), Tok::Eof]);
        assert_eq!(toks("2.5)"), vec![Tok::Num(2.5), Tok::RParen, Tok::Eof]);
        assert_eq!(toks("1.a"), vec![Tok::Num(1.0), Tok::Dot, Tok::Ident("a".into()), Tok::Eof]);
    }

    #[test]
    fn arrows_and_comments() {
        assert_eq!(toks("A ▶ done // note\n|> |"), vec![
            Tok::Ident("A".into()),
            Tok::Arrow,
            Tok::Kw("done"),
            Tok::Arrow,
            Tok::Bar,
            Tok::Eof
        ]);
    }

    #[test]
    fn positions() {
        let t = lex("new\n  obj").unwrap();
        assert_eq!(t[1].span, Span { line: 2, col: 3 });
    }

    #[test]
    fn unknown_character() {
        let err = lex("a $ b").unwrap_err();
        assert_eq!((err.span.line, err.span.col), (1, 3));
    }
}
