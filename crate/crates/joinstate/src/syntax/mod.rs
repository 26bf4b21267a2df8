//! Surface language: lexing, parsing, name resolution and desugaring into
//! the core calculus.

pub mod ast;
pub mod core;
pub mod desugar;
pub mod lexer;
pub mod parser;
pub mod resolve;

use std::fmt;

use crate::types::TypeTableError;

pub use self::core::{alpha_eq, pretty, CoreProgram, Name, Process};
pub use parser::{parse_program, parse_type};

/// A source position; lines and columns start at 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct SyntaxError {
    pub span: Span,
    pub message: String,
}

impl SyntaxError {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        SyntaxError { span, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrontendError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{span}: {source}")]
    TypeTable { span: Span, source: TypeTableError },
    #[error("{span}: {message}")]
    Resolve { span: Span, message: String },
    #[error("{span}: {message}")]
    Desugar { span: Span, message: String },
}

impl FrontendError {
    pub fn span(&self) -> Span {
        match self {
            FrontendError::Syntax(e) => e.span,
            FrontendError::TypeTable { span, .. }
            | FrontendError::Resolve { span, .. }
            | FrontendError::Desugar { span, .. } => *span,
        }
    }
}

/// Parses, resolves and desugars a whole program.
pub fn compile(src: &str) -> Result<CoreProgram, FrontendError> {
    let mut ast = parse_program(src)?;
    let next = resolve::resolve(&mut ast)?;
    desugar::desugar(&ast, next)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CORPUS: &[(&str, &str)] = &[
        ("future_deadlock", include_str!("../../examples/future_deadlock.cob")),
        ("future_ok", include_str!("../../examples/future_ok.cob")),
        ("missing_b", include_str!("../../examples/missing_b.cob")),
        ("extra_b", include_str!("../../examples/extra_b.cob")),
        ("mutual", include_str!("../../examples/mutual.cob")),
        ("self_dep", include_str!("../../examples/self_dep.cob")),
        ("dup_arg", include_str!("../../examples/dup_arg.cob")),
        ("cd_dup", include_str!("../../examples/cd_dup.cob")),
        ("sync_deadlock", include_str!("../../examples/sync_deadlock.cob")),
        ("sync_fixed", include_str!("../../examples/sync_fixed.cob")),
        ("pi", include_str!("../../examples/pi.cob")),
        ("sieve", include_str!("../../examples/sieve.cob")),
    ];

    #[test]
    fn corpus_round_trips() {
        for (name, src) in CORPUS {
            let core = compile(src).unwrap_or_else(|e| panic!("{name}: {e}"));
            let printed = format!("{}{}", core.table, pretty(&core.process));
            let again = compile(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
            assert!(alpha_eq(&core.process, &again.process), "{name}:\n{printed}");
            assert_eq!(core.table, again.table);
        }
    }
}
