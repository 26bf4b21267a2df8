//! Behavioral types, a type checker and a chemical abstract machine for the
//! typed Objective Join Calculus.

pub mod check;
pub mod cli;
pub mod deps;
pub mod oracle;
pub mod runtime;
pub mod semilinear;
pub mod syntax;
pub mod types;
