//! Runs the unresolved future without type checking and watches it get stuck.

use joinstate::runtime::{run, RunConfig};
use joinstate::syntax::compile;

fn main() {
    let program = compile(include_str!("future_deadlock.cob")).unwrap();
    let result = run(&program, &RunConfig::default()).unwrap();
    for e in &result.trace {
        println!("{e}");
    }
    println!("{}", result.verdict);
}
