//! The prime sieve never terminates; stop it after a fixed budget.

use joinstate::runtime::{run, RunConfig};
use joinstate::syntax::compile;

fn main() {
    let program = compile(include_str!("sieve.cob")).unwrap();
    let cfg = RunConfig { seed: 7, max_steps: 5_000, monitors: true };
    let result = run(&program, &cfg).unwrap();
    println!("{}", result.prints.join(" "));
    println!("{} after {} steps, {} violations", result.verdict, result.steps, result.violations.len());
}
