//! Runs the parallel pi approximation under a few schedules.

use joinstate::runtime::{run, RunConfig};
use joinstate::syntax::compile;

fn main() {
    let program = compile(include_str!("pi.cob")).unwrap();
    for seed in 0..3 {
        let cfg = RunConfig { seed, ..RunConfig::default() };
        let result = run(&program, &cfg).unwrap();
        println!(
            "seed {seed}: {} in {} steps, printed {:?}",
            result.verdict, result.steps, result.prints
        );
    }
}
