//! Schedule fuzzing with monitors and solution re-typing.

use joinstate::check::check_program;
use joinstate::oracle::{fuzz_schedules, FuzzConfig};
use joinstate::semilinear::DEFAULT_BOUND;
use joinstate::syntax::compile;

fn main() {
    for (name, src) in [("future_ok", include_str!("future_ok.cob")), ("missing_b", include_str!("missing_b.cob"))] {
        let checked = check_program(&compile(src).unwrap(), DEFAULT_BOUND);
        let config = FuzzConfig { first_seed: 0, seeds: 25, max_steps: 2_000, check_solutions: checked.report.accepted() };
        let summary = fuzz_schedules(&checked.program, &config).unwrap();
        println!(
            "{name}: {} runs, {} violations, {} deadlocks, {} ill-typed states",
            summary.runs, summary.violations, summary.deadlocks, summary.solution_failures
        );
    }
}
