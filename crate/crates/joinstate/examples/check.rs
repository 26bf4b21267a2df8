//! Type-checks every program in the bundled corpus.

use joinstate::check::check_program;
use joinstate::semilinear::DEFAULT_BOUND;
use joinstate::syntax::compile;

const PROGRAMS: &[(&str, &str)] = &[
    ("future_deadlock", include_str!("future_deadlock.cob")),
    ("future_ok", include_str!("future_ok.cob")),
    ("missing_b", include_str!("missing_b.cob")),
    ("extra_b", include_str!("extra_b.cob")),
    ("mutual", include_str!("mutual.cob")),
    ("self_dep", include_str!("self_dep.cob")),
    ("dup_arg", include_str!("dup_arg.cob")),
    ("cd_dup", include_str!("cd_dup.cob")),
    ("sync_deadlock", include_str!("sync_deadlock.cob")),
    ("sync_fixed", include_str!("sync_fixed.cob")),
    ("pi", include_str!("pi.cob")),
    ("sieve", include_str!("sieve.cob")),
];

fn main() {
    for (name, src) in PROGRAMS {
        let core = compile(src).expect("corpus parses");
        let checked = check_program(&core, DEFAULT_BOUND);
        let verdict = if checked.report.accepted() { "accepted" } else { "rejected" };
        println!("{name:16} {verdict}");
        for d in &checked.report.diagnostics {
            println!("    {d}");
        }
    }
}
