mod common;

use common::CORPUS;
use joinstate::check::check_program;
use joinstate::runtime::{run, run_with, EventKind, RunConfig};
use joinstate::syntax::compile;

fn program(src: &str) -> joinstate::syntax::CoreProgram {
    check_program(&compile(src).unwrap(), 4).program
}

#[test]
fn runs_are_deterministic() {
    for (name, src) in CORPUS {
        let p = program(src);
        let cfg = RunConfig { seed: 42, max_steps: 3000, monitors: true };
        assert_eq!(run(&p, &cfg).unwrap(), run(&p, &cfg).unwrap(), "{name}");
    }
}

#[test]
fn messages_are_conserved() {
    for (name, src) in CORPUS {
        let p = program(src);
        let cfg = RunConfig { seed: 3, max_steps: 2000, monitors: false };
        let mut states = Vec::new();
        let result = run_with(&p, &cfg, |s| states.push((s.pending(), s.messages_stored()))).unwrap();
        let fired: Vec<usize> = result
            .trace
            .iter()
            .filter(|e| e.kind == EventKind::Fire)
            .map(|e| e.tags.split(" & ").count())
            .collect();
        assert_eq!(fired.len() + 1, states.len(), "{name}");
        for (w, consumed) in states.windows(2).zip(fired) {
            let ((before, stored_before), (after, stored_after)) = (w[0], w[1]);
            assert_eq!(after + consumed, before + stored_after - stored_before, "{name}");
        }
    }
}

#[test]
fn trace_steps_are_monotone() {
    for (name, src) in CORPUS {
        let result = run(&program(src), &RunConfig { seed: 9, max_steps: 1500, monitors: true }).unwrap();
        assert!(result.trace.windows(2).all(|w| w[0].step <= w[1].step), "{name}");
        let prints = result.trace.iter().filter(|e| e.kind == EventKind::Print).count();
        assert_eq!(prints, result.prints.len(), "{name}");
    }
}

#[test]
fn pi_output_is_schedule_independent() {
    let p = program(common::source("pi"));
    let outputs: std::collections::BTreeSet<Vec<String>> =
        (0..4).map(|seed| run(&p, &RunConfig { seed, ..RunConfig::default() }).unwrap().prints).collect();
    assert_eq!(outputs.len(), 1);
}
