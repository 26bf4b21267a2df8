use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::check::check_solution;
use crate::runtime::{run, run_with, RunConfig, RunResult, RunVerdict, RuntimeError, DEFAULT_MAX_STEPS};
use crate::semilinear::DEFAULT_BOUND;
use crate::syntax::CoreProgram;

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub first_seed: u64,
    pub seeds: u64,
    pub max_steps: usize,
    /// Re-type the solution after every step.
    pub check_solutions: bool,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { first_seed: 0, seeds: 100, max_steps: DEFAULT_MAX_STEPS, check_solutions: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FuzzSummary {
    pub runs: u64,
    /// Runs per final verdict, e.g. `Terminated` or `Deadlocked([future])`.
    pub verdicts: BTreeMap<String, u64>,
    pub runs_with_violations: u64,
    pub violations: u64,
    pub deadlocks: u64,
    pub exhausted: u64,
    pub solution_failures: u64,
    /// Runs that deadlocked or tripped a monitor.
    pub flagged: u64,
    /// Distinct printed outputs across runs.
    pub outputs: BTreeSet<Vec<String>>,
}

impl FuzzSummary {
    /// No monitor fired, no run deadlocked and every checked state typed.
    pub fn clean(&self) -> bool {
        self.violations == 0 && self.deadlocks == 0 && self.solution_failures == 0
    }

    /// Every run either deadlocked or tripped a monitor.
    pub fn all_violating(&self) -> bool {
        self.flagged == self.runs
    }

    fn record(&mut self, result: &RunResult) {
        self.runs += 1;
        *self.verdicts.entry(result.verdict.to_string()).or_default() += 1;
        self.violations += result.violations.len() as u64;
        self.runs_with_violations += u64::from(!result.violations.is_empty());
        match result.verdict {
            RunVerdict::Deadlocked(_) => self.deadlocks += 1,
            RunVerdict::StepBudgetExhausted => self.exhausted += 1,
            RunVerdict::Terminated => {}
        }
        self.flagged += u64::from(!result.violations.is_empty() || matches!(result.verdict, RunVerdict::Deadlocked(_)));
        self.outputs.insert(result.prints.clone());
    }
}

/// Runs `program` once per seed with monitors on.
pub fn fuzz_schedules(program: &CoreProgram, config: &FuzzConfig) -> Result<FuzzSummary, RuntimeError> {
    let mut summary = FuzzSummary::default();
    for seed in config.first_seed..config.first_seed + config.seeds {
        let run_config = RunConfig { seed, max_steps: config.max_steps, monitors: true };
        let result = if config.check_solutions {
            let mut failures = 0;
            let r = run_with(program, &run_config, |soup| failures += u64::from(!check_solution(soup, DEFAULT_BOUND).ok))?;
            summary.solution_failures += failures;
            r
        } else {
            run(program, &run_config)?
        };
        summary.record(&result);
    }
    Ok(summary)
}
