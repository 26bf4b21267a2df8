//! The `joinstate` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::check::{check_program, Checked};
use crate::oracle::{fuzz_schedules, FuzzConfig};
use crate::runtime::{run, RunConfig, RunVerdict, DEFAULT_MAX_STEPS};
use crate::semilinear::{parikh, DEFAULT_BOUND};
use crate::syntax::{compile, CoreProgram};
use crate::types::TypeExpr;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_MONITOR: i32 = 2;
pub const EXIT_DEADLOCKED: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INPUT: i32 = 65;
pub const EXIT_RUNTIME: i32 = 70;

#[derive(Parser, Debug)]
#[command(name = "joinstate", version, about = "Type checker and runtime for behaviorally typed join programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scheduler seed (first seed for `fuzz`).
    #[arg(long, global = true, env = "JOINSTATE_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
    /// Transport bound of the subtype engine.
    #[arg(long, global = true, default_value_t = DEFAULT_BOUND)]
    pub bound: usize,
    #[arg(long, global = true)]
    pub json: bool,
    /// Run programs even if they are ill typed.
    #[arg(long, global = true)]
    pub no_typecheck: bool,
    #[arg(long, global = true, value_enum, default_value_t = Switch::On)]
    pub monitors: Switch,
    /// Write the execution trace as JSON.
    #[arg(long, global = true, value_name = "PATH")]
    pub trace_json: Option<PathBuf>,
    /// Print the execution trace to standard error.
    #[arg(long, global = true)]
    pub trace: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Type-check a program.
    Check { file: PathBuf },
    /// Type-check and execute a program.
    Run { file: PathBuf },
    /// Show types, Parikh images, patterns, liveness and dependencies.
    Explain { file: PathBuf },
    /// Run a program under many scheduler seeds with monitors on.
    Fuzz {
        file: PathBuf,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Succeed only if every run deadlocks or trips a monitor.
        #[arg(long)]
        expect_violation: bool,
        /// Re-type the running solution after every step.
        #[arg(long)]
        check_solutions: bool,
    },
}

impl Command {
    fn file(&self) -> &PathBuf {
        match self {
            Command::Check { file } | Command::Run { file } | Command::Explain { file } | Command::Fuzz { file, .. } => file,
        }
    }
}

/// Parses arguments and runs a command, returning the exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let path = cli.command.file();
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "error: cannot read {}: {e}", path.display())?;
            return Ok(EXIT_USAGE);
        }
    };
    let core = match compile(&src) {
        Ok(core) => core,
        Err(e) => {
            writeln!(err, "{}:{e}", path.display())?;
            return Ok(EXIT_INPUT);
        }
    };
    let checked = check_program(&core, cli.bound);
    let report_diagnostics = |err: &mut dyn Write, checked: &Checked| -> std::io::Result<()> {
        for d in &checked.report.diagnostics {
            writeln!(err, "{}:{d}", path.display())?;
        }
        Ok(())
    };
    match &cli.command {
        Command::Check { .. } => {
            if cli.json {
                writeln!(out, "{}", to_json(&checked.report))?;
            } else {
                writeln!(out, "{}: {}", path.display(), if checked.report.accepted() { "accepted" } else { "rejected" })?;
                for b in &checked.report.bounded_subtype_uses {
                    writeln!(err, "note: {} ≤ {} holds up to bound {} ({})", b.left, b.right, b.bound, b.context)?;
                }
            }
            report_diagnostics(err, &checked)?;
            Ok(if checked.report.accepted() { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Run { .. } => {
            if !checked.report.accepted() && !cli.no_typecheck {
                report_diagnostics(err, &checked)?;
                return Ok(EXIT_REJECTED);
            }
            run_program(cli, &checked.program, out, err)
        }
        Command::Explain { .. } => {
            explain(cli, &checked, out)?;
            Ok(EXIT_OK)
        }
        Command::Fuzz { seeds, expect_violation, check_solutions, .. } => {
            if !checked.report.accepted() && !expect_violation && !cli.no_typecheck {
                report_diagnostics(err, &checked)?;
                return Ok(EXIT_REJECTED);
            }
            let config = FuzzConfig {
                first_seed: cli.seed,
                seeds: *seeds,
                max_steps: cli.max_steps,
                check_solutions: *check_solutions,
            };
            let summary = match fuzz_schedules(&checked.program, &config) {
                Ok(s) => s,
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    return Ok(EXIT_RUNTIME);
                }
            };
            if cli.json {
                writeln!(out, "{}", to_json(&summary))?;
            } else {
                writeln!(out, "runs: {}", summary.runs)?;
                for (verdict, n) in &summary.verdicts {
                    writeln!(out, "  {n} × {verdict}")?;
                }
                writeln!(out, "monitor violations: {} in {} runs", summary.violations, summary.runs_with_violations)?;
                if *check_solutions {
                    writeln!(out, "ill-typed states: {}", summary.solution_failures)?;
                }
                writeln!(out, "distinct outputs: {}", summary.outputs.len())?;
            }
            let ok = if *expect_violation { summary.all_violating() } else { summary.clean() };
            Ok(if ok { EXIT_OK } else { EXIT_REJECTED })
        }
    }
}

fn run_program(cli: &Cli, program: &CoreProgram, out: &mut dyn Write, err: &mut dyn Write) -> std::io::Result<i32> {
    let config = RunConfig { seed: cli.seed, max_steps: cli.max_steps, monitors: cli.monitors == Switch::On };
    let result = match run(program, &config) {
        Ok(r) => r,
        Err(e) => {
            writeln!(err, "runtime error: {e}")?;
            return Ok(EXIT_RUNTIME);
        }
    };
    if let Some(path) = &cli.trace_json {
        std::fs::write(path, to_json(&result.trace))?;
    }
    if cli.trace {
        for e in &result.trace {
            writeln!(err, "{e}")?;
        }
    }
    if cli.json {
        #[derive(Serialize)]
        struct Summary<'a> {
            #[serde(flatten)]
            verdict: &'a RunVerdict,
            violations: &'a [crate::runtime::Violation],
            prints: &'a [String],
            steps: usize,
            messages: usize,
            objects: &'a std::collections::BTreeMap<String, usize>,
        }
        let summary = Summary {
            verdict: &result.verdict,
            violations: &result.violations,
            prints: &result.prints,
            steps: result.steps,
            messages: result.messages,
            objects: &result.objects,
        };
        writeln!(out, "{}", to_json(&summary))?;
    } else {
        for p in &result.prints {
            writeln!(out, "{p}")?;
        }
        for v in &result.violations {
            writeln!(err, "step {}: {:?} {} (residual {})", v.step, v.kind, v.object, v.residual)?;
        }
        writeln!(err, "{} after {} steps", result.verdict, result.steps)?;
    }
    Ok(if !result.violations.is_empty() {
        EXIT_MONITOR
    } else {
        match result.verdict {
            RunVerdict::Terminated => EXIT_OK,
            RunVerdict::Deadlocked(_) => EXIT_DEADLOCKED,
            RunVerdict::StepBudgetExhausted => EXIT_BUDGET,
        }
    })
}

#[derive(Serialize)]
struct Explained {
    types: Vec<ExplainedType>,
    report: crate::check::Report,
}

#[derive(Serialize)]
struct ExplainedType {
    name: String,
    definition: String,
    parikh: String,
}

fn explain(cli: &Cli, checked: &Checked, out: &mut dyn Write) -> std::io::Result<()> {
    let table = &checked.program.table;
    let types: Vec<ExplainedType> = table
        .iter()
        .map(|(name, def)| {
            let (alpha, set) = parikh(&TypeExpr::Ref(name.clone()), table);
            let parikh = set.display(&alpha).to_string().trim_end().to_string();
            ExplainedType { name: name.clone(), definition: def.to_string(), parikh }
        })
        .collect();
    if cli.json {
        let explained = Explained { types, report: checked.report.clone() };
        return writeln!(out, "{}", to_json(&explained));
    }
    for t in &types {
        writeln!(out, "type {} = {}", t.name, t.definition)?;
        for line in t.parikh.lines() {
            writeln!(out, "  parikh: {line}")?;
        }
    }
    for o in &checked.report.objects {
        writeln!(out, "object {} : {}{}", o.name, o.ty, if o.inferred { " (inferred)" } else { "" })?;
        writeln!(out, "  patterns: {{{}}}", o.patterns.join(", "))?;
        writeln!(out, "  live: {}", o.live)?;
        let blocks: Vec<String> = o.deps.iter().map(|b| format!("{{{}}}", b.join(", "))).collect();
        writeln!(out, "  dependencies: {}", if blocks.is_empty() { "none".into() } else { blocks.join(" ") })?;
    }
    writeln!(out, "verdict: {}", if checked.report.accepted() { "accepted" } else { "rejected" })?;
    for d in &checked.report.diagnostics {
        writeln!(out, "  {d}")?;
    }
    Ok(())
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}
