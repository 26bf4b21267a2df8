mod common;

use std::time::{Duration, Instant};

use joinstate::check::{check_program, check_solution, Code};
use joinstate::deps::DependencyRelation;
use joinstate::oracle::{oracle_subtype, fuzz_schedules, FuzzConfig, OracleVerdict, TypeGen, TypeGenSpec};
use joinstate::runtime::{run, run_with, RunConfig, RunVerdict};
use joinstate::semilinear::{equivalent, SubtypeEngine, Verdict};
use joinstate::syntax::{compile, parse_type, CoreProgram};
use joinstate::types::{derivative, derivative_config, enumerate_configurations, relevant, TypeExpr, TypeTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn program(name: &str) -> CoreProgram {
    let checked = check_program(&compile(common::source(name)).expect("corpus compiles"), 4);
    checked.program
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let spent = start.elapsed();
    if spent <= limit {
        Ok(())
    } else {
        Err(format!("took {spent:.2?}, limit {limit:?}"))
    }
}

fn corpus_rejection() -> Outcome {
    let start = Instant::now();
    let expected = [
        ("future_deadlock", Code::IncompatibleDeps),
        ("missing_b", Code::ProtocolViolation),
        ("extra_b", Code::ProtocolViolation),
        ("mutual", Code::IncompatibleDeps),
        ("self_dep", Code::SelfDependency),
        ("dup_arg", Code::DuplicateArgument),
        ("cd_dup", Code::IncompatibleDeps),
        ("sync_deadlock", Code::IncompatibleDeps),
    ];
    for (name, code) in expected {
        let report = check_program(&compile(common::source(name)).map_err(|e| e.to_string())?, 4).report;
        if report.accepted() || !report.codes().contains(&code) {
            return Err(format!("{name}: expected {code}, got {:?}", report.codes()));
        }
        if name == "sync_deadlock" {
            let d = report.diagnostics.iter().find(|d| d.code == code).unwrap();
            if !(d.names.iter().any(|n| n == "future") && d.names.iter().any(|n| n.starts_with("cont"))) {
                return Err(format!("sync deadlock names {:?}", d.names));
            }
        }
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("{} programs rejected with the expected codes in {:.2?}", expected.len(), start.elapsed()))
}

fn corpus_acceptance() -> Outcome {
    let start = Instant::now();
    for name in common::ACCEPTED {
        let report = check_program(&compile(common::source(name)).map_err(|e| e.to_string())?, 4).report;
        if !report.accepted() {
            return Err(format!("{name}: {:?}", report.diagnostics));
        }
    }
    within(Duration::from_secs(5), start)?;
    Ok(format!("{} programs accepted in {:.2?}", common::ACCEPTED.len(), start.elapsed()))
}

fn pi_execution() -> Outcome {
    let direct: f64 = (0..1024).map(|n| 4.0 * if n % 2 == 0 { 1.0 } else { -1.0 } / (2 * n + 1) as f64).sum();
    let tolerance = 4.0 / 2049.0;
    if (direct - std::f64::consts::PI).abs() > tolerance {
        return Err(format!("direct partial sum {direct} is outside the bound"));
    }
    let p = program("pi");
    let mut slowest = Duration::ZERO;
    let mut value = 0.0;
    for seed in 0..20 {
        let start = Instant::now();
        let r = run(&p, &RunConfig { seed, ..RunConfig::default() }).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        within(Duration::from_secs(10), start)?;
        if r.verdict != RunVerdict::Terminated {
            return Err(format!("seed {seed}: {}", r.verdict));
        }
        if r.objects.get("#Worker") != Some(&2047) {
            return Err(format!("seed {seed}: workers {:?}", r.objects));
        }
        let [printed] = r.prints.as_slice() else { return Err(format!("seed {seed}: prints {:?}", r.prints)) };
        value = printed.parse::<f64>().map_err(|e| e.to_string())?;
        if (value - std::f64::consts::PI).abs() > tolerance || (value - direct).abs() > 1e-9 {
            return Err(format!("seed {seed}: printed {value}"));
        }
        if !r.violations.is_empty() {
            return Err(format!("seed {seed}: {:?}", r.violations[0]));
        }
    }
    Ok(format!("20 seeds, 2047 workers, v = {value}, |v − π| = {:.2e}, slowest {slowest:.2?}", (value - std::f64::consts::PI).abs()))
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn sieve_execution() -> Outcome {
    let r = run(&program("sieve"), &RunConfig { max_steps: 20000, ..RunConfig::default() }).map_err(|e| e.to_string())?;
    if r.verdict != RunVerdict::StepBudgetExhausted {
        return Err(format!("verdict {}", r.verdict));
    }
    let primes: Vec<u64> = r.prints.iter().map(|p| p.parse().map_err(|_| format!("printed {p}"))).collect::<Result<_, _>>()?;
    if primes.len() < 5 || primes[..5] != [2, 3, 5, 7, 11] {
        return Err(format!("printed {primes:?}"));
    }
    let expected: Vec<u64> = (2..).filter(|&n| is_prime(n)).take(primes.len()).collect();
    if primes != expected {
        return Err(format!("printed {primes:?}"));
    }
    Ok(format!("{} primes printed, last {}, StepBudgetExhausted", primes.len(), primes.last().unwrap()))
}

fn derivative_facts() -> Outcome {
    let table = TypeTable::resolve([
        ("#FutureT", parse_type("(EMPTY · Resolve(#Number) + RESOLVED(#Number)) · *Get(#Reply)").unwrap()),
        ("#Reply", parse_type("Reply(#Number)").unwrap()),
    ])
    .map_err(|e| e.to_string())?;
    let ty = |s: &str| table.close(parse_type(s).unwrap()).unwrap();
    let future = TypeExpr::Ref("#FutureT".into());
    let tags = |ts: &[&str]| ts.iter().map(|t| t.to_string()).collect::<Vec<_>>();

    let waiting = derivative_config(&future, &tags(&["EMPTY", "Get"]), &table);
    let v = equivalent(&waiting, &ty("Resolve(#Number) · *Get(#Reply)"), &table);
    if v != Verdict::Yes {
        return Err(format!("#FutureT[⟨EMPTY, Get⟩] = {waiting}: {v:?}"));
    }
    if !relevant(&waiting, &table) {
        return Err("#FutureT[⟨EMPTY, Get⟩] is not relevant".into());
    }
    let empty = TypeTable::new();
    let ab = parse_type("*(A · B)").unwrap();
    let after_b = derivative(&ab, "B", &empty);
    let v = equivalent(&after_b, &parse_type("A · *(A · B)").unwrap(), &empty);
    if v != Verdict::Yes {
        return Err(format!("(*(A · B))[B] = {after_b}: {v:?}"));
    }
    let resolved = derivative_config(&future, &tags(&["RESOLVED"]), &table);
    if relevant(&resolved, &table) {
        return Err(format!("#FutureT[⟨RESOLVED⟩] = {resolved} is relevant"));
    }
    Ok("three derivative facts hold with exact Yes".into())
}

fn fuzz_harness() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    for name in common::ACCEPTED {
        let config = FuzzConfig { first_seed: 0, seeds: 100, max_steps: 20000, check_solutions: false };
        let summary = fuzz_schedules(&program(name), &config).map_err(|e| e.to_string())?;
        if !summary.clean() || summary.runs != 100 {
            return Err(format!("{name}: {summary:?}"));
        }
        runs += summary.runs;
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!("{runs} runs, 0 violations, 0 deadlocks in {:.2?}", start.elapsed()))
}

fn preservation_harness() -> Outcome {
    let start = Instant::now();
    let mut states = 0;
    for name in common::ACCEPTED {
        let p = program(name);
        for seed in 0..10 {
            let mut failure = None;
            run_with(&p, &RunConfig { seed, max_steps: 200, monitors: true }, |soup| {
                states += 1;
                let check = check_solution(soup, 4);
                if !check.ok && failure.is_none() {
                    failure = Some(format!("{name} seed {seed} step {}: {:?}", soup.step_count(), check.diagnostics));
                }
            })
            .map_err(|e| e.to_string())?;
            if let Some(f) = failure {
                return Err(f);
            }
        }
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!("{states} states re-typed in {:.2?}", start.elapsed()))
}

fn random_deps(rng: &mut ChaCha8Rng) -> DependencyRelation<u8> {
    let mut d = DependencyRelation::empty();
    for _ in 0..rng.gen_range(0..6) {
        if let Ok(p) = DependencyRelation::pair(rng.gen_range(0..8u8), rng.gen_range(0..8u8)) {
            if let Ok(j) = d.join(&p) {
                d = j;
            }
        }
    }
    d
}

fn algebra_suite() -> Outcome {
    let start = Instant::now();
    let table = joinstate::oracle::generator_table();
    let mut engine = SubtypeEngine::new(&table, 4);
    let mut generator = TypeGen::new(TypeGenSpec { seed: 2024, max_depth: 3, ..TypeGenSpec::default() });
    let types: Vec<TypeExpr> = (0..500).map(|_| generator.next_type()).collect();
    let tags = ["a", "b", "c"];
    let mut failures = Vec::new();
    let mut beyond = Vec::new();
    let mut fail = |what: String| failures.push(what);

    for (i, t) in types.iter().enumerate() {
        let s = &types[(i + 1) % types.len()];
        let r = &types[(i + 7) % types.len()];
        let star = TypeExpr::star(t.clone());
        let sum = |a: &TypeExpr, b: &TypeExpr| TypeExpr::Sum(vec![a.clone(), b.clone()]);
        let prod = |a: &TypeExpr, b: &TypeExpr| TypeExpr::Prod(vec![a.clone(), b.clone()]);
        let mut le = |a: &TypeExpr, b: &TypeExpr| engine.subtype(a, b).holds();
        let laws: [(&str, bool); 11] = [
            ("*t ≤ *t·*t", le(&star, &prod(&star, &star))),
            ("*t ≤ t", le(&star, t)),
            ("t+s ≃ s+t", le(&sum(t, s), &sum(s, t)) && le(&sum(s, t), &sum(t, s))),
            ("t·s ≃ s·t", le(&prod(t, s), &prod(s, t)) && le(&prod(s, t), &prod(t, s))),
            ("(t+s)+r ≃ t+(s+r)", le(&sum(&sum(t, s), r), &sum(t, &sum(s, r))) && le(&sum(t, &sum(s, r)), &sum(&sum(t, s), r))),
            ("(t·s)·r ≃ t·(s·r)", le(&prod(&prod(t, s), r), &prod(t, &prod(s, r))) && le(&prod(t, &prod(s, r)), &prod(&prod(t, s), r))),
            ("t+t ≃ t", le(&sum(t, t), t) && le(t, &sum(t, t))),
            ("t+0 ≃ t", le(&sum(t, &TypeExpr::Zero), t) && le(t, &sum(t, &TypeExpr::Zero))),
            ("t·1 ≃ t", le(&prod(t, &TypeExpr::One), t) && le(t, &prod(t, &TypeExpr::One))),
            ("t·(s+r) ≃ t·s+t·r", le(&prod(t, &sum(s, r)), &sum(&prod(t, s), &prod(t, r))) && le(&sum(&prod(t, s), &prod(t, r)), &prod(t, &sum(s, r)))),
            ("t·0 ≃ 0", le(&prod(t, &TypeExpr::Zero), &TypeExpr::Zero) && le(&TypeExpr::Zero, &prod(t, &TypeExpr::Zero))),
        ];
        for (law, ok) in laws {
            if !ok {
                fail(format!("{law} for t = {t}"));
            }
        }

        for m1 in tags {
            for m2 in tags {
                let a = derivative(&derivative(t, m1, &table), m2, &table);
                let b = derivative(&derivative(t, m2, &table), m1, &table);
                if enumerate_configurations(&a, 4, &table) != enumerate_configurations(&b, 4, &table) {
                    fail(format!("t[{m1}][{m2}] ≠ t[{m2}][{m1}] for t = {t}"));
                }
            }
        }

        let big = sum(t, s);
        if engine.subtype(&big, t) == Verdict::Yes {
            for m in tags {
                if let Verdict::No(c) = engine.subtype(&derivative(&big, m, &table), &derivative(t, m, &table)) {
                    fail(format!("derivative by {m} breaks {big} ≤ {t}: {c}"));
                }
            }
        }

        for (a, b) in [(t.clone(), s.clone()), (big.clone(), t.clone()), (star.clone(), prod(t, t))] {
            let verdict = engine.subtype(&a, &b);
            match (&verdict, oracle_subtype(&a, &b, 6, &table)) {
                (Verdict::No(c), OracleVerdict::Holds(_)) if c.size() > 6 => beyond.push(format!("{a} ≤ {b}: {c}")),
                (Verdict::No(c), OracleVerdict::Holds(_)) => fail(format!("engine refutes {a} ≤ {b} with {c}, oracle holds")),
                (Verdict::Yes | Verdict::YesBounded(_), OracleVerdict::Counterexample(c)) => {
                    fail(format!("engine accepts {a} ≤ {b}, oracle counterexample {c}"))
                }
                _ => {}
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let (d1, d2, d3) = (random_deps(&mut rng), random_deps(&mut rng), random_deps(&mut rng));
        let left = d1.join(&d2).and_then(|d| d.join(&d3)).ok();
        let right = d2.join(&d3).and_then(|d| d1.join(&d)).ok();
        if left != right {
            failures.push(format!("join is not associative on {d1}, {d2}, {d3}"));
        }
    }

    for b in &beyond {
        println!("    logged: counterexample beyond size 6: {b}");
    }
    if let Some(first) = failures.first() {
        return Err(format!("{} failures, first: {first}", failures.len()));
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!("500 types, 0 failures, {} logged beyond bound, {:.2?}", beyond.len(), start.elapsed()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("corpus rejection", corpus_rejection),
        ("corpus acceptance", corpus_acceptance),
        ("pi execution", pi_execution),
        ("sieve execution", sieve_execution),
        ("derivative facts", derivative_facts),
        ("fuzz harness", fuzz_harness),
        ("preservation harness", preservation_harness),
        ("algebra property suite", algebra_suite),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
