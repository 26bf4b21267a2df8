use super::*;
use crate::syntax::compile;

fn check(src: &str) -> Report {
    let core = compile(src).unwrap_or_else(|e| panic!("{e}"));
    check_program(&core, crate::semilinear::DEFAULT_BOUND).report
}

fn corpus(name: &str) -> String {
    let path = format!("{}/examples/{name}.cob", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn corpus_verdicts() {
    for (name, code) in [
        ("future_deadlock", Code::IncompatibleDeps),
        ("missing_b", Code::ProtocolViolation),
        ("extra_b", Code::ProtocolViolation),
        ("mutual", Code::IncompatibleDeps),
        ("self_dep", Code::SelfDependency),
        ("dup_arg", Code::DuplicateArgument),
        ("cd_dup", Code::IncompatibleDeps),
        ("sync_deadlock", Code::IncompatibleDeps),
    ] {
        let r = check(&corpus(name));
        assert!(!r.accepted(), "{name} accepted");
        assert!(r.codes().contains(&code), "{name}: {:#?}", r.diagnostics);
    }
    for name in ["future_ok", "sync_fixed", "pi", "sieve"] {
        let r = check(&corpus(name));
        assert!(r.accepted(), "{name}: {:#?}", r.diagnostics);
    }
}

#[test]
fn molecule_slots() {
    let src = "type #FutureT = (EMPTY · Resolve(#Number) + RESOLVED(#Number)) · *Get(#Reply)
        and #Reply = Reply(#Number)
        new future : #FutureT
        [ EMPTY & Resolve(n) ▶ future!RESOLVED(n)
        | RESOLVED(n) & Get(r) ▶ future!RESOLVED(n) & r!Reply(n) ]
        in future!EMPTY & future!Resolve(1) & new user : #Reply + 1 [ Reply(n) ▶ done ] in future!Get(user)";
    let core = compile(src).unwrap();
    let mut c = Checker::new(&core.table, 4);
    let future = Name { id: 1000, text: "future".into() };
    let user = Name { id: 1001, text: "user".into() };
    let reply = TypeExpr::Ref("#Reply".into());
    c.decls.insert(1000, Decl { ty: Some(core.table.lookup("#FutureT").clone()), stateless: false, origin: Origin::New });
    c.decls.insert(1001, Decl { ty: Some(reply.clone()), stateless: false, origin: Origin::New });
    let msg = CMsg { tag: "Get".into(), args: vec![CExpr::Var(user.clone())], span: Span::default() };
    let (ty, env, objects) = c.check_molecule(&future, &[msg], Span::default()).unwrap();
    assert_eq!(ty, TypeExpr::msg("Get", vec![reply.clone()]));
    assert_eq!(env[&user], reply);
    assert_eq!(objects, vec![user]);
    let r = check(src);
    assert!(r.accepted(), "{:#?}", r.diagnostics);
}

#[test]
fn branch_rule_needs_nullable_worker() {
    let src = corpus("pi");
    let r = check(&src);
    let worker = r.objects.iter().find(|o| o.name == "this").unwrap();
    assert!(worker.patterns.contains(&"⟨BRANCH, Left, Right⟩".to_string()), "{:?}", worker.patterns);
    let bad = src.replace("#Leaf + #Branch + 1", "#Leaf + #Branch");
    let r = check(&bad);
    assert!(!r.accepted());
}

#[test]
fn dead_reaction() {
    let r = check("new a : *A [ A ▶ done | B ▶ done ] in a!A");
    assert_eq!(r.codes(), vec![Code::DeadReaction]);
}

#[test]
fn unused_relevant_argument() {
    let r = check("type #R = Reply(#Number)
        new a : *M(#R) [ M(r) ▶ done ] in
        new b : #R + 1 [ Reply(n) ▶ done ] in a!M(b)");
    assert!(r.codes().contains(&Code::ObligationUnmet), "{:#?}", r.diagnostics);
}

#[test]
fn not_live() {
    let r = check("type #R = Reply(#Number)
        new a : M(#R) + M(#R) · M(#R) + 1 [ M(x) & M(y) ▶ x!Reply(1) & y!Reply(2) ] in done");
    assert!(r.codes().contains(&Code::NotLive), "{:#?}", r.diagnostics);
}

#[test]
fn literal_in_object_slot() {
    let r = check("type #R = Reply(#Number)
        new a : *M(#R) [ M(r) ▶ r!Reply(1) ] in a!M(3)");
    assert_eq!(r.codes(), vec![Code::ProtocolViolation]);
}

#[test]
fn report_json_shape() {
    let r = check(&corpus("future_ok"));
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["verdict"], "accepted");
    assert!(v["objects"].as_array().unwrap().iter().any(|o| o["name"] == "future" && o["live"] == true));
    assert!(v.get("boundedSubtypeUses").is_some());
}
