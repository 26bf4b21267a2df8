//! Derivatives, subtyping and the brute-force cross-check.

use joinstate::oracle::oracle_subtype;
use joinstate::semilinear::SubtypeEngine;
use joinstate::syntax::parse_type;
use joinstate::types::{derivative, TypeExpr, TypeTable};

fn ty(table: &TypeTable, src: &str) -> TypeExpr {
    table.close(parse_type(src).unwrap()).unwrap()
}

fn main() {
    let table = TypeTable::resolve([("#Reply", parse_type("Reply(#Number)").unwrap())]).unwrap();
    let future = ty(&table, "(EMPTY · Resolve(#Number) + RESOLVED(#Number)) · *Get(#Reply)");
    for tag in ["EMPTY", "RESOLVED", "Get"] {
        println!("∂{tag} = {}", derivative(&future, tag, &table));
    }

    let pairs = [("A · B + A", "A · (B + 1)"), ("*A", "A · *A"), ("*(A · B)", "*A · *B"), ("A(#Reply)", "A(1)")];
    let mut engine = SubtypeEngine::new(&table, 6);
    for (l, r) in pairs {
        let (l, r) = (ty(&table, l), ty(&table, r));
        let verdict = engine.subtype(&l, &r);
        let oracle = oracle_subtype(&l, &r, 5, &table);
        println!("{l} ≤ {r}: {verdict}  (oracle agrees: {})", oracle.holds() == verdict.holds());
    }
}
