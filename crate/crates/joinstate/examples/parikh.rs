use joinstate::semilinear::parikh;
use joinstate::syntax::parse_type;
use joinstate::types::TypeTable;

fn main() {
    let table = TypeTable::new();
    for src in ["A · *B", "*(A · B) + C", "*(A · A · B)", "(EMPTY · Resolve(#Number) + RESOLVED(#Number)) · *Get(#Number)"] {
        let t = table.close(parse_type(src).unwrap()).unwrap();
        let (alpha, set) = parikh(&t, &table);
        println!("{t}");
        println!("{}", set.display(&alpha));
    }
}
