use joinstate::deps::DependencyRelation;

fn show(d1: &DependencyRelation<&str>, d2: &DependencyRelation<&str>) {
    match d1.join(d2) {
        Ok(d) => println!("{d1} ⊔ {d2} = {d}"),
        Err(e) => println!("{d1} ⊔ {d2} undefined at ({}, {})", e.left, e.right),
    }
}

fn main() {
    let ab = DependencyRelation::pair("a", "b").unwrap();
    let cd = DependencyRelation::pair("c", "d").unwrap();
    let ac = DependencyRelation::pair("a", "c").unwrap();
    let bd = DependencyRelation::pair("b", "d").unwrap();
    show(&ab, &cd);
    show(&ab, &ac);
    show(&ab, &ab);

    let left = ab.join(&cd).unwrap();
    let right = ac.join(&bd).unwrap();
    show(&left, &right);
    println!("merged anyway: {}", left.merge(&right));
    println!("restricted to a: {}", left.merge(&right).restrict(&"a"));

    if let Err(e) = DependencyRelation::pair("x", "x") {
        println!("{e}");
    }
}
