use sepprob_symbolic::*;

fn main() {
    for field in Field::ALL {
        let d = sepprob_symbolic::verify::pt_decomposition(field).unwrap();
        println!(
            "{field}: diff {} terms, f1 {}, f2 {}",
            d.diff.len(),
            d.f1.len(),
            d.f2.len()
        );
    }
    let r = VerificationGrid::full().run(&Field::ALL).unwrap();
    for x in r {
        println!("{}", x.to_json_line());
    }
}
