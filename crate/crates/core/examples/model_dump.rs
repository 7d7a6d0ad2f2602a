//! Build the finite interpreted-system model of a program and print it.

use epiflow::lang::{parse_program, Domain};
use epiflow::model::{build_model, ModelConfig};

fn main() {
    let p = parse_program(include_str!("data/ex-oni.wout")).unwrap();
    let m = build_model(&p, &Domain::bool(), &ModelConfig::default()).unwrap();
    print!("{}", m.dump());
    for (trace, n) in m.epoch_table() {
        println!("{trace:?}: {n} points");
    }
}
