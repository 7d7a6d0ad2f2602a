//! Check a hand-written temporal-epistemic formula on a model.

use epiflow::lang::{parse_program, Domain};
use epiflow::logic::{model_satisfies, parse_formula};
use epiflow::model::{build_model, ModelConfig};

fn main() {
    let p = parse_program(include_str!("data/ex-oni.wout")).unwrap();
    let m = build_model(&p, &Domain::bool(), &ModelConfig::default()).unwrap();
    for src in ["G (init(y, tt) -> F K y == tt)", "G K init(x, tt)"] {
        let f = parse_formula(src, &p.signature).unwrap();
        let v = model_satisfies(&m, &f).unwrap();
        println!("{src}: {}", v.outcome);
        if let Some(w) = v.witness {
            println!(
                "  execution {} point {} bindings {:?}",
                w.execution, w.point, w.bindings
            );
        }
    }
}
