//! Parse a program and step it from one initial store, printing each event.

use std::sync::Arc;

use epiflow::lang::{parse_program, step, Domain, Step, Stmt, Store, Value};

fn main() {
    let p = parse_program("l := 0; while l < h do { out l; l := l + 1 }; out \"done\"").unwrap();
    let dom = Domain::int(4).unwrap();
    let mut store = Store(vec![Value(0); p.signature.len()]);
    store.set(p.signature.slot("h").unwrap(), Value(3));
    let mut prog: Arc<Stmt> = p.body.clone();
    let mut n = 0;
    while let Step::Next {
        program,
        store: next,
        event,
    } = step(&prog, &store, &dom)
    {
        n += 1;
        if let Some(e) = event {
            println!("step {n}: {e:?}");
        }
        prog = program;
        store = next;
    }
    println!("terminated after {n} steps");
}
