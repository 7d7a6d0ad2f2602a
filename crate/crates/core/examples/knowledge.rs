//! Attacker knowledge against released knowledge along one execution.

use epiflow::harness::{dump_knowledge, render_knowledge, PolicyFile};
use epiflow::lang::{parse_program, Domain, Value};
use epiflow::model::{build_model, ModelConfig};

fn main() {
    let file = PolicyFile::parse(include_str!("data/two-release.pol")).unwrap();
    for prog in [
        include_str!("data/two-release.wout"),
        include_str!("data/one-release.wout"),
    ] {
        let p = parse_program(prog).unwrap();
        let policy = file.resolve(&p.signature).unwrap();
        let m = build_model(&p, &Domain::bool(), &ModelConfig::default()).unwrap();
        let mut s0 = m.execution(0).initial().clone();
        for (name, v) in [
            ("l", Value::TRUE),
            ("h1", Value::TRUE),
            ("h2", Value::FALSE),
        ] {
            s0.set(p.signature.slot(name).unwrap(), v);
        }
        println!("{}", prog.trim());
        print!(
            "{}",
            render_knowledge(&m, &dump_knowledge(&m, &policy.fs, &policy.releases, &s0))
        );
    }
}
