//! Declassifying a property of the initial secret.

use epiflow::harness::{run_condition, CheckConfig, Condition, PolicyFile};
use epiflow::lang::{parse_program, Domain};

fn main() {
    let p = parse_program(include_str!("data/h0.wout")).unwrap();
    let cfg = CheckConfig::new(Domain::int(4).unwrap());
    for pol in [
        include_str!("data/declass-zero.pol"),
        include_str!("data/declass-sign.pol"),
    ] {
        let file = PolicyFile::parse(pol).unwrap();
        let policy = file.resolve(&p.signature).unwrap();
        for c in [Condition::Nid, Condition::Akd] {
            let v = run_condition(&p, &policy, c, &cfg).unwrap().verdict;
            let w = v.witness.map(|w| w.bindings).unwrap_or_default();
            println!("{:?}: {c} {} {w:?}", file.declassify, v.outcome);
        }
    }
}
