//! Explicit release statements, with and without the first release.

use epiflow::harness::{run_condition, CheckConfig, Condition, PolicyFile};
use epiflow::lang::parse_program;

fn main() {
    let cfg = CheckConfig::default();
    let file = PolicyFile::parse(include_str!("data/two-release.pol")).unwrap();
    for prog in [
        include_str!("data/two-release.wout"),
        include_str!("data/one-release.wout"),
    ] {
        let p = parse_program(prog).unwrap();
        let policy = file.resolve(&p.signature).unwrap();
        for c in [Condition::Er, Condition::Akr] {
            let v = run_condition(&p, &policy, c, &cfg).unwrap().verdict;
            println!("{}: {c} {}", prog.trim(), v.outcome);
        }
    }
}
