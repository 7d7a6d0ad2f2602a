//! Abstract noninterference with sign and parity observers.

use epiflow::harness::{run_condition, CheckConfig, Condition, PolicyFile};
use epiflow::lang::{parse_program, Domain};

fn main() {
    let cfg = CheckConfig::new(Domain::int_signed(8).unwrap());
    for (prog, pol) in [
        (
            include_str!("data/sign-parity.wout"),
            include_str!("data/sign-parity.pol"),
        ),
        (
            include_str!("data/deceptive.wout"),
            include_str!("data/deceptive.pol"),
        ),
    ] {
        let p = parse_program(prog).unwrap();
        let policy = PolicyFile::parse(pol)
            .unwrap()
            .resolve(&p.signature)
            .unwrap();
        for c in [Condition::Nani, Condition::Aak] {
            let v = run_condition(&p, &policy, c, &cfg).unwrap().verdict;
            println!("{}: {c} {}", prog.trim(), v.outcome);
        }
    }
}
