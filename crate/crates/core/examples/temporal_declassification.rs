//! Temporal declassification on a small payment protocol.

use epiflow::harness::{run_condition, CheckConfig, Condition, PolicyFile};
use epiflow::lang::{parse_program, Domain};

fn main() {
    let p = parse_program(include_str!("data/payment.wout")).unwrap();
    let cfg = CheckConfig::new(Domain::int(4).unwrap());
    let mut policy = PolicyFile::parse(include_str!("data/payment.pol"))
        .unwrap()
        .resolve(&p.signature)
        .unwrap();
    for c in [Condition::Nitd, Condition::Aktd] {
        println!(
            "full policy: {c} {}",
            run_condition(&p, &policy, c, &cfg).unwrap().verdict.outcome
        );
    }
    // dropping the last clause leaves the final output undeclassified
    policy.when.pop();
    for c in [Condition::Nitd, Condition::Aktd] {
        println!(
            "without data: {c} {}",
            run_condition(&p, &policy, c, &cfg).unwrap().verdict.outcome
        );
    }
}
