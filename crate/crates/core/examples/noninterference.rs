//! Observational noninterference against its epistemic counterpart.

use epiflow::harness::{run_condition, CheckConfig, Condition, PolicyFile};
use epiflow::lang::parse_program;

fn main() {
    let p = parse_program(include_str!("data/ex-oni.wout")).unwrap();
    let cfg = CheckConfig::default();
    for (name, pol) in [
        ("y low", include_str!("data/low-y-ak.pol")),
        ("x low", include_str!("data/low-x-ak.pol")),
    ] {
        let policy = PolicyFile::parse(pol)
            .unwrap()
            .resolve(&p.signature)
            .unwrap();
        for c in [Condition::Oni, Condition::Ak] {
            let r = run_condition(&p, &policy, c, &cfg).unwrap();
            println!(
                "{name}: {c} {} failing {:?}",
                r.verdict.outcome, r.verdict.failing
            );
        }
    }
}
