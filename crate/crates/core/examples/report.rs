//! A machine-readable report for a failing check, and a rerun from it.

use epiflow::harness::{run_check, CheckConfig, PolicyFile, Report};
use epiflow::lang::Domain;

fn main() {
    let cfg = CheckConfig::new(Domain::int(4).unwrap());
    let file = PolicyFile::parse(include_str!("data/declass-sign.pol")).unwrap();
    let r = run_check(include_str!("data/h0.wout"), &file, None, &cfg).unwrap();
    println!("{}", r.render_text());
    let json = r.to_json();
    println!("{json}");
    let back = Report::from_json(&json).unwrap();
    let cfg = CheckConfig::new(back.domain.to_domain().unwrap());
    let again = run_check(&back.program, &back.policy, None, &cfg).unwrap();
    println!("rerun: {}", again.outcome);
}
