use std::path::PathBuf;
use std::process::{Command, Output};

use epiflow::harness::Report;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "examples", "data", name]
        .iter()
        .collect();
    p.display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epiflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_exit_codes() {
    let prog = data("ex-oni.wout");
    let o = run(&[
        "check",
        "--program",
        &prog,
        "--policy",
        &data("low-y-ak.pol"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&[
        "check",
        "--program",
        &prog,
        "--policy",
        &data("low-x-ak.pol"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&[
        "check",
        "--program",
        &data("diverge.wout"),
        "--policy",
        &data("ak.pol"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("AK: BOUND_EXCEEDED"));
}

#[test]
fn usage_errors_exit_with_three() {
    let o = run(&[
        "check",
        "--program",
        "/nonexistent.wout",
        "--policy",
        &data("ak.pol"),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["--domain", "int:1", "model", "--program", &data("h0.wout")]);
    assert_eq!(o.status.code(), Some(3));
    let prog = data("ex-oni.wout");
    let o = run(&[
        "--low",
        "q",
        "check",
        "--program",
        &prog,
        "--policy",
        &data("ak.pol"),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn failing_report_has_what_is_needed_to_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let path_s = path.display().to_string();
    let args = [
        "--domain",
        "int:4",
        "--report",
        &path_s,
        "check",
        "--program",
        &data("h0.wout"),
        "--policy",
        &data("declass-sign.pol"),
    ];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(1));
    let text = std::fs::read_to_string(&path).unwrap();
    let r = Report::from_json(&text).unwrap();
    let w = r.witness.as_ref().unwrap();
    assert_eq!(
        w.bindings,
        vec![("u1.h".to_string(), 0), ("u2.h".to_string(), 1)]
    );
    assert!(r.program.contains("out 1"));
    assert_eq!(r.policy.declassify, vec!["h >= 0".to_string()]);

    // rerunning from the report alone fails again
    let cfg = epiflow::harness::CheckConfig {
        domain: r.domain.to_domain().unwrap(),
        ..Default::default()
    };
    let again = epiflow::harness::run_check(&r.program, &r.policy, None, &cfg).unwrap();
    assert_eq!(again.outcome, r.outcome);
    assert_eq!(again.witness, r.witness);

    // byte-identical apart from wall time
    let o2 = run(&args);
    assert_eq!(o2.status.code(), Some(1));
    let mut a = r.clone();
    let mut b = Report::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    a.stats.wall_time_ms = 0;
    b.stats.wall_time_ms = 0;
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn model_dump_lists_executions_and_epochs() {
    let o = run(&["model", "--program", &data("ex-oni.wout")]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(s.lines().filter(|l| l.starts_with("exec ")).count(), 4);
    assert!(s.contains("epochs:"));
}

#[test]
fn diff_reports_both_sides() {
    let o = run(&[
        "--domain",
        "int:4",
        "diff",
        "--program",
        &data("h0.wout"),
        "--policy",
        &data("declass-zero.pol"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("nid-akd"), "{s}");
    assert!(s.contains("SEMANTIC HOLDS"));
    assert!(s.contains("EPISTEMIC HOLDS"));
    let o = run(&[
        "diff",
        "--program",
        &data("ex-oni.wout"),
        "--policy",
        &data("ak.pol"),
        "--pair",
        "oni-ak",
        "--pair",
        "nani-aak",
    ]);
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn fuzz_is_reproducible() {
    let args = ["--seed", "5", "fuzz", "--count", "30", "--pair", "er-akr"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(stdout(&a), stdout(&b));
    let o = run(&["--domain", "int:8", "fuzz", "--count", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn knowledge_rows() {
    let o = run(&[
        "knowledge",
        "--program",
        &data("two-release.wout"),
        "--policy",
        &data("two-release.pol"),
        "--from",
        "l=tt,h1=tt,h2=ff",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][1..], ["2", "2", "SECURE"]);
    let o = run(&[
        "knowledge",
        "--program",
        &data("one-release.wout"),
        "--policy",
        &data("two-release.pol"),
        "--from",
        "l=tt,h1=tt,h2=ff",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("INSECURE"));
    let o = run(&[
        "knowledge",
        "--program",
        &data("one-release.wout"),
        "--policy",
        &data("two-release.pol"),
        "--from",
        "l=tt",
    ]);
    assert_eq!(o.status.code(), Some(3));
}
