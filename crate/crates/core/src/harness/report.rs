use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CheckConfig, CheckResult, Condition, PolicyFile};
use crate::lang::{render_trace, Domain, DomainKind, Store};
use crate::model::Model;
use crate::verdict::Outcome;

/// Machine-readable outcome of one `check` run. Field order is the key order
/// of the JSON document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub program: String,
    /// Hex SHA-256 of `program`.
    pub program_digest: String,
    pub domain: DomainReport,
    pub bound: usize,
    pub termination_output: bool,
    pub aak_fix_low: bool,
    pub condition: Condition,
    pub policy: PolicyFile,
    pub outcome: Outcome,
    pub witness: Option<ReportWitness>,
    /// Number of failing executions.
    pub failing: usize,
    pub stats: ReportStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainReport {
    /// `bool` or `int:N`.
    pub spec: String,
    pub signed: bool,
    pub hash_table: Vec<i64>,
}

impl DomainReport {
    fn new(d: &Domain) -> Self {
        let (spec, signed) = match d.kind() {
            DomainKind::Bool => ("bool".to_string(), false),
            DomainKind::Int { size, signed } => (format!("int:{size}"), signed),
        };
        Self {
            spec,
            signed,
            hash_table: d.hash_table().iter().map(|v| v.0).collect(),
        }
    }

    pub fn to_domain(&self) -> Result<Domain, crate::lang::DomainError> {
        Domain::parse_spec(&self.spec, self.signed)?.with_hash_table(&self.hash_table)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportWitness {
    pub execution: usize,
    /// Identifier and value of the failing execution's initial store.
    pub initial: Vec<(String, i64)>,
    pub point: usize,
    /// Rendered trace at the failing point.
    pub trace: String,
    pub bindings: Vec<(String, i64)>,
    pub other_execution: Option<usize>,
    pub other_initial: Option<Vec<(String, i64)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportStats {
    pub executions: usize,
    pub points: usize,
    pub epochs: usize,
    pub formula_size: usize,
    pub points_visited: u64,
    pub cache_hits: u64,
    pub wall_time_ms: u64,
}

fn store_entries(m: &Model, s: &Store) -> Vec<(String, i64)> {
    let sig = &m.program().signature;
    (0..sig.len())
        .map(|i| (sig.name(i).to_string(), s.get(i).0))
        .collect()
}

impl Report {
    pub fn new(
        program: &str,
        policy: &PolicyFile,
        cfg: &CheckConfig,
        result: &CheckResult,
        wall_time_ms: u64,
    ) -> Self {
        let m = &result.model;
        let v = &result.verdict;
        let witness = v.witness.as_ref().map(|w| {
            let e = m.execution(w.execution);
            let point = w.point.min(e.len());
            ReportWitness {
                execution: w.execution,
                initial: store_entries(m, e.initial()),
                point,
                trace: render_trace(&e.trace_upto(point), m.domain()),
                bindings: w.bindings.iter().map(|(n, v)| (n.clone(), v.0)).collect(),
                other_execution: w.other_execution,
                other_initial: w
                    .other_execution
                    .map(|y| store_entries(m, m.execution(y).initial())),
            }
        });
        Report {
            program: program.to_string(),
            program_digest: digest(program),
            domain: DomainReport::new(&cfg.domain),
            bound: cfg.model.bound,
            termination_output: cfg.model.termination_output,
            aak_fix_low: cfg.aak_fix_low,
            condition: result.condition,
            policy: policy.clone(),
            outcome: v.outcome,
            witness,
            failing: v.failing.len(),
            stats: ReportStats {
                executions: m.executions().len(),
                points: m.num_points(),
                epochs: m.num_epochs(),
                formula_size: v.stats.formula_size,
                points_visited: v.stats.points_visited,
                cache_hits: v.stats.cache_hits,
                wall_time_ms,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Human-readable summary.
    pub fn render_text(&self) -> String {
        let dom = self.domain.to_domain().ok();
        let show = |v: i64| match &dom {
            Some(d) => d.fmt_value(crate::lang::Value(v)),
            None => v.to_string(),
        };
        let store = |s: &[(String, i64)]| {
            let parts: Vec<String> = s.iter().map(|(n, v)| format!("{n}={}", show(*v))).collect();
            format!("{{{}}}", parts.join(", "))
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{}: {}",
            self.condition.name().to_uppercase(),
            self.outcome
        );
        let _ = writeln!(
            out,
            "program {} over {}{}",
            &self.program_digest[..12],
            self.domain.spec,
            if self.domain.signed { " (signed)" } else { "" }
        );
        if let Some(w) = &self.witness {
            let _ = writeln!(
                out,
                "witness: execution {} from {} at point {} after {}",
                w.execution,
                store(&w.initial),
                w.point,
                w.trace
            );
            if let (Some(y), Some(s)) = (w.other_execution, &w.other_initial) {
                let _ = writeln!(out, "  distinguished from execution {y} from {}", store(s));
            }
            for (n, v) in &w.bindings {
                let _ = writeln!(out, "  {n} = {}", show(*v));
            }
            let _ = writeln!(out, "failing executions: {}", self.failing);
        }
        let s = &self.stats;
        let _ = writeln!(
            out,
            "executions {} points {} epochs {} formula {} time {} ms",
            s.executions, s.points, s.epochs, s.formula_size, s.wall_time_ms
        );
        out
    }
}

pub(crate) fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::super::run_check;
    use super::*;

    #[test]
    fn json_round_trip() {
        let cfg = CheckConfig::new(Domain::int(4).unwrap());
        let policy = PolicyFile::parse("check: akd\ndeclassify: h >= 0").unwrap();
        let r = run_check("if h = 0 then out 1 else out 2", &policy, None, &cfg).unwrap();
        assert_eq!(r.outcome, Outcome::Fails);
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let w = r.witness.unwrap();
        assert_eq!(w.bindings, vec![("u1.h".into(), 0), ("u2.h".into(), 1)]);
        assert_eq!(back.domain.to_domain().unwrap(), cfg.domain);
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            digest("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
