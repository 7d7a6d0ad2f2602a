use std::fmt::Write as _;

use crate::lang::{render_trace, Event, Store};
use crate::model::Model;
use crate::policy::{FlowSpec, ReleaseSpec};
use crate::semantic::{knowledge_set, release_set};

/// Attacker knowledge after one prefix of an execution's trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeRow {
    pub trace: Vec<Event>,
    pub knowledge: usize,
    pub release: usize,
    /// The release set is contained in the knowledge set.
    pub secure: bool,
}

/// One row for the empty trace and one after each event of the execution
/// starting in `s0`. Empty when `s0` is not an initial store of `m`.
pub fn dump_knowledge(m: &Model, fs: &FlowSpec, rs: &ReleaseSpec, s0: &Store) -> Vec<KnowledgeRow> {
    let Some(x) = m.execution_of_store(s0) else {
        return Vec::new();
    };
    let full = m.execution(x).trace();
    (0..=full.len())
        .map(|n| {
            let tau = &full[..n];
            let k = knowledge_set(m, fs, s0, tau);
            let r = release_set(m, fs, rs, s0, tau);
            KnowledgeRow {
                trace: tau.to_vec(),
                knowledge: k.len(),
                release: r.len(),
                secure: r.is_subset(&k),
            }
        })
        .collect()
}

pub fn render_knowledge(m: &Model, rows: &[KnowledgeRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<24} {:>6} {:>6}  status", "trace", "|K|", "|R|");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>6}  {}",
            render_trace(&r.trace, m.domain()),
            r.knowledge,
            r.release,
            if r.secure { "SECURE" } else { "INSECURE" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_expr_in, parse_program, Domain, Value};
    use crate::model::{build_model, ModelConfig};

    fn rows(src: &str, releases: &[(&str, &str)]) -> Vec<(usize, usize, bool)> {
        let p = parse_program(src).unwrap();
        let m = build_model(&p, &Domain::bool(), &ModelConfig::default()).unwrap();
        let sig = &p.signature;
        let fs = FlowSpec::new(sig, &["l"]).unwrap();
        let entries = releases
            .iter()
            .map(|(r, e)| (r.to_string(), parse_expr_in(e, sig).unwrap()))
            .collect();
        let rs = ReleaseSpec::new(sig, entries).unwrap();
        let mut s0 = m.execution(0).initial().clone();
        for (name, v) in [("l", 1), ("h1", 1), ("h2", 0)] {
            s0.set(sig.slot(name).unwrap(), Value(v));
        }
        dump_knowledge(&m, &fs, &rs, &s0)
            .into_iter()
            .map(|r| (r.knowledge, r.release, r.secure))
            .collect()
    }

    #[test]
    fn two_release_rows() {
        let src = "l := h1; release r1; out l; l := h2; release r2; out l";
        let got = rows(src, &[("r1", "h1"), ("r2", "h2")]);
        assert_eq!(got, vec![(4, 4, true), (2, 2, true), (1, 1, true)]);
        let got = rows(
            "l := h1; out l; l := h2; release r2; out l",
            &[("r1", "h1"), ("r2", "h2")],
        );
        assert_eq!(got[1], (2, 4, false));
    }

    #[test]
    fn no_outputs_single_row() {
        let got = rows("l := h1 && h2", &[]);
        assert_eq!(got, vec![(4, 4, true)]);
    }
}
