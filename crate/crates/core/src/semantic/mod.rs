//! The trace-based security definitions, checked directly on a model
//! without going through the logic.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::lang::{eval, Domain, Event, Store, Value};
use crate::model::{Model, TraceId};
use crate::policy::{Abstractor, FlowSpec, InitPredicate, ReleaseSpec, TemporalDeclassification};
use crate::verdict::{Stats, Verdict, Witness};

/// A set of initial stores.
pub type KnowledgeSet = BTreeSet<Store>;

fn low_key(fs: &FlowSpec, s: &Store) -> Vec<Value> {
    fs.low().iter().map(|&x| s.get(x)).collect()
}

fn final_trace(m: &Model, x: usize) -> TraceId {
    m.trace_id(m.point(x, m.execution(x).len()))
}

/// First index of `x` whose trace is not a prefix of `y`'s full trace.
fn divergence(m: &Model, x: usize, y: usize) -> usize {
    let theirs = m.execution(y).trace();
    let e = m.execution(x);
    let mut seen = 0;
    for i in 0..e.len() {
        if let Some(ev) = e.event(i) {
            if theirs.get(seen) != Some(ev) {
                return i + 1;
            }
            seen += 1;
        }
    }
    e.len()
}

/// Executions grouped by `key`; inside a group all observations must agree.
fn relational<K, O>(
    m: &Model,
    key: impl Fn(&Store) -> K + Sync,
    obs: impl Fn(usize) -> O + Sync,
    point: impl Fn(usize, usize) -> usize,
) -> Verdict
where
    K: std::hash::Hash + Eq + Send,
    O: PartialEq + Send + Sync,
{
    if m.is_tainted() {
        return Verdict::bound_exceeded();
    }
    let n = m.executions().len();
    let keys: Vec<K> = (0..n)
        .into_par_iter()
        .map(|x| key(m.execution(x).initial()))
        .collect();
    let observed: Vec<O> = (0..n).into_par_iter().map(&obs).collect();
    let mut groups: HashMap<K, Vec<usize>> = HashMap::new();
    for (x, k) in keys.into_iter().enumerate() {
        groups.entry(k).or_default().push(x);
    }
    let mut partner: Vec<Option<usize>> = vec![None; n];
    for members in groups.values() {
        for &x in members {
            partner[x] = members
                .iter()
                .copied()
                .find(|&y| observed[y] != observed[x]);
        }
    }
    let failing: Vec<usize> = (0..n).filter(|&x| partner[x].is_some()).collect();
    let mut v = match failing.first() {
        None => Verdict::holds(),
        Some(&x) => {
            let y = partner[x].unwrap();
            let mut w = Witness::at(x, point(x, y));
            w.other_execution = Some(y);
            Verdict::fails(w, failing)
        }
    };
    v.stats = stats(m);
    v
}

fn stats(m: &Model) -> Stats {
    Stats {
        points_visited: m.num_points() as u64,
        cache_hits: 0,
        formula_size: 0,
    }
}

/// Output-only noninterference: low-equal initial stores give equal traces.
pub fn check_oni(m: &Model, fs: &FlowSpec) -> Verdict {
    relational(
        m,
        |s| low_key(fs, s),
        |x| final_trace(m, x),
        |x, y| divergence(m, x, y),
    )
}

/// Noninterference modulo declassification: as ONI, restricted to pairs of
/// initial stores on which every predicate agrees.
pub fn check_nid(m: &Model, fs: &FlowSpec, preds: &[InitPredicate]) -> Verdict {
    let dom = m.domain();
    relational(
        m,
        |s| {
            let mut k = low_key(fs, s);
            k.extend(preds.iter().map(|p| p.eval(s, dom)));
            k
        },
        |x| final_trace(m, x),
        |x, y| divergence(m, x, y),
    )
}

/// Narrow abstract noninterference over final low stores: `η`-equal lows and
/// `φ`-equal highs yield `ρ`-equal low results.
pub fn check_nani(
    m: &Model,
    fs: &FlowSpec,
    eta: &Abstractor,
    phi: &Abstractor,
    rho: &Abstractor,
) -> Verdict {
    let dom = m.domain();
    let eta_p = eta.predicates(fs.low());
    let phi_p = phi.predicates(fs.high());
    let outs = rho.outputs(fs.low());
    relational(
        m,
        |s| {
            eta_p
                .iter()
                .chain(&phi_p)
                .map(|p| p.eval(s, dom))
                .collect::<Vec<_>>()
        },
        |x| {
            let fin = m.execution(x).final_store();
            outs.iter().map(|e| eval(fin, e, dom)).collect::<Vec<_>>()
        },
        |x, _| m.execution(x).len(),
    )
}

fn executions_observing(m: &Model, t: TraceId) -> &[u32] {
    &m.epoch(t).executions
}

fn contains(list: &[u32], x: usize) -> bool {
    list.binary_search(&(x as u32)).is_ok()
}

fn low_class(m: &Model, fs: &FlowSpec, s0: &Store) -> Vec<usize> {
    (0..m.executions().len())
        .filter(|&y| m.execution(y).initial().agrees_on(s0, fs.low()))
        .collect()
}

/// Attacker knowledge: the low-equal initial stores that can produce `τ`.
pub fn knowledge_set(m: &Model, fs: &FlowSpec, s0: &Store, trace: &[Event]) -> KnowledgeSet {
    let Some(t) = m.lookup_trace(trace) else {
        return KnowledgeSet::new();
    };
    let obs = executions_observing(m, t);
    low_class(m, fs, s0)
        .into_iter()
        .filter(|&y| contains(obs, y))
        .map(|y| m.execution(y).initial().clone())
        .collect()
}

/// Indices of releases raised at every point of `x0` with trace `t`; empty
/// when `x0` never shows `t`.
fn released(m: &Model, rs: &ReleaseSpec, x0: usize, t: TraceId) -> Vec<usize> {
    let e = m.execution(x0);
    let mut common: Option<Vec<usize>> = None;
    for i in 0..=e.len() {
        if m.trace_id(m.point(x0, i)) != t {
            continue;
        }
        let here: Vec<usize> = (0..rs.len())
            .filter(|&j| {
                rs.releases[j]
                    .slot
                    .is_some_and(|s| e.store(i).get(s) == Value::TRUE)
            })
            .collect();
        common = Some(match common {
            None => here,
            Some(c) => c.into_iter().filter(|j| here.contains(j)).collect(),
        });
    }
    common.unwrap_or_default()
}

fn release_class(
    m: &Model,
    rs: &ReleaseSpec,
    class: &[usize],
    s0: &Store,
    d: &[usize],
    dom: &Domain,
) -> Vec<usize> {
    let want: Vec<Value> = d
        .iter()
        .map(|&j| eval(s0, &rs.releases[j].expr, dom))
        .collect();
    class
        .iter()
        .copied()
        .filter(|&y| {
            let s = m.execution(y).initial();
            d.iter()
                .zip(&want)
                .all(|(&j, w)| eval(s, &rs.releases[j].expr, dom) == *w)
        })
        .collect()
}

/// Minimum uncertainty the release policy demands after `τ` from `σ0`:
/// low-equal stores agreeing with `σ0` on every expression whose flag was
/// raised at all points of `σ0`'s execution showing `τ`.
pub fn release_set(
    m: &Model,
    fs: &FlowSpec,
    rs: &ReleaseSpec,
    s0: &Store,
    trace: &[Event],
) -> KnowledgeSet {
    let class = low_class(m, fs, s0);
    let d = match (m.execution_of_store(s0), m.lookup_trace(trace)) {
        (Some(x0), Some(t)) => released(m, rs, x0, t),
        _ => Vec::new(),
    };
    release_class(m, rs, &class, s0, &d, m.domain())
        .into_iter()
        .map(|y| m.execution(y).initial().clone())
        .collect()
}

/// Epistemic release: for every initial store and every trace its execution
/// shows, the release set is contained in the knowledge set.
pub fn check_er(m: &Model, fs: &FlowSpec, rs: &ReleaseSpec) -> Verdict {
    if m.is_tainted() {
        return Verdict::bound_exceeded();
    }
    let classes = classes(m, fs);
    let dom = m.domain();
    let n = m.executions().len();
    let results: Vec<Option<(usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|x0| {
            let class = &classes[&low_key(fs, m.execution(x0).initial())];
            let s0 = m.execution(x0).initial();
            let e = m.execution(x0);
            let mut last = None;
            for i in 0..=e.len() {
                let t = m.trace_id(m.point(x0, i));
                if last == Some(t) {
                    continue;
                }
                last = Some(t);
                let obs = executions_observing(m, t);
                let d = released(m, rs, x0, t);
                let r = release_class(m, rs, class, s0, &d, dom);
                if let Some(&y) = r.iter().find(|&&y| !contains(obs, y)) {
                    return Some((i, y));
                }
            }
            None
        })
        .collect();
    finish(m, results)
}

fn classes(m: &Model, fs: &FlowSpec) -> HashMap<Vec<Value>, Vec<usize>> {
    let mut out: HashMap<Vec<Value>, Vec<usize>> = HashMap::new();
    for (y, e) in m.executions().iter().enumerate() {
        out.entry(low_key(fs, e.initial())).or_default().push(y);
    }
    out
}

fn finish(m: &Model, results: Vec<Option<(usize, usize)>>) -> Verdict {
    let failing: Vec<usize> = (0..results.len())
        .filter(|&x| results[x].is_some())
        .collect();
    let mut v = match failing.first() {
        None => Verdict::holds(),
        Some(&x) => {
            let (i, y) = results[x].unwrap();
            let mut w = Witness::at(x, i);
            w.other_execution = Some(y);
            Verdict::fails(w, failing)
        }
    };
    v.stats = stats(m);
    v
}

/// Noninterference modulo temporal declassification: at any point, every
/// low-equal execution agreeing on the properties whose conditions have
/// held so far can show the same trace.
pub fn check_nitd(m: &Model, fs: &FlowSpec, phis: &[TemporalDeclassification]) -> Verdict {
    if m.is_tainted() {
        return Verdict::bound_exceeded();
    }
    let classes = classes(m, fs);
    let dom = m.domain();
    let n = m.executions().len();
    let props: Vec<Vec<Value>> = (0..n)
        .into_par_iter()
        .map(|y| {
            let s = m.execution(y).initial();
            phis.iter().map(|p| p.property.eval(s, dom)).collect()
        })
        .collect();
    let results: Vec<Option<(usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let e = m.execution(x);
            let class = &classes[&low_key(fs, e.initial())];
            let mut triggered = vec![false; phis.len()];
            for i in 0..=e.len() {
                for (k, p) in phis.iter().enumerate() {
                    triggered[k] |= p.triggered(e.store(i), dom);
                }
                let obs = executions_observing(m, m.trace_id(m.point(x, i)));
                let bad = class.iter().copied().find(|&y| {
                    (0..phis.len()).all(|k| !triggered[k] || props[y][k] == props[x][k])
                        && !contains(obs, y)
                });
                if let Some(y) = bad {
                    return Some((i, y));
                }
            }
            None
        })
        .collect();
    finish(m, results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_expr_in, parse_program, Domain};
    use crate::model::{build_model, ModelConfig};
    use crate::verdict::Outcome;

    fn model(src: &str, dom: &Domain) -> Model {
        build_model(&parse_program(src).unwrap(), dom, &ModelConfig::default()).unwrap()
    }

    #[test]
    fn oni_examples() {
        let b = Domain::bool();
        let m = model("x:=y; out y", &b);
        let sig = &m.program().signature;
        assert!(check_oni(&m, &FlowSpec::new(sig, &["y"]).unwrap()).is_holds());
        let v = check_oni(&m, &FlowSpec::new(sig, &["x"]).unwrap());
        assert!(v.is_fails());
        let w = v.witness.unwrap();
        assert_eq!((w.execution, w.other_execution, w.point), (0, Some(1), 2));
        let m = model("skip", &b);
        assert!(check_oni(
            &m,
            &FlowSpec::new::<&str>(&m.program().signature, &[]).unwrap()
        )
        .is_holds());
    }

    #[test]
    fn nid_examples() {
        let d = Domain::int(4).unwrap();
        let m = model("if h=0 then out 1 else out 2", &d);
        let sig = &m.program().signature;
        let fs = FlowSpec::new::<&str>(sig, &[]).unwrap();
        let p = |s: &str| InitPredicate::Expr(parse_expr_in(s, sig).unwrap());
        assert!(check_nid(&m, &fs, &[p("h == 0")]).is_holds());
        let v = check_nid(&m, &fs, &[p("h >= 0")]);
        let w = v.witness.unwrap();
        assert_eq!((w.execution, w.other_execution), (0, Some(1)));
        assert_eq!(
            check_nid(&m, &fs, &[p("1")]).outcome,
            check_oni(&m, &fs).outcome
        );
    }

    #[test]
    fn nani_identity_holds() {
        let d = Domain::int(4).unwrap();
        let m = model("l := l * h + 1; if h > l then { l := 0 } else { skip }", &d);
        let fs = FlowSpec::new(&m.program().signature, &["l"]).unwrap();
        let id = Abstractor::id();
        assert!(check_nani(&m, &fs, &id, &id, &id).is_holds());
    }

    #[test]
    fn knowledge_of_unrealisable_trace_is_empty() {
        let b = Domain::bool();
        let m = model("out h", &b);
        let fs = FlowSpec::new::<&str>(&m.program().signature, &[]).unwrap();
        let s0 = m.execution(0).initial().clone();
        let k = knowledge_set(&m, &fs, &s0, &[Event::Out(Value(1)), Event::Out(Value(1))]);
        assert!(k.is_empty());
        assert_eq!(knowledge_set(&m, &fs, &s0, &[]).len(), 2);
    }

    #[test]
    fn tainted_models_refuse() {
        let m = model("while h do skip", &Domain::bool());
        let fs = FlowSpec::new::<&str>(&m.program().signature, &[]).unwrap();
        assert_eq!(check_oni(&m, &fs).outcome, Outcome::BoundExceeded);
        assert_eq!(
            check_er(&m, &fs, &ReleaseSpec::default()).outcome,
            Outcome::BoundExceeded
        );
        assert_eq!(check_nitd(&m, &fs, &[]).outcome, Outcome::BoundExceeded);
    }
}
