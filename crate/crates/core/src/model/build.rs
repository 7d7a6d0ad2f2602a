use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rayon::prelude::*;

use super::epoch::{TraceId, TraceTrie};
use super::{next_model_id, Epoch, Execution, Model, ModelConfig, ModelError, State, Status};
use crate::lang::{check_domain, step, Domain, Event, Program, Step, Stmt, Store, Value};

/// Position token reported for the state after the termination marker.
const DONE_POSITION: u64 = u64::MAX;

fn position(p: &Stmt) -> u64 {
    let mut h = DefaultHasher::new();
    p.hash(&mut h);
    h.finish()
}

/// Enumerates every execution of `program`, one per initial store.
pub fn build_model(
    program: &Program,
    domain: &Domain,
    config: &ModelConfig,
) -> Result<Model, ModelError> {
    if config.bound == 0 {
        return Err(ModelError::ZeroBound);
    }
    check_domain(program, domain)?;
    let sig = &program.signature;
    let vars = sig.vars();
    let count = (domain.size() as u128).checked_pow(vars.len() as u32);
    let count = match count {
        Some(c) if c <= super::MAX_EXECUTIONS as u128 => c as usize,
        Some(c) => return Err(ModelError::TooLarge(c)),
        None => return Err(ModelError::TooLarge(u128::MAX)),
    };
    let values: Vec<Value> = domain.values().collect();
    let n = values.len();

    let executions: Vec<Execution> = (0..count)
        .into_par_iter()
        .map(|idx| {
            let mut store = vec![Value::FALSE; sig.len()];
            let mut rest = idx;
            for &slot in vars.iter().rev() {
                store[slot] = values[rest % n];
                rest /= n;
            }
            run(&program.body, Store(store), domain, config)
        })
        .collect();

    let mut offsets = Vec::with_capacity(executions.len());
    let total: usize = executions.iter().map(|e| e.len() + 1).sum();
    let mut point_trace = Vec::with_capacity(total);
    let mut traces = TraceTrie::new();
    let mut epochs: Vec<Epoch> = Vec::new();
    for (x, e) in executions.iter().enumerate() {
        offsets.push(point_trace.len());
        let mut t = TraceId::EMPTY;
        for i in 0..=e.len() {
            if i > 0 {
                if let Some(ev) = e.event(i - 1) {
                    t = traces.extend(t, ev);
                }
            }
            if epochs.len() < traces.len() {
                epochs.resize_with(traces.len(), Epoch::default);
            }
            let ep = &mut epochs[t.index()];
            ep.points.push(point_trace.len());
            if ep.executions.last() != Some(&(x as u32)) {
                ep.executions.push(x as u32);
            }
            point_trace.push(t);
        }
    }

    Ok(Model {
        id: next_model_id(),
        program: program.clone(),
        domain: domain.clone(),
        config: *config,
        vars,
        executions,
        offsets,
        point_trace,
        traces,
        epochs,
    })
}

fn run(body: &Arc<Stmt>, initial: Store, domain: &Domain, config: &ModelConfig) -> Execution {
    // Without loops every step shrinks the residual program, so no
    // configuration can repeat.
    let detect = body.has_loop();
    let mut seen: HashMap<(Arc<Stmt>, Store), usize> = HashMap::new();
    if detect {
        seen.insert((body.clone(), initial.clone()), 0);
    }
    let mut states = vec![State {
        position: position(body),
        store: initial,
    }];
    let mut events: Vec<Option<Event>> = Vec::new();
    let mut current = body.clone();
    let status = loop {
        let store = &states[states.len() - 1].store;
        match step(&current, store, domain) {
            Step::Terminal => {
                if config.termination_output {
                    let store = store.clone();
                    events.push(Some(Event::Done));
                    states.push(State {
                        position: DONE_POSITION,
                        store,
                    });
                }
                break Status::Terminated;
            }
            Step::Next {
                program,
                store,
                event,
            } => {
                if events.len() == config.bound {
                    break Status::BoundExceeded;
                }
                events.push(event);
                states.push(State {
                    position: position(&program),
                    store: store.clone(),
                });
                if detect {
                    let key = (program.clone(), store);
                    if let Some(&k) = seen.get(&key) {
                        break Status::Lasso { loop_entry: k };
                    }
                    seen.insert(key, states.len() - 1);
                }
                current = program;
            }
        }
    };
    Execution {
        states,
        events,
        status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn model(src: &str, dom: Domain) -> Model {
        build_model(&parse_program(src).unwrap(), &dom, &ModelConfig::default()).unwrap()
    }

    fn out(v: i64) -> Event {
        Event::Out(Value(v))
    }

    #[test]
    fn assign_then_output_model() {
        let m = model("x:=y; out y", Domain::bool());
        assert_eq!(m.executions().len(), 4);
        for (i, e) in m.executions().iter().enumerate() {
            assert_eq!(e.len(), 2);
            assert_eq!(e.status(), Status::Terminated);
            let y = e.initial().get(1);
            assert_eq!(m.trace_of(m.point(i, 0)), vec![]);
            assert_eq!(m.trace_of(m.point(i, 1)), vec![]);
            assert_eq!(m.trace_of(m.point(i, 2)), vec![Event::Out(y)]);
        }
        // lexicographic order: (ff,ff), (ff,tt), (tt,ff), (tt,tt)
        assert_eq!(
            m.execution(2).initial(),
            &Store(vec![Value::TRUE, Value::FALSE])
        );
        assert_eq!(m.epoch_of(&[]).len(), 8);
        let tt: Vec<_> = m.epoch_of(&[out(1)]);
        assert_eq!(tt, vec![m.point(1, 2), m.point(3, 2)]);
        assert!(m.epoch_of(&[out(1), out(1)]).is_empty());
    }

    #[test]
    fn skip_model() {
        let m = model("skip", Domain::bool());
        assert_eq!(m.executions().len(), 1);
        assert_eq!(m.execution(0).len(), 0);
        assert_eq!(m.num_epochs(), 1);
        assert_eq!(m.epoch_of(&[]), vec![m.point(0, 0)]);
    }

    #[test]
    fn loop_output_counts() {
        let dom = Domain::int(4).unwrap();
        let m = model("while (x<h) do {out x; x:=x+1}", dom);
        assert_eq!(m.executions().len(), 16);
        for e in m.executions() {
            let (x, h) = (e.initial().get(0).0, e.initial().get(1).0);
            let expected: Vec<_> = (x..h.max(x)).map(out).collect();
            assert_eq!(e.trace(), expected);
            assert_eq!(e.status(), Status::Terminated);
        }
    }

    #[test]
    fn divergence_is_a_lasso() {
        let m = model("while tt do skip", Domain::bool());
        assert!(matches!(m.execution(0).status(), Status::Lasso { .. }));
        assert!(m.is_tainted());
        let cfg = ModelConfig {
            bound: 3,
            termination_output: false,
        };
        let p = parse_program("x := 0; x := 1; x := 0; x := 1").unwrap();
        let m = build_model(&p, &Domain::bool(), &cfg).unwrap();
        assert_eq!(m.execution(0).status(), Status::BoundExceeded);
        assert_eq!(m.execution(0).len(), 3);
    }

    #[test]
    fn termination_marker() {
        let p = parse_program("out x").unwrap();
        let cfg = ModelConfig {
            termination_output: true,
            ..ModelConfig::default()
        };
        let m = build_model(&p, &Domain::bool(), &cfg).unwrap();
        assert_eq!(m.execution(0).trace(), vec![out(0), Event::Done]);
    }

    #[test]
    fn accessibility_rejects_foreign_points() {
        let a = model("out x", Domain::bool());
        let b = model("out x", Domain::bool());
        assert_eq!(a.accessible(a.point(0, 1), a.point(0, 1)), Ok(true));
        assert_eq!(a.accessible(a.point(0, 1), a.point(1, 1)), Ok(false));
        assert_eq!(
            a.accessible(a.point(0, 0), b.point(0, 0)),
            Err(ModelError::ForeignPoint)
        );
    }

    #[test]
    fn zero_bound_rejected() {
        let p = parse_program("skip").unwrap();
        let cfg = ModelConfig {
            bound: 0,
            termination_output: false,
        };
        assert_eq!(
            build_model(&p, &Domain::bool(), &cfg).unwrap_err(),
            ModelError::ZeroBound
        );
    }

    #[test]
    fn point_ids_round_trip() {
        let m = model("x:=y; out y", Domain::bool());
        for pt in m.points() {
            assert_eq!(m.point_from_id(m.point_id(pt)), pt);
        }
    }
}
