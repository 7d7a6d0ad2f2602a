use std::sync::Arc;

use epiflow::harness::{generate_program, FuzzConfig, FuzzDomain, Pair};
use epiflow::lang::{parse_program, Expr, Value};
use epiflow::logic::{Checker, EvalOptions, Formula};
use epiflow::model::{build_model, Model, ModelConfig, Point};
use epiflow::policy::{
    encode_ak, encode_akd, encode_akr, esp, espm, FlowSpec, InitPredicate, ReleaseSpec,
};
use epiflow::semantic::knowledge_set;
use proptest::prelude::*;

/// A random model built from the fuzzing generator.
fn model(seed: u64, index: usize, mod4: bool, loops: bool) -> Model {
    let cfg = FuzzConfig {
        seed,
        idents: if mod4 { 2 } else { 3 },
        domain: if mod4 {
            FuzzDomain::Mod4
        } else {
            FuzzDomain::Bool
        },
        loops,
        ..FuzzConfig::default()
    };
    let (src, _) = generate_program(&cfg, index, Pair::ErAkr);
    let p = parse_program(&src).unwrap();
    let mc = ModelConfig {
        bound: 200,
        termination_output: false,
    };
    build_model(&p, &cfg.domain.domain(), &mc).unwrap()
}

fn models() -> impl Strategy<Value = Model> {
    (any::<u64>(), 0usize..1000, any::<bool>(), any::<bool>())
        .prop_map(|(s, i, m4, l)| model(s, i, m4, l))
}

/// Shape of a random formula; slots and values are reduced modulo the model.
#[derive(Debug, Clone)]
enum Shape {
    Init(u8, u8),
    EqConst(u8, u8),
    EqVar(u8, u8),
    Not(Box<Shape>),
    And(Box<Shape>, Box<Shape>),
    K(Box<Shape>),
    Until(Box<Shape>, Box<Shape>),
}

fn shapes() -> impl Strategy<Value = Shape> {
    let leaf = prop_oneof![
        (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Shape::Init(a, b)),
        (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Shape::EqConst(a, b)),
        (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Shape::EqVar(a, b)),
    ];
    leaf.prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Shape::Not(Box::new(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::And(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Shape::K(Box::new(a))),
            (inner.clone(), inner).prop_map(|(a, b)| Shape::Until(Box::new(a), Box::new(b))),
        ]
    })
}

fn build(m: &Model, s: &Shape) -> Arc<Formula> {
    let vars = m.program().signature.vars();
    let n = m.domain().size();
    let slot = |a: &u8| vars[*a as usize % vars.len()];
    let val = |b: &u8| m.domain().values().nth(*b as usize % n).unwrap();
    match s {
        Shape::Init(a, b) => Formula::init(slot(a), val(b)),
        Shape::EqConst(a, b) => Formula::eq(Expr::Var(slot(a)), Expr::Const(val(b))),
        Shape::EqVar(a, b) => Formula::eq(Expr::Var(slot(a)), Expr::Var(slot(b))),
        Shape::Not(a) => Formula::not(build(m, a)),
        Shape::And(a, b) => Formula::and([build(m, a), build(m, b)]),
        Shape::K(a) => Formula::k(build(m, a)),
        Shape::Until(a, b) => Formula::until(build(m, a), build(m, b)),
    }
}

fn holds<'a>(m: &'a Model, f: &Arc<Formula>) -> impl Fn(Point) -> bool + 'a {
    let c = Checker::new(m, f, EvalOptions::default()).unwrap();
    move |p| c.holds_at(p)
}

fn all_points(m: &Model) -> Vec<Point> {
    m.points().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accessibility_is_an_equivalence(m in models()) {
        let pts = all_points(&m);
        let class = |p: Point| -> Vec<bool> {
            pts.iter().map(|&q| m.accessible(p, q).unwrap()).collect()
        };
        let rows: Vec<Vec<bool>> = pts.iter().map(|&p| class(p)).collect();
        for (i, row) in rows.iter().enumerate() {
            prop_assert!(row[i]);
            for (j, &acc) in row.iter().enumerate() {
                prop_assert_eq!(acc, rows[j][i]);
                // transitivity: related points have identical classes
                if acc {
                    prop_assert_eq!(row, &rows[j]);
                }
            }
        }
    }

    #[test]
    fn epochs_partition_the_points(m in models()) {
        let mut seen = vec![0usize; m.num_points()];
        let mut total = 0;
        for (trace, n) in m.epoch_table() {
            let pts = m.epoch_of(&trace);
            prop_assert_eq!(pts.len(), n);
            for p in pts {
                prop_assert_eq!(m.trace_of(p), trace.clone());
                let id = m.points().position(|q| q == p).unwrap();
                seen[id] += 1;
            }
            total += n;
        }
        prop_assert_eq!(total, m.num_points());
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn execution_count_and_trace_prefixes(m in models()) {
        let ids = m.program().signature.vars().len() as u32;
        prop_assert_eq!(m.executions().len(), m.domain().size().pow(ids));
        for e in m.executions() {
            for i in 0..e.len() {
                let (a, b) = (e.trace_upto(i), e.trace_upto(i + 1));
                prop_assert!(b.starts_with(&a));
            }
        }
    }

    #[test]
    fn knowledge_is_the_dual_of_possibility(m in models(), s in shapes()) {
        let phi = build(&m, &s);
        let k = holds(&m, &Formula::k(phi.clone()));
        let l_not = holds(&m, &Formula::l(Formula::not(phi.clone())));
        let inner = holds(&m, &phi);
        for p in m.points() {
            prop_assert_eq!(k(p), !l_not(p));
            let direct = m.points().filter(|&q| m.accessible(p, q).unwrap()).all(&inner);
            prop_assert_eq!(k(p), direct);
        }
    }

    #[test]
    fn knowledge_is_constant_on_epochs(m in models(), s in shapes()) {
        let k = holds(&m, &Formula::k(build(&m, &s)));
        for (trace, _) in m.epoch_table() {
            let pts = m.epoch_of(&trace);
            let first = k(pts[0]);
            prop_assert!(pts.iter().all(|&p| k(p) == first));
        }
    }

    #[test]
    fn until_identities(m in models(), s in shapes()) {
        let phi = build(&m, &s);
        let f = holds(&m, &Formula::f(phi.clone()));
        let tt_u = holds(&m, &Formula::until(Formula::tt(), phi.clone()));
        let g = holds(&m, &Formula::g(phi.clone()));
        let inner = holds(&m, &phi);
        for (x, e) in m.executions().iter().enumerate() {
            for i in 0..=e.len() {
                let p = m.point(x, i);
                prop_assert_eq!(f(p), tt_u(p));
                let scan = (i..=e.len()).all(|k| inner(m.point(x, k)));
                prop_assert_eq!(g(p), scan);
            }
        }
    }

    #[test]
    fn init_atoms_are_stable(m in models(), a in any::<u8>(), b in any::<u8>()) {
        let phi = build(&m, &Shape::Init(a, b));
        let at = holds(&m, &phi);
        for (x, e) in m.executions().iter().enumerate() {
            if at(m.point(x, 0)) {
                prop_assert!((0..=e.len()).all(|i| at(m.point(x, i))));
            }
        }
    }

    #[test]
    fn memoization_is_transparent(m in models(), s in shapes()) {
        let phi = Formula::g(build(&m, &s));
        let fast = Checker::new(&m, &phi, EvalOptions { cache: true }).unwrap();
        let slow = Checker::new(&m, &phi, EvalOptions { cache: false }).unwrap();
        for p in m.points() {
            prop_assert_eq!(fast.holds_at(p), slow.holds_at(p));
        }
        prop_assert_eq!(fast.check().outcome, slow.check().outcome);
    }

    #[test]
    fn esp_equals_espm_without_predicates(m in models(), mask in any::<u8>()) {
        let fs = flow(&m, mask);
        let a = holds(&m, &esp(&fs, m.domain()).unwrap());
        let f = espm(fs.signature(), fs.low(), fs.high(), &[], m.domain()).unwrap();
        let b = holds(&m, &f);
        for p in m.points() {
            prop_assert_eq!(a(p), b(p));
        }
    }

    #[test]
    fn espm_is_monotone(m in models(), mask in any::<u8>(), s1 in any::<u8>(), s2 in any::<u8>()) {
        let fs = flow(&m, mask);
        let dom = m.domain();
        let p1 = predicate(&m, s1);
        let p2 = predicate(&m, s2);
        let small = holds(&m, &espm(fs.signature(), fs.low(), fs.high(), std::slice::from_ref(&p1), dom).unwrap());
        let big = holds(&m, &espm(fs.signature(), fs.low(), fs.high(), &[p1, p2], dom).unwrap());
        let every = holds(&m, &esp(&fs, dom).unwrap());
        for p in m.points() {
            prop_assert!(!small(p) || big(p));
            prop_assert!(!every(p) || small(p));
        }
    }

    #[test]
    fn trivial_declassification_is_ak(m in models(), mask in any::<u8>()) {
        let fs = flow(&m, mask);
        let dom = m.domain();
        let ak = epiflow::logic::model_satisfies(&m, &encode_ak(&fs, dom).unwrap()).unwrap();
        let tt = InitPredicate::Expr(Expr::Const(Value::TRUE));
        let akd = epiflow::logic::model_satisfies(&m, &encode_akd(&fs, &[tt], dom).unwrap()).unwrap();
        let akr = epiflow::logic::model_satisfies(&m, &encode_akr(&fs, &ReleaseSpec::default(), dom).unwrap()).unwrap();
        prop_assert_eq!(ak.outcome, akd.outcome);
        prop_assert_eq!(ak.outcome, akr.outcome);
    }

    #[test]
    fn knowledge_never_grows(m in models(), mask in any::<u8>()) {
        let fs = flow(&m, mask);
        for e in m.executions() {
            let trace = e.trace();
            let s0 = e.initial();
            let mut before = knowledge_set(&m, &fs, s0, &[]);
            prop_assert!(before.contains(s0));
            for n in 1..=trace.len() {
                let now = knowledge_set(&m, &fs, s0, &trace[..n]);
                prop_assert!(now.is_subset(&before));
                prop_assert!(now.contains(s0));
                before = now;
            }
        }
    }
}

fn flow(m: &Model, mask: u8) -> FlowSpec {
    let vars = m.program().signature.vars();
    let low = vars
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &s)| s)
        .collect();
    FlowSpec::from_slots(&m.program().signature, low)
}

fn predicate(m: &Model, s: u8) -> InitPredicate {
    let vars = m.program().signature.vars();
    let x = vars[s as usize % vars.len()];
    let y = vars[(s as usize / 4) % vars.len()];
    use epiflow::lang::BinOp;
    InitPredicate::Expr(match s % 4 {
        0 => Expr::Var(x),
        1 => Expr::bin(BinOp::Eq, Expr::Var(x), Expr::Var(y)),
        2 => Expr::bin(BinOp::Lt, Expr::Var(x), Expr::Var(y)),
        _ => Expr::bin(BinOp::Add, Expr::Var(x), Expr::Var(y)),
    })
}
