//! Temporal epistemic formulas (without next), sugar expansion, and the
//! satisfaction relation over a model.

mod eval;
mod expand;
mod formula;
mod parse;

use thiserror::Error;

use crate::lang::ParseError;

pub use eval::{model_satisfies, model_satisfies_with, satisfies, Checker, EvalOptions};
pub use expand::{expand, expand_with, ExpandOptions, DEFAULT_EXPANSION_LIMIT};
pub use formula::{Binding, Conjunct, Formula, FormulaDisplay};
pub use parse::{parse_formula, parse_state_formula};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LogicError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("quantifier variable `{0}` shadows an enclosing binding")]
    Shadowed(String),
    #[error("quantifier variable `{0}` is not bound")]
    Unbound(String),
    #[error("formula expansion exceeds {limit} nodes")]
    TooLarge { limit: usize },
    #[error("formula refers to store slot {0}, which the program does not have")]
    UnknownSlot(usize),
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lang::{parse_program, Domain};
    use crate::model::{build_model, Model, ModelConfig};
    use crate::verdict::Outcome;

    fn model(src: &str) -> Model {
        let p = parse_program(src).unwrap();
        build_model(&p, &Domain::bool(), &ModelConfig::default()).unwrap()
    }

    fn f(m: &Model, src: &str) -> Arc<Formula> {
        parse_formula(src, &m.program().signature).unwrap()
    }

    #[test]
    fn init_holds_along_the_execution() {
        let m = model("x:=y; out y");
        // (x, y) = (tt, tt) is the last execution
        let phi = f(&m, "init(y, tt)");
        for i in 0..=2 {
            assert!(satisfies(&m, m.point(3, i), &phi).unwrap());
        }
    }

    #[test]
    fn until_with_immediate_goal() {
        let m = model("x:=y; out y");
        let phi = f(&m, "tt U 1 == 1");
        assert!(m.points().all(|p| satisfies(&m, p, &phi).unwrap()));
    }

    #[test]
    fn possibility_after_output() {
        let m = model("x:=y; out y");
        let phi = f(&m, "L (init(x, tt) && init(y, tt))");
        // (x, y) = (tt, ff) after printing ff
        assert!(!satisfies(&m, m.point(2, 2), &phi).unwrap());
        assert!(satisfies(&m, m.point(2, 1), &phi).unwrap());
    }

    #[test]
    fn skip_satisfies_always_true() {
        let m = model("skip");
        let v = model_satisfies(&m, &Formula::g(Formula::tt())).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
    }

    #[test]
    fn tainted_model_refuses() {
        let m = model("while tt do skip");
        let v = model_satisfies(&m, &Formula::tt()).unwrap();
        assert_eq!(v.outcome, Outcome::BoundExceeded);
    }

    #[test]
    fn failure_reports_binding_and_point() {
        let m = model("x:=y; out y");
        let phi = f(
            &m,
            "G forall a . (init(x, a) -> forall b . L (init(x, a) && init(y, b)))",
        );
        let v = model_satisfies(&m, &phi).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        assert_eq!(v.failing, vec![0, 1, 2, 3]);
        let w = v.witness.unwrap();
        assert_eq!(w.execution, 0);
        assert_eq!(w.point, 2);
        assert_eq!(w.binding("a"), Some(crate::lang::Value::FALSE));
        assert_eq!(w.binding("b"), Some(crate::lang::Value::TRUE));
    }

    #[test]
    fn cache_does_not_change_results() {
        let m = model("if x then { out y } else { out x }; out y");
        let phi = f(&m, "G (K (y == 1) || F L init(x, 0)) W x == y");
        let a = Checker::new(&m, &phi, EvalOptions { cache: true }).unwrap();
        let b = Checker::new(&m, &phi, EvalOptions { cache: false }).unwrap();
        for p in m.points() {
            assert_eq!(a.holds_at(p), b.holds_at(p));
        }
    }
}
