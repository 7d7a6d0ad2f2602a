use std::sync::Arc;

use thiserror::Error;

use super::ast::{BinOp, Event, Expr, OutArg, Program, Stmt, Store, UnOp};
use super::value::{Domain, Value};

/// Evaluates `e` in `store`. Total: arithmetic wraps and `x mod 0 = x`.
///
/// Panics on an unsubstituted quantifier variable, which parsing and
/// expansion rule out.
pub fn eval(store: &Store, e: &Expr, dom: &Domain) -> Value {
    match e {
        Expr::Const(v) => dom.wrap(v.0),
        Expr::Var(s) => store.get(*s),
        Expr::Bound(n) => panic!("quantifier variable `{n}` reached evaluation"),
        Expr::Hash(a) => dom.hash(eval(store, a, dom)),
        Expr::Unary(UnOp::Not, a) => dom.from_bool(!dom.is_true(eval(store, a, dom))),
        Expr::Unary(UnOp::Neg, a) => dom.wrap(-eval(store, a, dom).0),
        Expr::Binary(op, a, b) => {
            let x = eval(store, a, dom);
            let y = eval(store, b, dom);
            apply(*op, x, y, dom)
        }
    }
}

fn apply(op: BinOp, x: Value, y: Value, dom: &Domain) -> Value {
    let b = |c: bool| dom.from_bool(c);
    match op {
        BinOp::And => b(dom.is_true(x) && dom.is_true(y)),
        BinOp::Or => b(dom.is_true(x) || dom.is_true(y)),
        BinOp::Eq => b(x == y),
        BinOp::Ne => b(x != y),
        BinOp::Lt => b(x < y),
        BinOp::Le => b(x <= y),
        BinOp::Ge => b(x >= y),
        BinOp::Gt => b(x > y),
        BinOp::Add => dom.wrap(x.0 + y.0),
        BinOp::Sub => dom.wrap(x.0 - y.0),
        BinOp::Mul => dom.wrap(x.0 * y.0),
        BinOp::Mod if y.0 == 0 => x,
        BinOp::Mod => dom.wrap(x.0.rem_euclid(y.0)),
    }
}

/// Result of one small step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Terminal,
    Next {
        program: Arc<Stmt>,
        store: Store,
        event: Option<Event>,
    },
}

fn next(program: Arc<Stmt>, store: Store, event: Option<Event>) -> Step {
    Step::Next {
        program,
        store,
        event,
    }
}

fn skip() -> Arc<Stmt> {
    Arc::new(Stmt::Skip)
}

/// One transition of the structural operational semantics. `(skip, σ)` is
/// terminal; a sequence whose head finishes continues with its tail in the
/// same step.
pub fn step(p: &Arc<Stmt>, store: &Store, dom: &Domain) -> Step {
    match &**p {
        Stmt::Skip => Step::Terminal,
        Stmt::Out(arg) => {
            let ev = match arg {
                OutArg::Expr(e) => Event::Out(eval(store, e, dom)),
                OutArg::Label(l) => Event::Label(l.clone()),
            };
            next(skip(), store.clone(), Some(ev))
        }
        Stmt::Assign(x, e) => {
            let mut s = store.clone();
            s.set(*x, eval(store, e, dom));
            next(skip(), s, None)
        }
        Stmt::Release(r) => {
            let mut s = store.clone();
            s.set(*r, Value::TRUE);
            next(skip(), s, None)
        }
        Stmt::If(g, a, b) => {
            let branch = if dom.is_true(eval(store, g, dom)) {
                a
            } else {
                b
            };
            next(branch.clone(), store.clone(), None)
        }
        Stmt::While(g, body) => {
            if dom.is_true(eval(store, g, dom)) {
                next(
                    Arc::new(Stmt::Seq(body.clone(), p.clone())),
                    store.clone(),
                    None,
                )
            } else {
                next(skip(), store.clone(), None)
            }
        }
        Stmt::Seq(head, tail) => {
            if matches!(**head, Stmt::Skip) {
                return next(tail.clone(), store.clone(), None);
            }
            match step(head, store, dom) {
                Step::Terminal => unreachable!("only skip is terminal"),
                Step::Next {
                    program,
                    store,
                    event,
                } => {
                    let rest = if matches!(*program, Stmt::Skip) {
                        tail.clone()
                    } else {
                        Arc::new(Stmt::Seq(program, tail.clone()))
                    };
                    next(rest, store, event)
                }
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainCheckError {
    #[error("literal {0} is not a boolean")]
    NonBooleanLiteral(i64),
    #[error("guard `{0}` is not boolean-shaped")]
    NonBooleanGuard(String),
}

/// Checks the program against a domain: in the boolean domain literals must
/// be 0/1 and guards must be boolean-shaped.
pub fn check_domain(p: &Program, dom: &Domain) -> Result<(), DomainCheckError> {
    if !dom.is_bool() {
        return Ok(());
    }
    let mut err = None;
    p.body.for_each(&mut |s| {
        if err.is_some() {
            return;
        }
        let mut exprs: Vec<&Expr> = Vec::new();
        match s {
            Stmt::Out(OutArg::Expr(e)) | Stmt::Assign(_, e) => exprs.push(e),
            Stmt::If(g, ..) | Stmt::While(g, _) => {
                if !boolean_shaped(g) {
                    err = Some(DomainCheckError::NonBooleanGuard(
                        g.display(&p.signature).to_string(),
                    ));
                    return;
                }
                exprs.push(g);
            }
            _ => {}
        }
        for e in exprs {
            if let Some(n) = non_boolean_literal(e) {
                err = Some(DomainCheckError::NonBooleanLiteral(n));
            }
        }
    });
    err.map_or(Ok(()), Err)
}

fn boolean_shaped(e: &Expr) -> bool {
    match e {
        Expr::Const(_) | Expr::Var(_) | Expr::Bound(_) => true,
        Expr::Unary(UnOp::Not, _) => true,
        Expr::Binary(op, ..) => op.is_boolean(),
        Expr::Unary(UnOp::Neg, _) | Expr::Hash(_) => false,
    }
}

fn non_boolean_literal(e: &Expr) -> Option<i64> {
    match e {
        Expr::Const(v) if v.0 != 0 && v.0 != 1 => Some(v.0),
        Expr::Const(_) | Expr::Var(_) | Expr::Bound(_) => None,
        Expr::Unary(_, a) | Expr::Hash(a) => non_boolean_literal(a),
        Expr::Binary(_, a, b) => non_boolean_literal(a).or_else(|| non_boolean_literal(b)),
    }
}
