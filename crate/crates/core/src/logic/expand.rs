use std::collections::HashMap;
use std::sync::Arc;

use super::formula::{Conjunct, Formula};
use super::LogicError;
use crate::lang::{Domain, Expr, Value};

/// Default cap on nodes created while expanding quantifiers.
pub const DEFAULT_EXPANSION_LIMIT: usize = 4_000_000;

/// Blocks of quantifiers beyond this many expanded leaves get a warning.
const WARN_LEAVES: u128 = 8u128.pow(4);

#[derive(Debug, Clone, Copy)]
pub struct ExpandOptions {
    pub max_nodes: usize,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        Self {
            max_nodes: DEFAULT_EXPANSION_LIMIT,
        }
    }
}

/// Rewrites sugar into the core connectives and unrolls quantifiers over `dom`.
pub fn expand(f: &Arc<Formula>, dom: &Domain) -> Result<Arc<Formula>, LogicError> {
    expand_with(f, dom, ExpandOptions::default())
}

pub fn expand_with(
    f: &Arc<Formula>,
    dom: &Domain,
    opts: ExpandOptions,
) -> Result<Arc<Formula>, LogicError> {
    let depth = max_quantifier_depth(f);
    let leaves = (dom.size() as u128).saturating_pow(depth as u32);
    if leaves > WARN_LEAVES {
        log::warn!(
            "quantifier expansion over {} values with nesting depth {depth} yields {leaves} instances",
            dom.size()
        );
    }
    let mut ex = Expander {
        dom,
        env: Vec::new(),
        shared: HashMap::new(),
        created: 0,
        limit: opts.max_nodes,
    };
    ex.go(f)
}

fn max_quantifier_depth(f: &Formula) -> usize {
    match f {
        Formula::Forall(_, a) | Formula::Exists(_, a) => 1 + max_quantifier_depth(a),
        Formula::Eq(..) | Formula::Init(..) | Formula::True | Formula::False => 0,
        Formula::And(cs) => cs
            .iter()
            .map(|c| max_quantifier_depth(&c.formula))
            .max()
            .unwrap_or(0),
        Formula::Or(fs) => fs
            .iter()
            .map(|c| max_quantifier_depth(c))
            .max()
            .unwrap_or(0),
        Formula::Not(a) | Formula::K(a) | Formula::L(a) | Formula::F(a) | Formula::G(a) => {
            max_quantifier_depth(a)
        }
        Formula::Until(a, b) | Formula::WeakUntil(a, b) | Formula::Implies(a, b) => {
            max_quantifier_depth(a).max(max_quantifier_depth(b))
        }
    }
}

struct Expander<'a> {
    dom: &'a Domain,
    env: Vec<(Arc<str>, Value)>,
    /// Results for subformulas expanded with an empty environment, keyed by
    /// address, so shared input subtrees stay shared.
    shared: HashMap<*const Formula, Arc<Formula>>,
    created: usize,
    limit: usize,
}

impl Expander<'_> {
    fn mk(&mut self, f: Formula) -> Result<Arc<Formula>, LogicError> {
        self.created += 1;
        if self.created > self.limit {
            return Err(LogicError::TooLarge { limit: self.limit });
        }
        Ok(Arc::new(f))
    }

    fn expr(&self, e: &Expr) -> Result<Expr, LogicError> {
        if !e.has_bound() {
            return Ok(e.clone());
        }
        let mut out = e.clone();
        for (name, v) in self.env.iter().rev() {
            out = out.substitute(name, *v);
        }
        if let Some(name) = first_bound(&out) {
            return Err(LogicError::Unbound(name));
        }
        Ok(out)
    }

    fn not(&mut self, f: Arc<Formula>) -> Result<Arc<Formula>, LogicError> {
        self.mk(Formula::Not(f))
    }

    fn tt(&mut self) -> Result<Arc<Formula>, LogicError> {
        self.mk(Formula::And(Vec::new()))
    }

    fn go(&mut self, f: &Arc<Formula>) -> Result<Arc<Formula>, LogicError> {
        if self.env.is_empty() {
            if let Some(done) = self.shared.get(&Arc::as_ptr(f)) {
                return Ok(done.clone());
            }
        }
        let out = self.go_uncached(f)?;
        if self.env.is_empty() {
            self.shared.insert(Arc::as_ptr(f), out.clone());
        }
        Ok(out)
    }

    fn go_uncached(&mut self, f: &Arc<Formula>) -> Result<Arc<Formula>, LogicError> {
        match &**f {
            Formula::Eq(a, b) => {
                let (a, b) = (self.expr(a)?, self.expr(b)?);
                self.mk(Formula::Eq(a, b))
            }
            Formula::Init(x, e) => {
                let e = self.expr(e)?;
                self.mk(Formula::Init(*x, e))
            }
            Formula::True => self.tt(),
            Formula::False => {
                let t = self.tt()?;
                self.not(t)
            }
            Formula::And(cs) => {
                let mut out = Vec::with_capacity(cs.len());
                for c in cs {
                    out.push(Conjunct {
                        binding: c.binding.clone(),
                        formula: self.go(&c.formula)?,
                    });
                }
                self.mk(Formula::And(out))
            }
            Formula::Or(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for c in fs {
                    let e = self.go(c)?;
                    out.push(Conjunct::plain(self.not(e)?));
                }
                let and = self.mk(Formula::And(out))?;
                self.not(and)
            }
            Formula::Implies(a, b) => {
                let a = self.go(a)?;
                let b = self.go(b)?;
                let nb = self.not(b)?;
                let and = self.mk(Formula::And(vec![Conjunct::plain(a), Conjunct::plain(nb)]))?;
                self.not(and)
            }
            Formula::Not(a) => {
                let a = self.go(a)?;
                self.not(a)
            }
            Formula::K(a) => {
                let a = self.go(a)?;
                self.mk(Formula::K(a))
            }
            Formula::L(a) => {
                let a = self.go(a)?;
                let na = self.not(a)?;
                let k = self.mk(Formula::K(na))?;
                self.not(k)
            }
            Formula::Until(a, b) => {
                let a = self.go(a)?;
                let b = self.go(b)?;
                self.mk(Formula::Until(a, b))
            }
            Formula::F(a) => {
                let a = self.go(a)?;
                self.eventually(a)
            }
            Formula::G(a) => {
                let a = self.go(a)?;
                self.always(a)
            }
            Formula::WeakUntil(a, b) => {
                let a = self.go(a)?;
                let b = self.go(b)?;
                let u = self.mk(Formula::Until(a.clone(), b))?;
                let g = self.always(a)?;
                // (a U b) ∨ G a
                let nu = self.not(u)?;
                let ng = self.not(g)?;
                let and = self.mk(Formula::And(vec![Conjunct::plain(nu), Conjunct::plain(ng)]))?;
                self.not(and)
            }
            Formula::Forall(name, body) | Formula::Exists(name, body) => {
                if self.env.iter().any(|(n, _)| n == name) {
                    return Err(LogicError::Shadowed(name.to_string()));
                }
                let universal = matches!(&**f, Formula::Forall(..));
                let mut cs = Vec::with_capacity(self.dom.size());
                for v in self.dom.values() {
                    self.env.push((name.clone(), v));
                    let inner = self.go(body);
                    self.env.pop();
                    let inner = inner?;
                    let formula = if universal { inner } else { self.not(inner)? };
                    cs.push(Conjunct {
                        binding: vec![(name.clone(), v)],
                        formula,
                    });
                }
                let and = self.mk(Formula::And(cs))?;
                if universal {
                    Ok(and)
                } else {
                    self.not(and)
                }
            }
        }
    }

    fn eventually(&mut self, a: Arc<Formula>) -> Result<Arc<Formula>, LogicError> {
        let t = self.tt()?;
        self.mk(Formula::Until(t, a))
    }

    fn always(&mut self, a: Arc<Formula>) -> Result<Arc<Formula>, LogicError> {
        let na = self.not(a)?;
        let f = self.eventually(na)?;
        self.not(f)
    }
}

fn first_bound(e: &Expr) -> Option<String> {
    match e {
        Expr::Bound(n) => Some(n.to_string()),
        Expr::Const(_) | Expr::Var(_) => None,
        Expr::Unary(_, a) | Expr::Hash(a) => first_bound(a),
        Expr::Binary(_, a, b) => first_bound(a).or_else(|| first_bound(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Value;

    fn bound(n: &str) -> Expr {
        Expr::Bound(Arc::from(n))
    }

    #[test]
    fn forall_over_booleans() {
        let f = Formula::forall("v", Arc::new(Formula::Init(0, bound("v"))));
        let e = expand(&f, &Domain::bool()).unwrap();
        let Formula::And(cs) = &*e else { panic!() };
        assert_eq!(cs.len(), 2);
        assert_eq!(*cs[0].formula, Formula::Init(0, Expr::Const(Value::FALSE)));
        assert_eq!(*cs[1].formula, Formula::Init(0, Expr::Const(Value::TRUE)));
        assert_eq!(cs[1].binding, vec![(Arc::from("v"), Value::TRUE)]);
    }

    #[test]
    fn l_is_not_k_not() {
        let a = Formula::eq(Expr::Var(0), Expr::int(1));
        let e = expand(&Formula::l(a.clone()), &Domain::bool()).unwrap();
        let expected = Formula::Not(Arc::new(Formula::K(Arc::new(Formula::Not(a)))));
        assert_eq!(*e, expected);
    }

    #[test]
    fn weak_until_shape() {
        let a = Formula::eq(Expr::Var(0), Expr::int(1));
        let b = Formula::eq(Expr::Var(1), Expr::int(1));
        let e = expand(&Formula::weak_until(a.clone(), b.clone()), &Domain::bool()).unwrap();
        let tt = Arc::new(Formula::And(vec![]));
        let u = Arc::new(Formula::Until(a.clone(), b));
        let g = Arc::new(Formula::Not(Arc::new(Formula::Until(
            tt,
            Arc::new(Formula::Not(a)),
        ))));
        let expected = Formula::Not(Arc::new(Formula::And(vec![
            Conjunct::plain(Arc::new(Formula::Not(u))),
            Conjunct::plain(Arc::new(Formula::Not(g))),
        ])));
        assert_eq!(*e, expected);
        assert!(e.is_core());
    }

    #[test]
    fn shadowing_rejected() {
        let inner = Formula::forall("v", Arc::new(Formula::Init(0, bound("v"))));
        let f = Formula::forall("v", inner);
        assert_eq!(
            expand(&f, &Domain::bool()).unwrap_err(),
            LogicError::Shadowed("v".into())
        );
    }

    #[test]
    fn free_quantifier_variable_rejected() {
        let f = Arc::new(Formula::Init(0, bound("w")));
        assert_eq!(
            expand(&f, &Domain::bool()).unwrap_err(),
            LogicError::Unbound("w".into())
        );
    }

    #[test]
    fn node_cap() {
        let mut f = Arc::new(Formula::Init(0, bound("a")));
        for n in ["a", "b", "c", "d"] {
            f = Formula::forall(n, f);
        }
        let err = expand_with(
            &f,
            &Domain::int(8).unwrap(),
            ExpandOptions { max_nodes: 100 },
        );
        assert_eq!(err.unwrap_err(), LogicError::TooLarge { limit: 100 });
    }

    #[test]
    fn sharing_is_preserved() {
        let a = Formula::l(Formula::init(0, Value::TRUE));
        let f = Formula::and([a.clone(), Formula::not(a)]);
        let e = expand(&f, &Domain::bool()).unwrap();
        let Formula::And(cs) = &*e else { panic!() };
        let Formula::Not(inner) = &*cs[1].formula else {
            panic!()
        };
        assert!(Arc::ptr_eq(&cs[0].formula, inner));
    }
}
