use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::DashMap;
use rayon::prelude::*;

use super::expand::expand;
use super::formula::Formula;
use super::LogicError;
use crate::lang::{eval, Expr, Slot};
use crate::model::{Model, Point, TraceId};
use crate::verdict::{Stats, Verdict, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    /// Memoize `K` per epoch and `U` per execution. Off gives a direct,
    /// uncached reading of the satisfaction relation.
    pub cache: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { cache: true }
    }
}

type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Eq(Expr, Expr),
    Init(Slot, Expr),
    And(Vec<NodeId>),
    Not(NodeId),
    K(NodeId),
    Until(NodeId, NodeId),
}

/// A core formula compiled against one model.
pub struct Checker<'m> {
    model: &'m Model,
    root: Arc<Formula>,
    nodes: Vec<Node>,
    /// Nodes whose value depends on the execution only, not the index.
    exec_const: Vec<bool>,
    /// Node of every subformula of `root`, keyed by address.
    ids: HashMap<usize, NodeId>,
    /// For `K ¬(init pattern)` nodes: the execution the pattern selects, or
    /// `None` when no execution can match.
    patterns: HashMap<NodeId, Option<usize>>,
    cache: bool,
    k_memo: DashMap<(NodeId, TraceId), bool>,
    until_memo: DashMap<(NodeId, usize), Arc<Vec<bool>>>,
    visited: AtomicU64,
    hits: AtomicU64,
}

impl<'m> Checker<'m> {
    /// Expands `formula` if needed and compiles it for `model`.
    pub fn new(
        model: &'m Model,
        formula: &Arc<Formula>,
        opts: EvalOptions,
    ) -> Result<Self, LogicError> {
        let root = if formula.is_core() {
            formula.clone()
        } else {
            expand(formula, model.domain())?
        };
        let mut c = Checker {
            model,
            root: root.clone(),
            nodes: Vec::new(),
            exec_const: Vec::new(),
            ids: HashMap::new(),
            patterns: HashMap::new(),
            cache: opts.cache,
            k_memo: DashMap::new(),
            until_memo: DashMap::new(),
            visited: AtomicU64::new(0),
            hits: AtomicU64::new(0),
        };
        let mut interned = HashMap::new();
        c.compile(&root, &mut interned)?;
        Ok(c)
    }

    /// The expanded core formula that is evaluated.
    pub fn core(&self) -> &Arc<Formula> {
        &self.root
    }

    /// Distinct nodes after hash-consing.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    fn compile(
        &mut self,
        f: &Arc<Formula>,
        interned: &mut HashMap<Node, NodeId>,
    ) -> Result<NodeId, LogicError> {
        if let Some(&id) = self.ids.get(&addr(f)) {
            return Ok(id);
        }
        let width = self.model.program().signature.len();
        let check = |e: &Expr| -> Result<(), LogicError> {
            let mut bad = None;
            e.for_each_slot(&mut |s| {
                if s >= width {
                    bad = Some(s)
                }
            });
            bad.map_or(Ok(()), |s| Err(LogicError::UnknownSlot(s)))
        };
        let node = match &**f {
            Formula::Eq(a, b) => {
                check(a)?;
                check(b)?;
                Node::Eq(a.clone(), b.clone())
            }
            Formula::Init(x, e) => {
                if *x >= width {
                    return Err(LogicError::UnknownSlot(*x));
                }
                check(e)?;
                Node::Init(*x, e.clone())
            }
            Formula::And(cs) => {
                let mut ids = Vec::with_capacity(cs.len());
                for c in cs {
                    ids.push(self.compile(&c.formula, interned)?);
                }
                Node::And(ids)
            }
            Formula::Not(a) => Node::Not(self.compile(a, interned)?),
            Formula::K(a) => Node::K(self.compile(a, interned)?),
            Formula::Until(a, b) => {
                let a = self.compile(a, interned)?;
                Node::Until(a, self.compile(b, interned)?)
            }
            _ => unreachable!("expanded formulas are core-only"),
        };
        let id = match interned.get(&node) {
            Some(&id) => id,
            None => {
                let id = self.nodes.len() as NodeId;
                let ec = match &node {
                    Node::Eq(a, b) => no_vars(a) && no_vars(b),
                    Node::Init(_, e) => no_vars(e),
                    Node::And(cs) => cs.iter().all(|&c| self.exec_const[c as usize]),
                    Node::Not(c) => self.exec_const[*c as usize],
                    Node::K(_) | Node::Until(..) => false,
                };
                if let Node::K(c) = node {
                    if let Some(p) = self.full_pattern(c) {
                        self.patterns.insert(id, p);
                    }
                }
                self.exec_const.push(ec);
                self.nodes.push(node.clone());
                interned.insert(node, id);
                id
            }
        };
        self.ids.insert(addr(f), id);
        Ok(id)
    }

    /// Recognises `¬(init(x1, c1) ∧ … )` fixing every program variable to a
    /// constant, which singles out at most one execution.
    fn full_pattern(&self, c: NodeId) -> Option<Option<usize>> {
        let Node::Not(d) = &self.nodes[c as usize] else {
            return None;
        };
        let m = self.model;
        let width = m.program().signature.len();
        let mut fixed: Vec<Option<crate::lang::Value>> = vec![None; width];
        let mut possible = true;
        let mut stack = vec![*d];
        while let Some(n) = stack.pop() {
            match &self.nodes[n as usize] {
                Node::And(cs) => stack.extend(cs.iter().copied()),
                Node::Init(x, Expr::Const(v)) => {
                    let v = m.domain().wrap(v.0);
                    match fixed[*x] {
                        Some(w) if w != v => possible = false,
                        _ => fixed[*x] = Some(v),
                    }
                }
                _ => return None,
            }
        }
        let sig = &m.program().signature;
        for s in sig.flags() {
            match fixed[s] {
                Some(v) if v != crate::lang::Value::FALSE => possible = false,
                _ => {}
            }
        }
        let vals: Option<Vec<_>> = m.vars().iter().map(|&s| fixed[s]).collect();
        let vals = vals?;
        if !possible {
            return Some(None);
        }
        Some(m.execution_index(&vals))
    }

    pub fn holds_at(&self, pt: Point) -> bool {
        assert!(self.model.contains(pt), "point from another model");
        self.eval(pt.execution, pt.index, self.root_id())
    }

    fn root_id(&self) -> NodeId {
        self.ids[&addr(&self.root)]
    }

    fn id_of(&self, f: &Arc<Formula>) -> NodeId {
        self.ids[&addr(f)]
    }

    fn holds_sub(&self, f: &Arc<Formula>, x: usize, i: usize) -> bool {
        self.eval(x, i, self.id_of(f))
    }

    pub fn stats(&self) -> Stats {
        Stats {
            points_visited: self.visited.load(Ordering::Relaxed),
            cache_hits: self.hits.load(Ordering::Relaxed),
            formula_size: self.nodes.len(),
        }
    }

    fn eval(&self, x: usize, i: usize, n: NodeId) -> bool {
        self.visited.fetch_add(1, Ordering::Relaxed);
        let m = self.model;
        let exec = m.execution(x);
        match &self.nodes[n as usize] {
            Node::Eq(a, b) => {
                let s = exec.store(i);
                eval(s, a, m.domain()) == eval(s, b, m.domain())
            }
            Node::Init(v, e) => exec.initial().get(*v) == eval(exec.store(i), e, m.domain()),
            Node::And(cs) => cs.iter().all(|&c| self.eval(x, i, c)),
            Node::Not(c) => !self.eval(x, i, *c),
            Node::K(c) => self.knows(x, i, n, *c),
            Node::Until(a, b) => self.until(x, i, n, *a, *b),
        }
    }

    fn knows(&self, x: usize, i: usize, n: NodeId, c: NodeId) -> bool {
        let m = self.model;
        let t = m.trace_id_of(m.offset(x) + i);
        if !self.cache {
            return m
                .points()
                .filter(|&p| m.trace_id(p) == t)
                .all(|p| self.eval(p.execution, p.index, c));
        }
        if let Some(p) = self.patterns.get(&n) {
            return match p {
                Some(y) => m.epoch(t).executions.binary_search(&(*y as u32)).is_err(),
                None => true,
            };
        }
        if let Some(v) = self.k_memo.get(&(n, t)) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return *v;
        }
        let ep = m.epoch(t);
        let r = if self.exec_const[c as usize] {
            ep.executions.iter().all(|&y| self.eval(y as usize, 0, c))
        } else {
            ep.points.iter().all(|&p| {
                let pt = m.point_from_id(p);
                self.eval(pt.execution, pt.index, c)
            })
        };
        self.k_memo.insert((n, t), r);
        r
    }

    fn until(&self, x: usize, i: usize, n: NodeId, a: NodeId, b: NodeId) -> bool {
        let len = self.model.execution(x).len();
        if !self.cache {
            for j in i..=len {
                if self.eval(x, j, b) {
                    return true;
                }
                if !self.eval(x, j, a) {
                    return false;
                }
            }
            return false;
        }
        if let Some(v) = self.until_memo.get(&(n, x)) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return v[i];
        }
        let mut res = vec![false; len + 1];
        res[len] = self.eval(x, len, b);
        for k in (0..len).rev() {
            res[k] = self.eval(x, k, b) || (res[k + 1] && self.eval(x, k, a));
        }
        let r = res[i];
        self.until_memo.insert((n, x), Arc::new(res));
        r
    }

    /// Checks the formula at `(π, 0)` of every execution.
    pub fn check(&self) -> Verdict {
        let failing: Vec<usize> = (0..self.model.executions().len())
            .into_par_iter()
            .filter(|&x| !self.eval(x, 0, self.root_id()))
            .collect();
        let mut v = match failing.first() {
            None => Verdict::holds(),
            Some(&x) => {
                let w = self.explain(x);
                Verdict::fails(w, failing)
            }
        };
        v.stats = self.stats();
        v
    }

    /// Walks the failing formula at `(π, 0)` down through `G`, labelled
    /// conjunctions and disjunctions, collecting quantifier choices.
    pub fn explain(&self, x: usize) -> Witness {
        let mut w = Witness::at(x, 0);
        let mut f = self.root.clone();
        let mut i = 0;
        loop {
            let next = match &*f {
                Formula::And(cs) => {
                    cs.iter()
                        .find(|c| !self.holds_sub(&c.formula, x, i))
                        .map(|c| {
                            for (name, v) in &c.binding {
                                w.bindings.push((name.to_string(), *v));
                            }
                            c.formula.clone()
                        })
                }
                Formula::Not(inner) => match &**inner {
                    Formula::Until(a, b) if is_tt(a) => match &**b {
                        Formula::Not(phi) => {
                            let len = self.model.execution(x).len();
                            (i..=len).find(|&k| !self.holds_sub(phi, x, k)).map(|k| {
                                i = k;
                                phi.clone()
                            })
                        }
                        _ => None,
                    },
                    Formula::And(cs) => {
                        let negated: Vec<&Arc<Formula>> = cs
                            .iter()
                            .filter_map(|c| match &*c.formula {
                                Formula::Not(d) => Some(d),
                                _ => None,
                            })
                            .collect();
                        negated
                            .iter()
                            .find(|d| self.direct_atoms_hold(d, x, i))
                            .or(negated.last())
                            .map(|d| (*d).clone())
                    }
                    _ => None,
                },
                _ => None,
            };
            match next {
                Some(n) => f = n,
                None => break,
            }
        }
        w.point = i;
        w
    }

    fn direct_atoms_hold(&self, d: &Arc<Formula>, x: usize, i: usize) -> bool {
        let Formula::And(cs) = &**d else {
            return false;
        };
        let atoms: Vec<_> = cs
            .iter()
            .filter(|c| matches!(*c.formula, Formula::Eq(..) | Formula::Init(..)))
            .collect();
        !atoms.is_empty() && atoms.iter().all(|c| self.holds_sub(&c.formula, x, i))
    }
}

fn addr(f: &Arc<Formula>) -> usize {
    Arc::as_ptr(f) as usize
}

fn is_tt(f: &Formula) -> bool {
    matches!(f, Formula::And(cs) if cs.is_empty())
}

fn no_vars(e: &Expr) -> bool {
    let mut any = false;
    e.for_each_slot(&mut |_| any = true);
    !any
}

/// `M, pt ⊨ φ`.
pub fn satisfies(m: &Model, pt: Point, f: &Arc<Formula>) -> Result<bool, LogicError> {
    Ok(Checker::new(m, f, EvalOptions::default())?.holds_at(pt))
}

/// `M ⊨ φ`: φ holds at the initial point of every execution. Tainted models
/// give `BOUND_EXCEEDED`.
pub fn model_satisfies(m: &Model, f: &Arc<Formula>) -> Result<Verdict, LogicError> {
    model_satisfies_with(m, f, EvalOptions::default())
}

pub fn model_satisfies_with(
    m: &Model,
    f: &Arc<Formula>,
    opts: EvalOptions,
) -> Result<Verdict, LogicError> {
    let checker = Checker::new(m, f, opts)?;
    if m.is_tainted() {
        let mut v = Verdict::bound_exceeded();
        v.stats.formula_size = checker.size();
        return Ok(v);
    }
    Ok(checker.check())
}
