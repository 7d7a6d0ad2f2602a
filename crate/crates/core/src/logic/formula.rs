use std::fmt;
use std::sync::Arc;

use crate::lang::{Domain, Expr, Signature, Slot, Value};

/// Names and values chosen by an expanded quantifier block.
pub type Binding = Vec<(Arc<str>, Value)>;

/// A conjunct together with the quantifier choice it stands for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Conjunct {
    pub binding: Binding,
    pub formula: Arc<Formula>,
}

impl Conjunct {
    pub fn plain(formula: Arc<Formula>) -> Self {
        Self {
            binding: Vec::new(),
            formula,
        }
    }
}

/// Temporal epistemic formula. After [`expand`](super::expand) only `Eq`,
/// `Init`, `And`, `Not`, `K` and `Until` remain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(Expr, Expr),
    /// `init_x(e)`: the initial value of `x` equals `e` in the current store.
    Init(Slot, Expr),
    /// n-ary conjunction; empty means `tt`.
    And(Vec<Conjunct>),
    Not(Arc<Formula>),
    K(Arc<Formula>),
    Until(Arc<Formula>, Arc<Formula>),

    True,
    False,
    Or(Vec<Arc<Formula>>),
    Implies(Arc<Formula>, Arc<Formula>),
    Forall(Arc<str>, Arc<Formula>),
    Exists(Arc<str>, Arc<Formula>),
    L(Arc<Formula>),
    F(Arc<Formula>),
    G(Arc<Formula>),
    WeakUntil(Arc<Formula>, Arc<Formula>),
}

impl Formula {
    pub fn and(fs: impl IntoIterator<Item = Arc<Formula>>) -> Arc<Formula> {
        Arc::new(Formula::And(fs.into_iter().map(Conjunct::plain).collect()))
    }

    pub fn or(fs: impl IntoIterator<Item = Arc<Formula>>) -> Arc<Formula> {
        Arc::new(Formula::Or(fs.into_iter().collect()))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Not(f))
    }

    pub fn implies(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Implies(a, b))
    }

    pub fn k(f: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::K(f))
    }

    pub fn l(f: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::L(f))
    }

    pub fn g(f: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::G(f))
    }

    pub fn f(f: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::F(f))
    }

    pub fn until(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Until(a, b))
    }

    pub fn weak_until(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::WeakUntil(a, b))
    }

    pub fn tt() -> Arc<Formula> {
        Arc::new(Formula::True)
    }

    pub fn ff() -> Arc<Formula> {
        Arc::new(Formula::False)
    }

    pub fn eq(a: Expr, b: Expr) -> Arc<Formula> {
        Arc::new(Formula::Eq(a, b))
    }

    pub fn init(x: Slot, v: Value) -> Arc<Formula> {
        Arc::new(Formula::Init(x, Expr::Const(v)))
    }

    /// Conjunction of `init_x(v)` over paired slots and values.
    pub fn init_vec(slots: &[Slot], values: &[Value]) -> Arc<Formula> {
        debug_assert_eq!(slots.len(), values.len());
        Formula::and(slots.iter().zip(values).map(|(&s, &v)| Formula::init(s, v)))
    }

    pub fn forall(name: &str, body: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Forall(Arc::from(name), body))
    }

    pub fn exists(name: &str, body: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Exists(Arc::from(name), body))
    }

    /// True when only core nodes occur.
    pub fn is_core(&self) -> bool {
        match self {
            Formula::Eq(..) | Formula::Init(..) => true,
            Formula::And(cs) => cs.iter().all(|c| c.formula.is_core()),
            Formula::Not(a) | Formula::K(a) => a.is_core(),
            Formula::Until(a, b) => a.is_core() && b.is_core(),
            _ => false,
        }
    }

    /// True for formulas built from `Eq` atoms and boolean connectives only.
    pub fn is_state_formula(&self) -> bool {
        match self {
            Formula::Eq(..) | Formula::True | Formula::False => true,
            Formula::And(cs) => cs.iter().all(|c| c.formula.is_state_formula()),
            Formula::Or(fs) => fs.iter().all(|f| f.is_state_formula()),
            Formula::Not(a) => a.is_state_formula(),
            Formula::Implies(a, b) => a.is_state_formula() && b.is_state_formula(),
            _ => false,
        }
    }

    /// Number of nodes in the tree, counting shared children each time.
    pub fn tree_size(&self) -> usize {
        1 + match self {
            Formula::Eq(..) | Formula::Init(..) | Formula::True | Formula::False => 0,
            Formula::And(cs) => cs.iter().map(|c| c.formula.tree_size()).sum(),
            Formula::Or(fs) => fs.iter().map(|f| f.tree_size()).sum(),
            Formula::Not(a)
            | Formula::K(a)
            | Formula::L(a)
            | Formula::F(a)
            | Formula::G(a)
            | Formula::Forall(_, a)
            | Formula::Exists(_, a) => a.tree_size(),
            Formula::Until(a, b) | Formula::WeakUntil(a, b) | Formula::Implies(a, b) => {
                a.tree_size() + b.tree_size()
            }
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            sig,
            domain: None,
        }
    }

    pub fn display_in<'a>(&'a self, sig: &'a Signature, domain: &'a Domain) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            sig,
            domain: Some(domain),
        }
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    sig: &'a Signature,
    domain: Option<&'a Domain>,
}

impl FormulaDisplay<'_> {
    fn expr(&self, f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
        match self.domain {
            Some(d) => write!(f, "{}", e.display_in(self.sig, d)),
            None => write!(f, "{}", e.display(self.sig)),
        }
    }

    fn nary(&self, f: &mut fmt::Formatter<'_>, op: &str, items: &[&Formula]) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in items.iter().enumerate() {
            if i > 0 {
                write!(f, " {op} ")?;
            }
            self.write(f, c)?;
        }
        write!(f, ")")
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, p: &Formula) -> fmt::Result {
        match p {
            Formula::Eq(a, b) => {
                write!(f, "(")?;
                self.expr(f, a)?;
                write!(f, " == ")?;
                self.expr(f, b)?;
                write!(f, ")")
            }
            Formula::Init(x, e) => {
                write!(f, "init({}, ", self.sig.name(*x))?;
                self.expr(f, e)?;
                write!(f, ")")
            }
            Formula::And(cs) if cs.is_empty() => write!(f, "tt"),
            Formula::And(cs) => {
                let items: Vec<&Formula> = cs.iter().map(|c| &*c.formula).collect();
                self.nary(f, "&&", &items)
            }
            Formula::Or(fs) if fs.is_empty() => write!(f, "ff"),
            Formula::Or(fs) => {
                let items: Vec<&Formula> = fs.iter().map(|c| &**c).collect();
                self.nary(f, "||", &items)
            }
            Formula::True => write!(f, "tt"),
            Formula::False => write!(f, "ff"),
            Formula::Not(a) => self.prefix(f, "!", a),
            Formula::K(a) => self.prefix(f, "K ", a),
            Formula::L(a) => self.prefix(f, "L ", a),
            Formula::F(a) => self.prefix(f, "F ", a),
            Formula::G(a) => self.prefix(f, "G ", a),
            Formula::Until(a, b) => self.nary(f, "U", &[a, b]),
            Formula::WeakUntil(a, b) => self.nary(f, "W", &[a, b]),
            Formula::Implies(a, b) => self.nary(f, "->", &[a, b]),
            Formula::Forall(v, a) => {
                write!(f, "(forall {v} . ")?;
                self.write(f, a)?;
                write!(f, ")")
            }
            Formula::Exists(v, a) => {
                write!(f, "(exists {v} . ")?;
                self.write(f, a)?;
                write!(f, ")")
            }
        }
    }

    fn prefix(&self, f: &mut fmt::Formatter<'_>, op: &str, a: &Formula) -> fmt::Result {
        write!(f, "{op}")?;
        self.write(f, a)
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.formula)
    }
}
