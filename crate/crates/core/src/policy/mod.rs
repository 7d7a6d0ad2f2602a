//! Security conditions as epistemic formulas: the every-secret-possible
//! formulas and the five absence-of-knowledge conditions.

mod encode;
mod espm;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lang::{eval, BinOp, Domain, Expr, IdentKind, Signature, Slot, Store, Value};
use crate::logic::Formula;

pub use encode::{encode_aak, encode_ak, encode_akd, encode_akr, encode_aktd, AakOptions};
pub use espm::{esp, espm, espm_atom_count, MAX_ESPM_ATOMS};

/// Largest release spec or temporal declassification set accepted.
pub const MAX_POWERSET_BASE: usize = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("`{0}` is a release flag, not a program variable")]
    FlagNotAllowed(String),
    #[error("`{0}` is not a release flag of the program")]
    NotAFlag(String),
    #[error("identifier `{0}` listed twice")]
    Duplicate(String),
    #[error("predicate mentions `{0}`, which is outside the quantified identifiers")]
    OutOfScope(String),
    #[error("{what} has {got} entries; at most {MAX_POWERSET_BASE} are supported")]
    TooMany { what: &'static str, got: usize },
    #[error("encoding needs {atoms} knowledge atoms (limit {limit})")]
    Budget { atoms: u128, limit: u128 },
    #[error("condition `{0}` is not a state formula")]
    NotStateFormula(String),
}

/// Split of the program variables into observable and secret ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSpec {
    sig: Signature,
    low: Vec<Slot>,
    high: Vec<Slot>,
}

impl FlowSpec {
    /// `low` names the observable variables; every other variable is high.
    pub fn new<S: AsRef<str>>(sig: &Signature, low: &[S]) -> Result<Self, PolicyError> {
        let mut slots = Vec::new();
        for name in low {
            let name = name.as_ref();
            let s = sig
                .slot(name)
                .ok_or_else(|| PolicyError::UnknownIdentifier(name.to_string()))?;
            if sig.kind(s) == IdentKind::Flag {
                return Err(PolicyError::FlagNotAllowed(name.to_string()));
            }
            if slots.contains(&s) {
                return Err(PolicyError::Duplicate(name.to_string()));
            }
            slots.push(s);
        }
        Ok(Self::from_slots(sig, slots))
    }

    /// Low slots as given; high is the complement in signature order.
    pub fn from_slots(sig: &Signature, low: Vec<Slot>) -> Self {
        let high = sig
            .vars()
            .into_iter()
            .filter(|s| !low.contains(s))
            .collect();
        Self {
            sig: sig.clone(),
            low,
            high,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn low(&self) -> &[Slot] {
        &self.low
    }

    pub fn high(&self) -> &[Slot] {
        &self.high
    }

    pub fn low_names(&self) -> Vec<String> {
        self.low
            .iter()
            .map(|&s| self.sig.name(s).to_string())
            .collect()
    }

    pub fn high_names(&self) -> Vec<String> {
        self.high
            .iter()
            .map(|&s| self.sig.name(s).to_string())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Abstraction {
    Id,
    /// -1, 0 or 1.
    Sign,
    /// Remainder modulo 2.
    Par,
}

impl Abstraction {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Id" => Some(Abstraction::Id),
            "Sign" => Some(Abstraction::Sign),
            "Par" => Some(Abstraction::Par),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Abstraction::Id => "Id",
            Abstraction::Sign => "Sign",
            Abstraction::Par => "Par",
        }
    }

    /// The abstraction of `x` as an expression of the language.
    pub fn apply(self, x: Slot) -> Expr {
        let v = || Expr::Var(x);
        match self {
            Abstraction::Id => v(),
            Abstraction::Sign => Expr::bin(
                BinOp::Sub,
                Expr::bin(BinOp::Lt, Expr::int(0), v()),
                Expr::bin(BinOp::Lt, v(), Expr::int(0)),
            ),
            Abstraction::Par => Expr::bin(BinOp::Mod, v(), Expr::int(2)),
        }
    }
}

/// A function of the initial store, used to say which property of the
/// secrets may be disclosed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum InitPredicate {
    Expr(Expr),
    Apply(Abstraction, Slot),
}

impl InitPredicate {
    pub fn expr(&self) -> Expr {
        match self {
            InitPredicate::Expr(e) => e.clone(),
            InitPredicate::Apply(a, x) => a.apply(*x),
        }
    }

    pub fn slots(&self) -> Vec<Slot> {
        match self {
            InitPredicate::Expr(e) => e.slots(),
            InitPredicate::Apply(_, x) => vec![*x],
        }
    }

    pub fn eval(&self, initial: &Store, dom: &Domain) -> Value {
        match self {
            InitPredicate::Expr(e) => eval(initial, e, dom),
            InitPredicate::Apply(a, x) => eval(initial, &a.apply(*x), dom),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        PredicateDisplay { p: self, sig }
    }
}

struct PredicateDisplay<'a> {
    p: &'a InitPredicate,
    sig: &'a Signature,
}

impl fmt::Display for PredicateDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.p {
            InitPredicate::Expr(e) => write!(f, "{}", e.display(self.sig)),
            InitPredicate::Apply(a, x) => write!(f, "{}({})", a.name(), self.sig.name(*x)),
        }
    }
}

/// An abstraction as written in a policy: a named one applied to each
/// identifier of a group, or a single expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Abstractor {
    Named(Abstraction),
    Expr(Expr),
}

impl Abstractor {
    /// Identity on every identifier.
    pub fn id() -> Self {
        Abstractor::Named(Abstraction::Id)
    }

    pub fn predicates(&self, slots: &[Slot]) -> Vec<InitPredicate> {
        match self {
            Abstractor::Named(a) => slots.iter().map(|&s| InitPredicate::Apply(*a, s)).collect(),
            Abstractor::Expr(e) => vec![InitPredicate::Expr(e.clone())],
        }
    }

    /// Expressions observed for the result identifiers `slots`.
    pub fn outputs(&self, slots: &[Slot]) -> Vec<Expr> {
        match self {
            Abstractor::Named(a) => slots.iter().map(|&s| a.apply(s)).collect(),
            Abstractor::Expr(e) => vec![e.clone()],
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> String {
        match self {
            Abstractor::Named(a) => a.name().to_string(),
            Abstractor::Expr(e) => e.display(sig).to_string(),
        }
    }
}

/// A release flag paired with the expression whose initial value it
/// discloses once set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Release {
    pub flag: String,
    /// `None` when the program never mentions the flag; it then stays unset.
    pub slot: Option<Slot>,
    pub expr: Expr,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReleaseSpec {
    pub releases: Vec<Release>,
}

impl ReleaseSpec {
    pub fn new(sig: &Signature, entries: Vec<(String, Expr)>) -> Result<Self, PolicyError> {
        let mut releases: Vec<Release> = Vec::new();
        for (flag, expr) in entries {
            if releases.iter().any(|r| r.flag == flag) {
                return Err(PolicyError::Duplicate(flag));
            }
            let slot = match sig.slot(&flag) {
                Some(s) if sig.kind(s) == IdentKind::Flag => Some(s),
                Some(_) => return Err(PolicyError::NotAFlag(flag)),
                None => None,
            };
            releases.push(Release { flag, slot, expr });
        }
        if releases.len() > MAX_POWERSET_BASE {
            return Err(PolicyError::TooMany {
                what: "release spec",
                got: releases.len(),
            });
        }
        Ok(Self { releases })
    }

    pub fn is_empty(&self) -> bool {
        self.releases.is_empty()
    }

    pub fn len(&self) -> usize {
        self.releases.len()
    }
}

/// A disclosure `(condition, property)`: once the state condition has held,
/// the property's initial value may be known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalDeclassification {
    pub condition: Arc<Formula>,
    pub property: InitPredicate,
}

impl TemporalDeclassification {
    pub fn new(condition: Arc<Formula>, property: InitPredicate) -> Result<Self, PolicyError> {
        if !condition.is_state_formula() {
            return Err(PolicyError::NotStateFormula(format!("{condition:?}")));
        }
        Ok(Self {
            condition,
            property,
        })
    }

    /// Whether the condition holds in `store`.
    pub fn triggered(&self, store: &Store, dom: &Domain) -> bool {
        state_holds(&self.condition, store, dom)
    }
}

/// Evaluates a state formula directly in one store.
pub fn state_holds(f: &Formula, s: &Store, dom: &Domain) -> bool {
    match f {
        Formula::Eq(a, b) => eval(s, a, dom) == eval(s, b, dom),
        Formula::True => true,
        Formula::False => false,
        Formula::And(cs) => cs.iter().all(|c| state_holds(&c.formula, s, dom)),
        Formula::Or(fs) => fs.iter().any(|c| state_holds(c, s, dom)),
        Formula::Not(a) => !state_holds(a, s, dom),
        Formula::Implies(a, b) => !state_holds(a, s, dom) || state_holds(b, s, dom),
        _ => panic!("not a state formula"),
    }
}

/// `Sign` as used by the named abstraction, for tests and reports.
pub fn sign(v: Value) -> Value {
    Value(v.0.signum())
}
