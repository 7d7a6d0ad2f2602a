use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::value::{Domain, Value};

/// Index of an identifier in a program's store signature.
pub type Slot = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentKind {
    Var,
    /// Write-once boolean set by `release`.
    Flag,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ident {
    pub name: String,
    pub kind: IdentKind,
}

/// Ordered list of identifiers; slot `i` of every store holds identifier `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    idents: Vec<Ident>,
}

impl Signature {
    pub fn new(idents: Vec<Ident>) -> Self {
        Self { idents }
    }

    pub fn len(&self) -> usize {
        self.idents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idents.is_empty()
    }

    pub fn idents(&self) -> &[Ident] {
        &self.idents
    }

    pub fn name(&self, slot: Slot) -> &str {
        &self.idents[slot].name
    }

    pub fn kind(&self, slot: Slot) -> IdentKind {
        self.idents[slot].kind
    }

    pub fn slot(&self, name: &str) -> Option<Slot> {
        self.idents.iter().position(|i| i.name == name)
    }

    /// Slots of ordinary program variables, in signature order.
    pub fn vars(&self) -> Vec<Slot> {
        self.slots_of(IdentKind::Var)
    }

    pub fn flags(&self) -> Vec<Slot> {
        self.slots_of(IdentKind::Flag)
    }

    fn slots_of(&self, kind: IdentKind) -> Vec<Slot> {
        (0..self.idents.len())
            .filter(|&s| self.idents[s].kind == kind)
            .collect()
    }

    pub(crate) fn push(&mut self, name: &str, kind: IdentKind) -> Slot {
        self.idents.push(Ident {
            name: name.to_string(),
            kind,
        });
        self.idents.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Eq,
    Ne,
    Lt,
    Le,
    Ge,
    Gt,
    Add,
    Sub,
    Mul,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Mod => "mod",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Ge | BinOp::Gt => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Mod => 5,
        }
    }

    pub fn is_boolean(self) -> bool {
        self.precedence() <= 3
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Value),
    Var(Slot),
    /// A quantifier-bound name inside a formula; gone after expansion.
    Bound(Arc<str>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Hash(Box<Expr>),
}

impl Expr {
    pub fn var(slot: Slot) -> Self {
        Expr::Var(slot)
    }

    pub fn int(v: i64) -> Self {
        Expr::Const(Value(v))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn un(op: UnOp, a: Expr) -> Self {
        Expr::Unary(op, Box::new(a))
    }

    /// Visits every program slot mentioned by the expression.
    pub fn for_each_slot(&self, f: &mut impl FnMut(Slot)) {
        match self {
            Expr::Var(s) => f(*s),
            Expr::Const(_) | Expr::Bound(_) => {}
            Expr::Unary(_, a) | Expr::Hash(a) => a.for_each_slot(f),
            Expr::Binary(_, a, b) => {
                a.for_each_slot(f);
                b.for_each_slot(f);
            }
        }
    }

    pub fn slots(&self) -> Vec<Slot> {
        let mut out = Vec::new();
        self.for_each_slot(&mut |s| {
            if !out.contains(&s) {
                out.push(s)
            }
        });
        out
    }

    pub fn has_bound(&self) -> bool {
        match self {
            Expr::Bound(_) => true,
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Unary(_, a) | Expr::Hash(a) => a.has_bound(),
            Expr::Binary(_, a, b) => a.has_bound() || b.has_bound(),
        }
    }

    /// Replaces the bound name `name` by the constant `v`.
    pub fn substitute(&self, name: &str, v: Value) -> Expr {
        match self {
            Expr::Bound(n) if &**n == name => Expr::Const(v),
            Expr::Const(_) | Expr::Var(_) | Expr::Bound(_) => self.clone(),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(a.substitute(name, v))),
            Expr::Hash(a) => Expr::Hash(Box::new(a.substitute(name, v))),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.substitute(name, v)),
                Box::new(b.substitute(name, v)),
            ),
        }
    }

    pub fn as_const(&self) -> Option<Value> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: self,
            sig,
            domain: None,
        }
    }

    pub fn display_in<'a>(&'a self, sig: &'a Signature, domain: &'a Domain) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: self,
            sig,
            domain: Some(domain),
        }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    sig: &'a Signature,
    domain: Option<&'a Domain>,
}

impl ExprDisplay<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, e: &Expr, ctx: u8) -> fmt::Result {
        match e {
            Expr::Const(v) => match self.domain {
                Some(d) => write!(f, "{}", d.fmt_value(*v)),
                None if v.0 < 0 => write!(f, "(-{})", -v.0),
                None => write!(f, "{}", v.0),
            },
            Expr::Var(s) => write!(f, "{}", self.sig.name(*s)),
            Expr::Bound(n) => write!(f, "{n}"),
            Expr::Hash(a) => {
                write!(f, "hash(")?;
                self.write(f, a, 0)?;
                write!(f, ")")
            }
            Expr::Unary(op, a) => {
                write!(f, "{}", if *op == UnOp::Not { "!" } else { "-" })?;
                self.write(f, a, 6)
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                let paren = p < ctx;
                if paren {
                    write!(f, "(")?;
                }
                self.write(f, a, p)?;
                write!(f, " {} ", op.symbol())?;
                self.write(f, b, p + 1)?;
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.expr, 0)
    }
}

/// Argument of an `out` statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OutArg {
    Expr(Expr),
    /// A string literal such as `out "ok"`; observed as a distinguished event.
    Label(Arc<str>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Skip,
    Out(OutArg),
    Assign(Slot, Expr),
    Seq(Arc<Stmt>, Arc<Stmt>),
    If(Expr, Arc<Stmt>, Arc<Stmt>),
    While(Expr, Arc<Stmt>),
    Release(Slot),
}

impl Stmt {
    pub fn seq(a: Stmt, b: Stmt) -> Stmt {
        Stmt::Seq(Arc::new(a), Arc::new(b))
    }

    /// Right-nested sequence of `stmts`; `skip` when empty.
    pub fn seq_all(stmts: Vec<Stmt>) -> Stmt {
        let mut it = stmts.into_iter().rev();
        let Some(last) = it.next() else {
            return Stmt::Skip;
        };
        it.fold(last, |acc, s| Stmt::seq(s, acc))
    }

    pub fn for_each(&self, f: &mut impl FnMut(&Stmt)) {
        f(self);
        match self {
            Stmt::Seq(a, b) | Stmt::If(_, a, b) => {
                a.for_each(f);
                b.for_each(f);
            }
            Stmt::While(_, a) => a.for_each(f),
            _ => {}
        }
    }

    pub fn has_output(&self) -> bool {
        let mut found = false;
        self.for_each(&mut |s| found |= matches!(s, Stmt::Out(_)));
        found
    }

    pub fn has_loop(&self) -> bool {
        let mut found = false;
        self.for_each(&mut |s| found |= matches!(s, Stmt::While(..)));
        found
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, sig: &Signature) -> fmt::Result {
        match self {
            Stmt::Skip => write!(f, "skip"),
            Stmt::Out(OutArg::Expr(e)) => write!(f, "out {}", e.display(sig)),
            Stmt::Out(OutArg::Label(l)) => write!(f, "out \"{l}\""),
            Stmt::Assign(x, e) => write!(f, "{} := {}", sig.name(*x), e.display(sig)),
            Stmt::Seq(a, b) => {
                a.write(f, sig)?;
                write!(f, "; ")?;
                b.write(f, sig)
            }
            Stmt::If(e, a, b) => {
                write!(f, "if {} then {{ ", e.display(sig))?;
                a.write(f, sig)?;
                write!(f, " }} else {{ ")?;
                b.write(f, sig)?;
                write!(f, " }}")
            }
            Stmt::While(e, a) => {
                write!(f, "while {} do {{ ", e.display(sig))?;
                a.write(f, sig)?;
                write!(f, " }}")
            }
            Stmt::Release(r) => write!(f, "release {}", sig.name(*r)),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> StmtDisplay<'a> {
        StmtDisplay { stmt: self, sig }
    }
}

pub struct StmtDisplay<'a> {
    stmt: &'a Stmt,
    sig: &'a Signature,
}

impl fmt::Display for StmtDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.stmt.write(f, self.sig)
    }
}

/// A parsed program: statement tree plus its store signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub body: Arc<Stmt>,
    pub signature: Signature,
}

impl Program {
    pub fn new(body: Stmt, signature: Signature) -> Self {
        Self {
            body: Arc::new(body),
            signature,
        }
    }

    /// `self; extra`, sharing the signature.
    pub fn then(&self, extra: Stmt) -> Program {
        Program {
            body: Arc::new(Stmt::Seq(self.body.clone(), Arc::new(extra))),
            signature: self.signature.clone(),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.body.write(f, &self.signature)
    }
}

/// Total map from the signature's slots to values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Store(pub Vec<Value>);

impl Store {
    pub fn get(&self, slot: Slot) -> Value {
        self.0[slot]
    }

    pub fn set(&mut self, slot: Slot, v: Value) {
        self.0[slot] = v;
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    /// `σ1 ≈_slots σ2`.
    pub fn agrees_on(&self, other: &Store, slots: &[Slot]) -> bool {
        slots.iter().all(|&s| self.0[s] == other.0[s])
    }

    pub fn display<'a>(&'a self, sig: &'a Signature, domain: &'a Domain) -> StoreDisplay<'a> {
        StoreDisplay {
            store: self,
            sig,
            domain,
        }
    }
}

pub struct StoreDisplay<'a> {
    store: &'a Store,
    sig: &'a Signature,
    domain: &'a Domain,
}

impl fmt::Display for StoreDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.store.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={}", self.sig.name(i), self.domain.fmt_value(*v))?;
        }
        write!(f, "}}")
    }
}

/// An observable action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Event {
    Out(Value),
    Label(Arc<str>),
    /// Dummy output appended at termination when termination is observable.
    Done,
}

impl Event {
    pub fn render(&self, domain: &Domain) -> String {
        match self {
            Event::Out(v) => domain.fmt_value(*v),
            Event::Label(l) => format!("\"{l}\""),
            Event::Done => "$done".to_string(),
        }
    }
}

pub fn render_trace(trace: &[Event], domain: &Domain) -> String {
    let inner: Vec<String> = trace.iter().map(|e| e.render(domain)).collect();
    format!("<{}>", inner.join(", "))
}
