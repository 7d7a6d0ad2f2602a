//! Recursive-descent parsing for programs and expressions.
//!
//! The token cursor and the expression grammar are shared with the formula
//! and policy parsers; identifier resolution is delegated to a [`Resolve`]
//! implementation so each caller decides which names exist.

use std::collections::HashSet;
use std::sync::Arc;

use super::ast::{BinOp, Expr, IdentKind, OutArg, Program, Signature, Stmt, UnOp};
use super::lexer::{tokenize, ParseError, Pos, Tok, Token};
use super::value::Value;

const KEYWORDS: &[&str] = &[
    "skip", "out", "if", "then", "else", "while", "do", "release", "mod", "hash",
];

pub(crate) trait Resolve {
    fn resolve(&mut self, name: &str, pos: Pos) -> Result<Expr, ParseError>;
}

/// Resolves names against a fixed signature (policies, formulas).
pub(crate) struct FixedNames<'a> {
    pub sig: &'a Signature,
    pub allow_flags: bool,
}

impl Resolve for FixedNames<'_> {
    fn resolve(&mut self, name: &str, pos: Pos) -> Result<Expr, ParseError> {
        match self.sig.slot(name) {
            Some(s) if self.allow_flags || self.sig.kind(s) == IdentKind::Var => Ok(Expr::Var(s)),
            Some(_) => Err(ParseError::at(
                pos,
                format!("release flag `{name}` cannot appear here"),
            )),
            None => Err(ParseError::at(pos, format!("unknown identifier `{name}`"))),
        }
    }
}

pub(crate) struct Cursor {
    toks: Vec<Token>,
    at: usize,
    /// Quantifier-bound names currently in scope, innermost last.
    pub bound: Vec<String>,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Self {
            toks: tokenize(src)?,
            at: 0,
            bound: Vec::new(),
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    pub fn mark(&self) -> usize {
        self.at
    }

    pub fn reset(&mut self, mark: usize) {
        self.at = mark;
    }

    pub fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == kw)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::at(self.pos(), msg)
    }

    pub fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Pos), ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.advance();
                Ok((name, pos))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    pub fn parse_expr(&mut self, names: &mut dyn Resolve) -> Result<Expr, ParseError> {
        self.parse_binary(names, 1)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Sym("||") => BinOp::Or,
            Tok::Sym("&&") => BinOp::And,
            Tok::Sym("==") | Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym("+") => BinOp::Add,
            Tok::Sym("-") => BinOp::Sub,
            Tok::Sym("*") => BinOp::Mul,
            Tok::Ident(k) if k == "mod" => BinOp::Mod,
            _ => return None,
        })
    }

    /// True when the next token is a binary operator binding at least as
    /// tightly as `min`.
    pub fn at_binop(&self, min: u8) -> bool {
        self.peek_binop().is_some_and(|op| op.precedence() >= min)
    }

    /// Precedence climbing; `min` = 3 parses comparisons and tighter only.
    pub fn parse_binary(&mut self, names: &mut dyn Resolve, min: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary(names)?;
        while let Some(op) = self.peek_binop() {
            let p = op.precedence();
            if p < min {
                break;
            }
            self.advance();
            let rhs = self.parse_binary(names, p + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self, names: &mut dyn Resolve) -> Result<Expr, ParseError> {
        if self.eat_sym("!") {
            return Ok(Expr::un(UnOp::Not, self.parse_unary(names)?));
        }
        if self.eat_sym("-") {
            return Ok(Expr::un(UnOp::Neg, self.parse_unary(names)?));
        }
        self.parse_primary(names)
    }

    fn parse_primary(&mut self, names: &mut dyn Resolve) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(Expr::Const(Value(n)))
            }
            Tok::Sym("(") => {
                self.advance();
                let e = self.parse_expr(names)?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "tt" | "true" => {
                    self.advance();
                    Ok(Expr::Const(Value::TRUE))
                }
                "ff" | "false" => {
                    self.advance();
                    Ok(Expr::Const(Value::FALSE))
                }
                "hash" => {
                    self.advance();
                    self.expect_sym("(")?;
                    let e = self.parse_expr(names)?;
                    self.expect_sym(")")?;
                    Ok(Expr::Hash(Box::new(e)))
                }
                kw if KEYWORDS.contains(&kw) => Err(self.unexpected("an expression")),
                _ => {
                    self.advance();
                    if self.bound.contains(&name) {
                        Ok(Expr::Bound(Arc::from(name.as_str())))
                    } else {
                        names.resolve(&name, pos)
                    }
                }
            },
            _ => Err(self.unexpected("an expression")),
        }
    }
}

/// Builds the store signature in first-occurrence order while parsing.
struct ProgramNames {
    sig: Signature,
    flags: HashSet<String>,
}

impl ProgramNames {
    fn slot(&mut self, name: &str, kind: IdentKind) -> usize {
        match self.sig.slot(name) {
            Some(s) => s,
            None => self.sig.push(name, kind),
        }
    }
}

impl Resolve for ProgramNames {
    fn resolve(&mut self, name: &str, pos: Pos) -> Result<Expr, ParseError> {
        if self.flags.contains(name) {
            return Err(ParseError::at(
                pos,
                format!("release flag `{name}` cannot be read by the program"),
            ));
        }
        Ok(Expr::Var(self.slot(name, IdentKind::Var)))
    }
}

/// Parses a program in the concrete `.wout` syntax.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut names = ProgramNames {
        sig: Signature::default(),
        flags: collect_flags(&cur.toks),
    };
    let body = parse_seq(&mut cur, &mut names)?;
    cur.expect_eof()?;
    Ok(Program::new(body, names.sig))
}

fn collect_flags(toks: &[Token]) -> HashSet<String> {
    toks.windows(2)
        .filter_map(|w| match (&w[0].tok, &w[1].tok) {
            (Tok::Ident(kw), Tok::Ident(name)) if kw == "release" => Some(name.clone()),
            _ => None,
        })
        .collect()
}

fn parse_seq(cur: &mut Cursor, names: &mut ProgramNames) -> Result<Stmt, ParseError> {
    let mut stmts = vec![parse_stmt(cur, names)?];
    while cur.eat_sym(";") {
        if cur.at_eof() || cur.is_sym("}") {
            break;
        }
        stmts.push(parse_stmt(cur, names)?);
    }
    Ok(Stmt::seq_all(stmts))
}

fn parse_branch(cur: &mut Cursor, names: &mut ProgramNames) -> Result<Stmt, ParseError> {
    if cur.eat_sym("{") {
        if cur.eat_sym("}") {
            return Ok(Stmt::Skip);
        }
        let body = parse_seq(cur, names)?;
        cur.expect_sym("}")?;
        Ok(body)
    } else {
        parse_stmt(cur, names)
    }
}

fn parse_stmt(cur: &mut Cursor, names: &mut ProgramNames) -> Result<Stmt, ParseError> {
    if cur.eat_kw("skip") {
        return Ok(Stmt::Skip);
    }
    if cur.eat_kw("out") {
        if let Tok::Str(s) = cur.peek().clone() {
            cur.advance();
            return Ok(Stmt::Out(OutArg::Label(Arc::from(s.as_str()))));
        }
        return Ok(Stmt::Out(OutArg::Expr(cur.parse_expr(names)?)));
    }
    if cur.eat_kw("release") {
        let (name, _) = cur.expect_ident()?;
        return Ok(Stmt::Release(names.slot(&name, IdentKind::Flag)));
    }
    if cur.eat_kw("if") {
        let guard = cur.parse_expr(names)?;
        cur.expect_kw("then")?;
        let a = parse_branch(cur, names)?;
        cur.expect_kw("else")?;
        let b = parse_branch(cur, names)?;
        return Ok(Stmt::If(guard, Arc::new(a), Arc::new(b)));
    }
    if cur.eat_kw("while") {
        let guard = cur.parse_expr(names)?;
        cur.expect_kw("do")?;
        let body = parse_branch(cur, names)?;
        return Ok(Stmt::While(guard, Arc::new(body)));
    }
    if matches!(cur.peek(), Tok::Ident(_)) && cur.peek_at(1) == &Tok::Sym(":=") {
        let (name, pos) = cur.expect_ident()?;
        if names.flags.contains(&name) {
            return Err(ParseError::at(
                pos,
                format!("release flag `{name}` can only be set with `release`"),
            ));
        }
        cur.advance();
        let slot = names.slot(&name, IdentKind::Var);
        let e = cur.parse_expr(names)?;
        return Ok(Stmt::Assign(slot, e));
    }
    Err(cur.unexpected("a statement"))
}

/// Parses a standalone expression over an existing signature.
pub fn parse_expr_in(src: &str, sig: &Signature) -> Result<Expr, ParseError> {
    let mut cur = Cursor::new(src)?;
    let e = cur.parse_expr(&mut FixedNames {
        sig,
        allow_flags: false,
    })?;
    cur.expect_eof()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig_names(p: &Program) -> Vec<&str> {
        p.signature
            .idents()
            .iter()
            .map(|i| i.name.as_str())
            .collect()
    }

    #[test]
    fn assign_then_output() {
        let p = parse_program("x:=y; out y").unwrap();
        assert_eq!(sig_names(&p), ["x", "y"]);
        assert_eq!(
            *p.body,
            Stmt::seq(
                Stmt::Assign(0, Expr::Var(1)),
                Stmt::Out(OutArg::Expr(Expr::Var(1)))
            )
        );
    }

    #[test]
    fn skip_has_empty_signature() {
        let p = parse_program("skip").unwrap();
        assert_eq!(*p.body, Stmt::Skip);
        assert!(p.signature.is_empty());
    }

    #[test]
    fn braceless_conditional() {
        let p = parse_program("if h=0 then out 1 else out 2").unwrap();
        assert_eq!(
            *p.body,
            Stmt::If(
                Expr::bin(BinOp::Eq, Expr::Var(0), Expr::int(0)),
                Arc::new(Stmt::Out(OutArg::Expr(Expr::int(1)))),
                Arc::new(Stmt::Out(OutArg::Expr(Expr::int(2))))
            )
        );
    }

    #[test]
    fn release_flags_are_declared_in_order() {
        let p = parse_program("l := h1; release r1; out l").unwrap();
        assert_eq!(sig_names(&p), ["l", "h1", "r1"]);
        assert_eq!(p.signature.flags(), vec![2]);
    }

    #[test]
    fn reading_a_flag_is_rejected() {
        let err = parse_program("out r; release r").unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
        assert!(parse_program("release r; r := 1").is_err());
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_program("x := 1;\nwhile x < 3 do { x := }").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.column, 23);
    }

    #[test]
    fn precedence() {
        let p = parse_program("out a + b * c == d && !e").unwrap();
        let Stmt::Out(OutArg::Expr(e)) = &*p.body else {
            panic!()
        };
        assert_eq!(e.display(&p.signature).to_string(), "a + b * c == d && !e");
    }

    #[test]
    fn display_reparses() {
        let src = "while (x < h) do { out x; x := x + 1 }; if x >= 2 then { out \"ok\" } else { release r }";
        let p = parse_program(src).unwrap();
        let again = parse_program(&p.to_string()).unwrap();
        assert_eq!(p, again);
    }
}
