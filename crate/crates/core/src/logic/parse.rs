use std::sync::Arc;

use super::formula::Formula;
use crate::lang::lexer::{ParseError, Tok};
use crate::lang::parse::{Cursor, FixedNames};
use crate::lang::{BinOp, Expr, Signature, Value};

const OPERATORS: &[&str] = &["K", "L", "F", "G", "U", "W"];

/// Parses a formula over the identifiers of `sig` (release flags included).
///
/// Atoms are `e1 == e2`, `init(x, e)`, `tt`, `ff`, or any other expression
/// `e`, read as `e != 0`.
pub fn parse_formula(src: &str, sig: &Signature) -> Result<Arc<Formula>, ParseError> {
    let mut cur = Cursor::new(src)?;
    let f = FormulaParser { sig }.implies(&mut cur)?;
    cur.expect_eof()?;
    Ok(f)
}

/// Parses a formula and rejects anything but `Eq` atoms and boolean
/// connectives.
pub fn parse_state_formula(src: &str, sig: &Signature) -> Result<Arc<Formula>, ParseError> {
    let f = parse_formula(src, sig)?;
    if !f.is_state_formula() {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: format!("`{}` is not a state formula", src.trim()),
        });
    }
    Ok(f)
}

struct FormulaParser<'a> {
    sig: &'a Signature,
}

impl FormulaParser<'_> {
    fn names(&self) -> FixedNames<'_> {
        FixedNames {
            sig: self.sig,
            allow_flags: true,
        }
    }

    fn implies(&self, cur: &mut Cursor) -> Result<Arc<Formula>, ParseError> {
        let lhs = self.or(cur)?;
        if cur.eat_sym("->") {
            let rhs = self.implies(cur)?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&self, cur: &mut Cursor) -> Result<Arc<Formula>, ParseError> {
        let mut items = vec![self.and(cur)?];
        while cur.eat_sym("||") {
            items.push(self.and(cur)?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::or(items)
        })
    }

    fn and(&self, cur: &mut Cursor) -> Result<Arc<Formula>, ParseError> {
        let mut items = vec![self.until(cur)?];
        while cur.eat_sym("&&") {
            items.push(self.until(cur)?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::and(items)
        })
    }

    fn until(&self, cur: &mut Cursor) -> Result<Arc<Formula>, ParseError> {
        let lhs = self.unary(cur)?;
        if cur.eat_kw("U") {
            return Ok(Formula::until(lhs, self.until(cur)?));
        }
        if cur.eat_kw("W") {
            return Ok(Formula::weak_until(lhs, self.until(cur)?));
        }
        Ok(lhs)
    }

    fn unary(&self, cur: &mut Cursor) -> Result<Arc<Formula>, ParseError> {
        if cur.eat_sym("!") {
            return Ok(Formula::not(self.unary(cur)?));
        }
        for (kw, build) in [
            ("K", Formula::k as fn(Arc<Formula>) -> Arc<Formula>),
            ("L", Formula::l),
            ("F", Formula::f),
            ("G", Formula::g),
        ] {
            if cur.eat_kw(kw) {
                return Ok(build(self.unary(cur)?));
            }
        }
        for (kw, universal) in [("forall", true), ("exists", false)] {
            if cur.is_kw(kw) {
                cur.advance();
                return self.quantifier(cur, universal);
            }
        }
        self.primary(cur)
    }

    fn quantifier(&self, cur: &mut Cursor, universal: bool) -> Result<Arc<Formula>, ParseError> {
        let pos = cur.pos();
        let (name, _) = cur.expect_ident()?;
        if OPERATORS.contains(&name.as_str()) {
            return Err(ParseError::at(
                pos,
                format!("`{name}` is a reserved operator"),
            ));
        }
        if cur.bound.contains(&name) {
            return Err(ParseError::at(
                pos,
                format!("quantifier variable `{name}` shadows an enclosing one"),
            ));
        }
        if self.sig.slot(&name).is_some() {
            return Err(ParseError::at(
                pos,
                format!("quantifier variable `{name}` clashes with a program identifier"),
            ));
        }
        cur.expect_sym(".")?;
        cur.bound.push(name.clone());
        let body = self.implies(cur);
        cur.bound.pop();
        let body = body?;
        Ok(if universal {
            Formula::forall(&name, body)
        } else {
            Formula::exists(&name, body)
        })
    }

    fn primary(&self, cur: &mut Cursor) -> Result<Arc<Formula>, ParseError> {
        if cur.is_sym("(") {
            let mark = cur.mark();
            cur.advance();
            if let Ok(f) = self.implies(cur) {
                if cur.eat_sym(")") && !cur.at_binop(3) {
                    return Ok(f);
                }
            }
            // `(x + 1) == y` and friends: reparse as an expression atom.
            cur.reset(mark);
            return self.atom(cur);
        }
        if cur.is_kw("init") && cur.peek_at(1) == &Tok::Sym("(") {
            cur.advance();
            cur.advance();
            let pos = cur.pos();
            let (name, _) = cur.expect_ident()?;
            let slot = self
                .sig
                .slot(&name)
                .ok_or_else(|| ParseError::at(pos, format!("unknown identifier `{name}`")))?;
            cur.expect_sym(",")?;
            let e = cur.parse_expr(&mut self.names())?;
            cur.expect_sym(")")?;
            return Ok(Arc::new(Formula::Init(slot, e)));
        }
        if let Tok::Ident(k) = cur.peek() {
            if OPERATORS.contains(&k.as_str()) {
                return Err(cur.unexpected("a formula"));
            }
        }
        self.atom(cur)
    }

    fn atom(&self, cur: &mut Cursor) -> Result<Arc<Formula>, ParseError> {
        let e = cur.parse_binary(&mut self.names(), 3)?;
        Ok(match e {
            Expr::Binary(BinOp::Eq, a, b) => Arc::new(Formula::Eq(*a, *b)),
            Expr::Const(Value::TRUE) => Formula::tt(),
            Expr::Const(Value::FALSE) => Formula::ff(),
            other => Formula::not(Arc::new(Formula::Eq(other, Expr::Const(Value::FALSE)))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn sig() -> Signature {
        parse_program("x := y; out h").unwrap().signature
    }

    #[test]
    fn connectives_and_precedence() {
        let s = sig();
        let f = parse_formula("G (init(x, 1) -> K x == y || !h)", &s).unwrap();
        let Formula::G(body) = &*f else { panic!() };
        let Formula::Implies(a, b) = &**body else {
            panic!()
        };
        assert_eq!(**a, Formula::Init(0, Expr::int(1)));
        let Formula::Or(items) = &**b else { panic!() };
        assert!(matches!(*items[0], Formula::K(_)));
        assert!(matches!(*items[1], Formula::Not(_)));
    }

    #[test]
    fn parenthesised_expression_atom() {
        let s = sig();
        let f = parse_formula("(x + 1) == y", &s).unwrap();
        assert!(matches!(
            *f,
            Formula::Eq(Expr::Binary(BinOp::Add, ..), Expr::Var(1))
        ));
        let f = parse_formula("(x == y) && tt", &s).unwrap();
        assert!(matches!(*f, Formula::And(_)));
    }

    #[test]
    fn quantifiers() {
        let s = sig();
        let f = parse_formula("forall v . exists w . init(x, v) U x == w", &s).unwrap();
        let Formula::Forall(v, body) = &*f else {
            panic!()
        };
        assert_eq!(&**v, "v");
        assert!(matches!(**body, Formula::Exists(..)));
        assert!(parse_formula("forall v . forall v . x == v", &s).is_err());
        assert!(parse_formula("forall x . x == 1", &s).is_err());
        assert!(parse_formula("x == v", &s).is_err());
    }

    #[test]
    fn bare_expression_atom() {
        let s = sig();
        let f = parse_formula("x >= 0", &s).unwrap();
        let Formula::Not(inner) = &*f else { panic!() };
        assert!(matches!(
            **inner,
            Formula::Eq(Expr::Binary(BinOp::Ge, ..), _)
        ));
    }

    #[test]
    fn display_reparses() {
        let s = sig();
        for src in [
            "G (forall v . (init(x, v) -> L (init(x, v) && init(y, 1))))",
            "(x == 1) W !(h == 0)",
            "exists a . F K (h == a)",
        ] {
            let f = parse_formula(src, &s).unwrap();
            let again = parse_formula(&f.display(&s).to_string(), &s).unwrap();
            assert_eq!(f, again, "{src}");
        }
    }

    #[test]
    fn state_formula_check() {
        let s = sig();
        assert!(parse_state_formula("x == 1 && !(y == h)", &s).is_ok());
        assert!(parse_state_formula("K x == 1", &s).is_err());
        assert!(parse_state_formula("init(x, 1)", &s).is_err());
    }
}
