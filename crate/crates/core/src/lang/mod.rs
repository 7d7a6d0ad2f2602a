//! The while-language with synchronous output: syntax, expression evaluation
//! and small-step semantics.

pub mod ast;
pub mod lexer;
pub mod parse;
pub mod semantics;
pub mod value;

pub use ast::{
    render_trace, BinOp, Event, Expr, Ident, IdentKind, OutArg, Program, Signature, Slot, Stmt,
    Store, UnOp,
};
pub use lexer::ParseError;
pub use parse::{parse_expr_in, parse_program};
pub use semantics::{check_domain, eval, step, DomainCheckError, Step};
pub use value::{Domain, DomainError, DomainKind, Value};
