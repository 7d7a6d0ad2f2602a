//! Finite value domains.
//!
//! Every value the interpreter manipulates lives in a finite, totally ordered
//! domain: either the booleans (`ff < tt`, stored as 0 and 1) or a window of
//! `n` consecutive integers with wrap-around arithmetic. The unsigned window is
//! `{0..n-1}`; the signed window is `[-n/2, n - n/2)`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A domain element, stored as its canonical representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Value(pub i64);

impl Value {
    pub const FALSE: Value = Value(0);
    pub const TRUE: Value = Value(1);
}

/// Largest supported domain size; keeps every product of two values inside `i64`.
pub const MAX_DOMAIN_SIZE: u32 = 1 << 16;

/// Multiplier used by the default `hash` table.
pub const DEFAULT_HASH_MULTIPLIER: i64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainKind {
    Bool,
    Int { size: u32, signed: bool },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("domain size must be between 2 and {MAX_DOMAIN_SIZE}, got {0}")]
    BadSize(u64),
    #[error("unrecognised domain `{0}` (expected `bool` or `int:N`)")]
    BadSpec(String),
    #[error("hash table has {got} entries but the domain has {expected} values")]
    HashTableLength { expected: usize, got: usize },
}

/// A finite value domain together with the table backing the `hash` builtin.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Domain {
    kind: DomainKind,
    lo: i64,
    size: i64,
    hash: Vec<Value>,
}

impl Domain {
    pub fn bool() -> Self {
        Self::build(DomainKind::Bool).expect("boolean domain is always valid")
    }

    /// Unsigned integers `{0..size-1}` with modular arithmetic.
    pub fn int(size: u32) -> Result<Self, DomainError> {
        Self::build(DomainKind::Int {
            size,
            signed: false,
        })
    }

    /// Integers in the signed window `[-size/2, size - size/2)`.
    pub fn int_signed(size: u32) -> Result<Self, DomainError> {
        Self::build(DomainKind::Int { size, signed: true })
    }

    pub fn from_kind(kind: DomainKind) -> Result<Self, DomainError> {
        Self::build(kind)
    }

    /// Parses `bool` or `int:N`; `signed` selects the signed window for integers.
    pub fn parse_spec(spec: &str, signed: bool) -> Result<Self, DomainError> {
        let spec = spec.trim();
        if spec.eq_ignore_ascii_case("bool") {
            return Ok(Self::bool());
        }
        let n = spec
            .strip_prefix("int:")
            .and_then(|n| n.trim().parse::<u64>().ok())
            .ok_or_else(|| DomainError::BadSpec(spec.to_string()))?;
        let n = u32::try_from(n).map_err(|_| DomainError::BadSize(n))?;
        if signed {
            Self::int_signed(n)
        } else {
            Self::int(n)
        }
    }

    fn build(kind: DomainKind) -> Result<Self, DomainError> {
        let (lo, size) = match kind {
            DomainKind::Bool => (0, 2),
            DomainKind::Int { size, signed } => {
                if !(2..=MAX_DOMAIN_SIZE).contains(&size) {
                    return Err(DomainError::BadSize(size as u64));
                }
                let size = size as i64;
                (if signed { -(size / 2) } else { 0 }, size)
            }
        };
        let mut dom = Domain {
            kind,
            lo,
            size,
            hash: Vec::new(),
        };
        dom.hash = dom
            .values()
            .map(|v| dom.wrap(v.0.wrapping_mul(DEFAULT_HASH_MULTIPLIER)))
            .collect();
        Ok(dom)
    }

    /// Replaces the `hash` table. Entry `i` is the image of the `i`-th value in
    /// domain order; entries are wrapped into the domain.
    pub fn with_hash_table(mut self, table: &[i64]) -> Result<Self, DomainError> {
        if table.len() != self.size as usize {
            return Err(DomainError::HashTableLength {
                expected: self.size as usize,
                got: table.len(),
            });
        }
        self.hash = table.iter().map(|&t| self.wrap(t)).collect();
        Ok(self)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn is_bool(&self) -> bool {
        matches!(self.kind, DomainKind::Bool)
    }

    pub fn size(&self) -> usize {
        self.size as usize
    }

    pub fn min(&self) -> Value {
        Value(self.lo)
    }

    pub fn max(&self) -> Value {
        Value(self.lo + self.size - 1)
    }

    /// All values in ascending order.
    pub fn values(&self) -> impl DoubleEndedIterator<Item = Value> + ExactSizeIterator + Clone {
        let lo = self.lo;
        (0..self.size as usize).map(move |i| Value(lo + i as i64))
    }

    pub fn contains(&self, v: Value) -> bool {
        v.0 >= self.lo && v.0 < self.lo + self.size
    }

    /// Position of `v` in ascending domain order.
    pub fn index_of(&self, v: Value) -> usize {
        debug_assert!(self.contains(v));
        (v.0 - self.lo) as usize
    }

    /// Maps an arbitrary integer onto its representative in the domain.
    pub fn wrap(&self, x: i64) -> Value {
        Value((x - self.lo).rem_euclid(self.size) + self.lo)
    }

    pub fn is_true(&self, v: Value) -> bool {
        v.0 != 0
    }

    pub fn from_bool(&self, b: bool) -> Value {
        if b {
            Value::TRUE
        } else {
            Value::FALSE
        }
    }

    pub fn hash(&self, v: Value) -> Value {
        self.hash[self.index_of(v)]
    }

    pub fn hash_table(&self) -> &[Value] {
        &self.hash
    }

    pub fn fmt_value(&self, v: Value) -> String {
        if self.is_bool() {
            if self.is_true(v) { "tt" } else { "ff" }.to_string()
        } else {
            v.0.to_string()
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DomainKind::Bool => write!(f, "bool"),
            DomainKind::Int {
                size,
                signed: false,
            } => write!(f, "int:{size}"),
            DomainKind::Int { size, signed: true } => write!(f, "int:{size} (signed)"),
        }
    }
}
