use serde::{Deserialize, Serialize};

use crate::lang::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Holds,
    Fails,
    BoundExceeded,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Holds => "HOLDS",
            Outcome::Fails => "FAILS",
            Outcome::BoundExceeded => "BOUND_EXCEEDED",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Holds => 0,
            Outcome::Fails => 1,
            Outcome::BoundExceeded => 2,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a condition failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Failing execution (index into the model).
    pub execution: usize,
    /// Point index within that execution where the failure shows.
    pub point: usize,
    /// Quantifier choices on the way down to the failing subformula.
    pub bindings: Vec<(String, Value)>,
    /// Second execution for relational conditions.
    pub other_execution: Option<usize>,
}

impl Witness {
    pub fn at(execution: usize, point: usize) -> Self {
        Self {
            execution,
            point,
            bindings: Vec::new(),
            other_execution: None,
        }
    }

    pub fn binding(&self, name: &str) -> Option<Value> {
        self.bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub points_visited: u64,
    pub cache_hits: u64,
    /// Distinct nodes of the evaluated formula; 0 for semantic checks.
    pub formula_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    /// Every failing execution in ascending order; first one is `witness`.
    pub failing: Vec<usize>,
    pub stats: Stats,
}

impl Verdict {
    pub fn holds() -> Self {
        Self {
            outcome: Outcome::Holds,
            witness: None,
            failing: Vec::new(),
            stats: Stats::default(),
        }
    }

    pub fn bound_exceeded() -> Self {
        Self {
            outcome: Outcome::BoundExceeded,
            ..Self::holds()
        }
    }

    pub fn fails(witness: Witness, failing: Vec<usize>) -> Self {
        Self {
            outcome: Outcome::Fails,
            witness: Some(witness),
            failing,
            stats: Stats::default(),
        }
    }

    pub fn is_holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }
}
