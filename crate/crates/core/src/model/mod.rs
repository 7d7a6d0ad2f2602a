//! The execution model of a program: every maximal execution from every
//! initial store, plus the trace/epoch index that induces the observer's
//! accessibility relation.

mod build;
mod epoch;

use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::Domain;
use crate::lang::{render_trace, DomainCheckError, Event, Program, Slot, Store};

pub use build::build_model;
pub use epoch::TraceId;
use epoch::TraceTrie;

/// Default cap on transitions per execution.
pub const DEFAULT_BOUND: usize = 10_000;

/// Refuse to enumerate more initial stores than this.
pub const MAX_EXECUTIONS: usize = 1 << 22;

static NEXT_MODEL_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub bound: usize,
    /// Append a final `Done` event to each terminated execution.
    pub termination_output: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            bound: DEFAULT_BOUND,
            termination_output: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("step bound must be at least 1")]
    ZeroBound,
    #[error(transparent)]
    Domain(#[from] DomainCheckError),
    #[error("model would have {0} executions (limit {MAX_EXECUTIONS})")]
    TooLarge(u128),
    #[error("points belong to different models")]
    ForeignPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Terminated,
    BoundExceeded,
    /// The configuration at the last state already occurred at `loop_entry`.
    Lasso {
        loop_entry: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    /// Digest of the residual program.
    pub position: u64,
    pub store: Store,
}

#[derive(Debug, Clone)]
pub struct Execution {
    states: Vec<State>,
    events: Vec<Option<Event>>,
    status: Status,
}

impl Execution {
    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn initial(&self) -> &Store {
        &self.states[0].store
    }

    pub fn state(&self, i: usize) -> &State {
        &self.states[i]
    }

    pub fn store(&self, i: usize) -> &Store {
        &self.states[i].store
    }

    pub fn final_store(&self) -> &Store {
        &self.states[self.states.len() - 1].store
    }

    /// Event emitted by the transition from state `i` to `i + 1`.
    pub fn event(&self, i: usize) -> Option<&Event> {
        self.events[i].as_ref()
    }

    /// Events emitted strictly before point `i`.
    pub fn trace_upto(&self, i: usize) -> Vec<Event> {
        self.events[..i].iter().flatten().cloned().collect()
    }

    pub fn trace(&self) -> Vec<Event> {
        self.trace_upto(self.len())
    }
}

/// An execution point `(π, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    model: u64,
    pub execution: usize,
    pub index: usize,
}

pub struct Model {
    id: u64,
    program: Program,
    domain: Domain,
    config: ModelConfig,
    vars: Vec<Slot>,
    executions: Vec<Execution>,
    /// Global id of point `(π, 0)` for each execution.
    offsets: Vec<usize>,
    point_trace: Vec<TraceId>,
    traces: TraceTrie,
    epochs: Vec<Epoch>,
}

#[derive(Debug, Default, Clone)]
pub(crate) struct Epoch {
    pub points: Vec<usize>,
    /// Executions with at least one point in the epoch, ascending.
    pub executions: Vec<u32>,
}

impl Model {
    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Non-flag slots, the ones enumerated over by initial stores.
    pub fn vars(&self) -> &[Slot] {
        &self.vars
    }

    pub fn executions(&self) -> &[Execution] {
        &self.executions
    }

    pub fn execution(&self, i: usize) -> &Execution {
        &self.executions[i]
    }

    pub fn num_points(&self) -> usize {
        self.point_trace.len()
    }

    pub fn num_epochs(&self) -> usize {
        self.epochs.len()
    }

    /// True when some execution neither terminated nor can be trusted.
    pub fn is_tainted(&self) -> bool {
        self.executions
            .iter()
            .any(|e| e.status != Status::Terminated)
    }

    pub fn point(&self, execution: usize, index: usize) -> Point {
        assert!(
            index <= self.executions[execution].len(),
            "point out of range"
        );
        Point {
            model: self.id,
            execution,
            index,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.executions
            .iter()
            .enumerate()
            .flat_map(move |(x, e)| (0..=e.len()).map(move |i| self.point(x, i)))
    }

    pub(crate) fn point_id(&self, pt: Point) -> usize {
        self.offsets[pt.execution] + pt.index
    }

    pub(crate) fn point_from_id(&self, id: usize) -> Point {
        let execution = self.offsets.partition_point(|&o| o <= id) - 1;
        Point {
            model: self.id,
            execution,
            index: id - self.offsets[execution],
        }
    }

    pub(crate) fn offset(&self, execution: usize) -> usize {
        self.offsets[execution]
    }

    pub fn contains(&self, pt: Point) -> bool {
        pt.model == self.id
    }

    pub fn store_at(&self, pt: Point) -> &Store {
        self.executions[pt.execution].store(pt.index)
    }

    pub fn trace_id(&self, pt: Point) -> TraceId {
        self.point_trace[self.point_id(pt)]
    }

    pub(crate) fn trace_id_of(&self, point_id: usize) -> TraceId {
        self.point_trace[point_id]
    }

    pub fn trace_of(&self, pt: Point) -> Vec<Event> {
        self.traces.events(self.trace_id(pt))
    }

    pub fn trace_events(&self, id: TraceId) -> Vec<Event> {
        self.traces.events(id)
    }

    pub fn lookup_trace(&self, trace: &[Event]) -> Option<TraceId> {
        self.traces.lookup(trace)
    }

    /// `epoch(τ, M)`; empty when τ is never observed.
    pub fn epoch_of(&self, trace: &[Event]) -> Vec<Point> {
        match self.lookup_trace(trace) {
            Some(t) => self.epochs[t.index()]
                .points
                .iter()
                .map(|&p| self.point_from_id(p))
                .collect(),
            None => Vec::new(),
        }
    }

    pub(crate) fn epoch(&self, id: TraceId) -> &Epoch {
        &self.epochs[id.index()]
    }

    /// `p1 ∼ p2`: equal traces.
    pub fn accessible(&self, p1: Point, p2: Point) -> Result<bool, ModelError> {
        if !self.contains(p1) || !self.contains(p2) {
            return Err(ModelError::ForeignPoint);
        }
        Ok(self.trace_id(p1) == self.trace_id(p2))
    }

    /// Index of the execution whose initial store has these values on the
    /// non-flag slots (in slot order).
    pub fn execution_index(&self, var_values: &[crate::lang::Value]) -> Option<usize> {
        if var_values.len() != self.vars.len() {
            return None;
        }
        let n = self.domain.size();
        let mut idx = 0usize;
        for &v in var_values {
            if !self.domain.contains(v) {
                return None;
            }
            idx = idx * n + self.domain.index_of(v);
        }
        Some(idx)
    }

    pub fn execution_of_store(&self, initial: &Store) -> Option<usize> {
        let vals: Vec<_> = self.vars.iter().map(|&s| initial.get(s)).collect();
        let i = self.execution_index(&vals)?;
        (self.executions[i].initial() == initial).then_some(i)
    }

    /// Every observed trace with its epoch's point count, sorted by trace.
    pub fn epoch_table(&self) -> Vec<(Vec<Event>, usize)> {
        let mut rows: Vec<_> = (0..self.epochs.len())
            .map(|i| {
                (
                    self.traces.events(TraceId::from_index(i)),
                    self.epochs[i].points.len(),
                )
            })
            .collect();
        rows.sort();
        rows
    }

    pub fn render_store(&self, s: &Store) -> String {
        s.display(&self.program.signature, &self.domain).to_string()
    }

    /// Text dump: one line per execution, then the epoch table.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "program: {}", self.program);
        let _ = writeln!(
            out,
            "domain: {}; executions: {}; points: {}; epochs: {}; bound: {}{}",
            self.domain,
            self.executions.len(),
            self.num_points(),
            self.num_epochs(),
            self.config.bound,
            if self.config.termination_output {
                "; termination observable"
            } else {
                ""
            }
        );
        for (i, e) in self.executions.iter().enumerate() {
            let status = match e.status {
                Status::Terminated => "TERMINATED".to_string(),
                Status::BoundExceeded => "BOUND_EXCEEDED".to_string(),
                Status::Lasso { loop_entry } => format!("LASSO({loop_entry})"),
            };
            let _ = writeln!(
                out,
                "exec {i} {} {status} len={} trace={}",
                self.render_store(e.initial()),
                e.len(),
                render_trace(&e.trace(), &self.domain)
            );
        }
        let _ = writeln!(out, "epochs:");
        for (trace, n) in self.epoch_table() {
            let _ = writeln!(out, "  {} {n}", render_trace(&trace, &self.domain));
        }
        out
    }
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("program", &self.program.to_string())
            .field("domain", &self.domain.to_string())
            .field("executions", &self.executions.len())
            .field("points", &self.num_points())
            .field("epochs", &self.num_epochs())
            .finish()
    }
}

pub(crate) fn next_model_id() -> u64 {
    NEXT_MODEL_ID.fetch_add(1, Ordering::Relaxed)
}
