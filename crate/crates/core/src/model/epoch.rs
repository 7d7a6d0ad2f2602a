use std::collections::HashMap;

use crate::lang::Event;

/// Interned trace. Equal ids mean equal traces within one model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceId(u32);

impl TraceId {
    pub const EMPTY: TraceId = TraceId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        TraceId(u32::try_from(i).expect("too many traces"))
    }
}

struct Node {
    parent: TraceId,
    event: Option<Event>,
}

/// Prefix tree of observed traces; node 0 is the empty trace.
pub(crate) struct TraceTrie {
    nodes: Vec<Node>,
    children: HashMap<(TraceId, Event), TraceId>,
}

impl TraceTrie {
    pub fn new() -> Self {
        Self {
            nodes: vec![Node {
                parent: TraceId::EMPTY,
                event: None,
            }],
            children: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn extend(&mut self, t: TraceId, ev: &Event) -> TraceId {
        if let Some(&c) = self.children.get(&(t, ev.clone())) {
            return c;
        }
        let id = TraceId::from_index(self.nodes.len());
        self.nodes.push(Node {
            parent: t,
            event: Some(ev.clone()),
        });
        self.children.insert((t, ev.clone()), id);
        id
    }

    pub fn lookup(&self, trace: &[Event]) -> Option<TraceId> {
        let mut t = TraceId::EMPTY;
        for ev in trace {
            t = *self.children.get(&(t, ev.clone()))?;
        }
        Some(t)
    }

    pub fn events(&self, mut t: TraceId) -> Vec<Event> {
        let mut out = Vec::new();
        while let Some(ev) = &self.nodes[t.index()].event {
            out.push(ev.clone());
            t = self.nodes[t.index()].parent;
        }
        out.reverse();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Value;

    #[test]
    fn interning() {
        let mut t = TraceTrie::new();
        let a = t.extend(TraceId::EMPTY, &Event::Out(Value(1)));
        let b = t.extend(a, &Event::Out(Value(0)));
        assert_eq!(t.extend(TraceId::EMPTY, &Event::Out(Value(1))), a);
        assert_eq!(
            t.lookup(&[Event::Out(Value(1)), Event::Out(Value(0))]),
            Some(b)
        );
        assert_eq!(t.lookup(&[Event::Out(Value(0))]), None);
        assert_eq!(
            t.events(b),
            vec![Event::Out(Value(1)), Event::Out(Value(0))]
        );
        assert_eq!(t.len(), 3);
    }
}
