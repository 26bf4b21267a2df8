use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Fire,
    Print,
    MonitorViolation,
    Quiesce,
}

/// One line of an execution trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub kind: EventKind,
    pub object: String,
    pub tags: String,
    pub detail: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{:?}\t{}\t{}\t{}", self.step, self.kind, self.object, self.tags, self.detail)
    }
}
