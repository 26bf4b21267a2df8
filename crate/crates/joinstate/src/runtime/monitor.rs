use serde::Serialize;

use super::{EventKind, RunVerdict, Soup, TraceEvent};
use crate::types::{derivative_config, relevant, usable, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// The mailbox is not a prefix of any configuration of the type.
    Unusable,
    /// The residual type still has obligations but nobody holds a reference.
    Orphaned,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub step: usize,
    pub object: String,
    pub kind: ViolationKind,
    pub residual: String,
}

impl Soup {
    fn residual_tags(&self, o: usize) -> Vec<&Tag> {
        let mut tags: Vec<&Tag> = self.mailboxes[o].iter().map(|m| &m.tag).collect();
        tags.sort();
        tags
    }

    /// Residual type of an object after consuming its whole mailbox.
    pub fn residual(&self, o: usize) -> Option<crate::types::TypeExpr> {
        let ty = self.objects[o].ty.as_ref()?;
        Some(derivative_config(ty, self.residual_tags(o), &self.table))
    }

    /// Usability and relevance of the residual type, memoized by type and
    /// mailbox tags.
    fn status(&self, o: usize) -> Option<(bool, bool)> {
        let ty = self.objects[o].ty.as_ref()?;
        let key = (ty.clone(), self.residual_tags(o).into_iter().cloned().collect::<Vec<_>>());
        if let Some(hit) = self.residuals.borrow().get(&key) {
            return Some(*hit);
        }
        let r = derivative_config(ty, &key.1, &self.table);
        let status = (usable(&r, &self.table), relevant(&r, &self.table));
        self.residuals.borrow_mut().insert(key, status);
        Some(status)
    }

    fn violation_of(&self, o: usize) -> Option<Violation> {
        let obj = &self.objects[o];
        if obj.is_builtin() {
            return None;
        }
        let (usable, relevant) = self.status(o)?;
        let kind = if !usable {
            ViolationKind::Unusable
        } else if relevant && self.refs[o] == 0 {
            ViolationKind::Orphaned
        } else {
            return None;
        };
        let residual = self.residual(o)?.to_string();
        Some(Violation { step: self.step, object: self.label(o), kind, residual })
    }

    /// Objects whose mailbox does not conform to their type: either the
    /// messages cannot all be consumed, or obligations remain with no
    /// reference left to meet them.
    pub fn monitor_conformance(&self) -> Vec<Violation> {
        (0..self.objects.len()).filter_map(|o| self.violation_of(o)).collect()
    }

    /// Checks the objects touched since the last call.
    pub(super) fn monitor_touched(&mut self, trace: &mut Vec<TraceEvent>) -> Vec<Violation> {
        let touched = std::mem::take(&mut self.touched);
        let found: Vec<Violation> = touched.into_iter().filter_map(|o| self.violation_of(o)).collect();
        for v in &found {
            trace.push(TraceEvent {
                step: v.step,
                kind: EventKind::MonitorViolation,
                object: v.object.clone(),
                tags: format!("{:?}", v.kind),
                detail: v.residual.clone(),
            });
        }
        found
    }

    /// Verdict for a solution with no enabled reaction: objects whose
    /// residual type is still relevant are deadlocked.
    pub fn check_quiescence(&self) -> RunVerdict {
        let stuck: Vec<String> = (0..self.objects.len())
            .filter(|&o| !self.objects[o].is_builtin())
            .filter(|&o| self.status(o).is_some_and(|(_, relevant)| relevant))
            .map(|o| self.objects[o].name.clone())
            .collect();
        if stuck.is_empty() {
            RunVerdict::Terminated
        } else {
            RunVerdict::Deadlocked(stuck)
        }
    }
}
