//! Synchronization statements: what a b-thread declares at each sync point.

use std::hash::Hasher;

use crate::event::{Event, EventSet};
use crate::value::Value;

/// One b-thread's declaration at a synchronization point.
///
/// `request` keeps the order the b-thread gave; only the ordered-events
/// strategy looks at it. `hint` is never interpreted by the engine.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SyncStatement {
    pub request: Vec<Event>,
    pub wait_for: EventSet,
    pub block: EventSet,
    pub hot: bool,
    pub hint: Option<Value>,
}

impl SyncStatement {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn request(mut self, event: Event) -> Self {
        self.request.push(event);
        self
    }

    pub fn request_all(mut self, events: impl IntoIterator<Item = Event>) -> Self {
        self.request.extend(events);
        self
    }

    pub fn wait_for(mut self, set: impl Into<EventSet>) -> Self {
        self.wait_for = set.into();
        self
    }

    pub fn block(mut self, set: impl Into<EventSet>) -> Self {
        self.block = set.into();
        self
    }

    pub fn hot(mut self) -> Self {
        self.hot = true;
        self
    }

    pub fn hint(mut self, hint: impl Into<Value>) -> Self {
        self.hint = Some(hint.into());
        self
    }

    /// Whether selecting `event` resumes the b-thread holding this statement.
    pub fn is_affected_by(&self, event: &Event) -> bool {
        self.request.contains(event) || self.wait_for.contains(event)
    }

    pub fn blocks(&self, event: &Event) -> bool {
        self.block.contains(event)
    }

    pub(crate) fn encode<H: Hasher>(&self, out: &mut H) {
        out.write(&(self.request.len() as u64).to_le_bytes());
        for e in &self.request {
            e.encode(out);
        }
        self.wait_for.encode(out);
        self.block.encode(out);
        out.write(&[self.hot as u8]);
        match &self.hint {
            None => out.write(&[0]),
            Some(h) => {
                out.write(&[1]);
                h.encode(out);
            }
        }
    }
}

/// Outcome of advancing a b-thread to its next synchronization point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Sync(SyncStatement),
    Done,
    /// A failed assertion, with a human-readable message.
    Violation(String),
}

impl From<SyncStatement> for StepResult {
    fn from(s: SyncStatement) -> Self {
        StepResult::Sync(s)
    }
}

/// What a b-thread is resumed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resume<'a> {
    /// First activation, before any event has been selected.
    Start,
    Event(&'a Event),
}

impl<'a> Resume<'a> {
    pub fn event(self) -> Option<&'a Event> {
        match self {
            Resume::Start => None,
            Resume::Event(e) => Some(e),
        }
    }
}
