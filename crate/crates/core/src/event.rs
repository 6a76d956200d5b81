//! Events and the event-set algebra.

use std::fmt;
use std::hash::Hasher;
use std::sync::Arc;

use fnv::FnvHasher;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::value::{encode_str, Value, ValueError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EventError {
    #[error("event name must not be empty")]
    EmptyName,
    #[error("event encoding is not an object with a string `name`")]
    Malformed,
    #[error(transparent)]
    Value(#[from] ValueError),
}

/// A named, optionally data-carrying value.
///
/// Events are cheap to clone; the name is reference counted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    name: Arc<str>,
    data: Option<Value>,
}

impl Event {
    /// Creates a data-less event.
    ///
    /// Panics when `name` is empty; use [`Event::try_new`] for untrusted input.
    pub fn new(name: impl AsRef<str>) -> Event {
        Event::try_new(name, None).expect("event name must not be empty")
    }

    pub fn with_data(name: impl AsRef<str>, data: Value) -> Event {
        Event::try_new(name, Some(data)).expect("event name must not be empty")
    }

    pub fn try_new(name: impl AsRef<str>, data: Option<Value>) -> Result<Event, EventError> {
        let name = name.as_ref();
        if name.is_empty() {
            return Err(EventError::EmptyName);
        }
        Ok(Event {
            name: Arc::from(name),
            data,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn data(&self) -> Option<&Value> {
        self.data.as_ref()
    }

    pub(crate) fn encode<H: Hasher>(&self, out: &mut H) {
        encode_str(&self.name, out);
        match &self.data {
            None => out.write(&[0]),
            Some(v) => {
                out.write(&[1]);
                v.encode(out);
            }
        }
    }

    pub fn canonical_hash(&self) -> u64 {
        let mut h = FnvHasher::default();
        self.encode(&mut h);
        h.finish()
    }

    /// Canonical one-line JSON encoding, e.g. `{"name":"HOT"}`.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("events always serialize")
    }

    pub fn from_json(json: serde_json::Value) -> Result<Event, EventError> {
        let serde_json::Value::Object(mut obj) = json else {
            return Err(EventError::Malformed);
        };
        let Some(serde_json::Value::String(name)) = obj.remove("name") else {
            return Err(EventError::Malformed);
        };
        let data = obj.remove("data").map(Value::try_from).transpose()?;
        Event::try_new(name, data)
    }
}

impl Serialize for Event {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let fields = if self.data.is_some() { 2 } else { 1 };
        let mut s = serializer.serialize_struct("Event", fields)?;
        s.serialize_field("name", &*self.name)?;
        if let Some(data) = &self.data {
            s.serialize_field("data", data)?;
        }
        s.end()
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.data {
            None => f.write_str(&self.name),
            Some(d) => write!(f, "{}{}", self.name, d),
        }
    }
}

/// A predicate over events, closed under union, intersection and complement.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub enum EventSet {
    #[default]
    None,
    All,
    Exact(Event),
    NameIs(String),
    NamePrefix(String),
    AnyOf(Vec<EventSet>),
    AllOf(Vec<EventSet>),
    Not(Box<EventSet>),
    AllExcept(Vec<Event>),
}

impl EventSet {
    pub fn contains(&self, event: &Event) -> bool {
        match self {
            EventSet::None => false,
            EventSet::All => true,
            EventSet::Exact(e) => e == event,
            EventSet::NameIs(n) => event.name() == n,
            EventSet::NamePrefix(p) => event.name().starts_with(p.as_str()),
            EventSet::AnyOf(sets) => sets.iter().any(|s| s.contains(event)),
            EventSet::AllOf(sets) => sets.iter().all(|s| s.contains(event)),
            EventSet::Not(s) => !s.contains(event),
            EventSet::AllExcept(events) => !events.contains(event),
        }
    }

    /// The set holding exactly the given events.
    pub fn of(events: impl IntoIterator<Item = Event>) -> EventSet {
        EventSet::AnyOf(events.into_iter().map(EventSet::Exact).collect())
    }

    pub fn any_of(sets: impl IntoIterator<Item = EventSet>) -> EventSet {
        EventSet::AnyOf(sets.into_iter().collect())
    }

    pub fn negate(self) -> EventSet {
        EventSet::Not(Box::new(self))
    }

    pub fn is_none(&self) -> bool {
        matches!(self, EventSet::None)
    }

    pub(crate) fn encode<H: Hasher>(&self, out: &mut H) {
        fn encode_all<H: Hasher>(tag: u8, sets: &[EventSet], out: &mut H) {
            out.write(&[tag]);
            out.write(&(sets.len() as u64).to_le_bytes());
            for s in sets {
                s.encode(out);
            }
        }
        match self {
            EventSet::None => out.write(&[0]),
            EventSet::All => out.write(&[1]),
            EventSet::Exact(e) => {
                out.write(&[2]);
                e.encode(out);
            }
            EventSet::NameIs(n) => {
                out.write(&[3]);
                encode_str(n, out);
            }
            EventSet::NamePrefix(p) => {
                out.write(&[4]);
                encode_str(p, out);
            }
            EventSet::AnyOf(sets) => encode_all(5, sets, out),
            EventSet::AllOf(sets) => encode_all(6, sets, out),
            EventSet::Not(s) => {
                out.write(&[7]);
                s.encode(out);
            }
            EventSet::AllExcept(events) => {
                out.write(&[8]);
                out.write(&(events.len() as u64).to_le_bytes());
                for e in events {
                    e.encode(out);
                }
            }
        }
    }
}

impl From<Event> for EventSet {
    fn from(e: Event) -> Self {
        EventSet::Exact(e)
    }
}

impl From<Vec<Event>> for EventSet {
    fn from(events: Vec<Event>) -> Self {
        EventSet::of(events)
    }
}
