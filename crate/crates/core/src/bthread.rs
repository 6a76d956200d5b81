//! B-thread definitions and b-program assembly.
//!
//! A b-thread is an explicit, deterministic step function over a
//! [`Value`] state. The engine owns the state between steps, which is what
//! lets the verifier clone, hash and compare whole program configurations.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::event::EventSet;
use crate::sync::{Resume, StepResult, SyncStatement};
use crate::value::Value;

/// Failure raised by a step function, as opposed to a failed assertion.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct StepError(pub String);

impl StepError {
    pub fn new(msg: impl Into<String>) -> Self {
        StepError(msg.into())
    }
}

pub type StepFn =
    dyn Fn(&Value, Resume<'_>) -> Result<(Value, StepResult), StepError> + Send + Sync;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("duplicate b-thread name `{0}`")]
    DuplicateBThread(String),
}

/// Engine-level failure: a step function failed or a strategy was misconfigured.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("b-thread `{bthread}` failed: {message}")]
    Step { bthread: String, message: String },
    #[error(transparent)]
    Strategy(#[from] crate::strategy::StrategyError),
    #[error("strategy chose nothing from a non-empty selectable list")]
    NoChoice,
}

#[derive(Clone)]
pub struct BThreadDef {
    name: String,
    priority: i64,
    initial: Value,
    step: Arc<StepFn>,
}

impl fmt::Debug for BThreadDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BThreadDef")
            .field("name", &self.name)
            .field("priority", &self.priority)
            .field("initial", &self.initial)
            .finish_non_exhaustive()
    }
}

impl BThreadDef {
    pub fn new<F>(name: impl Into<String>, initial: Value, step: F) -> Self
    where
        F: Fn(&Value, Resume<'_>) -> Result<(Value, StepResult), StepError> + Send + Sync + 'static,
    {
        BThreadDef {
            name: name.into(),
            priority: 0,
            initial,
            step: Arc::new(step),
        }
    }

    /// Used only by the prioritized b-threads strategy.
    pub fn with_priority(mut self, priority: i64) -> Self {
        self.priority = priority;
        self
    }

    /// Syncs on each statement once, in order, then finishes.
    pub fn sequence(name: impl Into<String>, statements: Vec<SyncStatement>) -> Self {
        Self::program_counter(name, statements, false)
    }

    /// Syncs on the statements in order, forever.
    pub fn looping(name: impl Into<String>, statements: Vec<SyncStatement>) -> Self {
        assert!(!statements.is_empty(), "a looping b-thread needs a statement");
        Self::program_counter(name, statements, true)
    }

    fn program_counter(name: impl Into<String>, statements: Vec<SyncStatement>, wrap: bool) -> Self {
        Self::new(name, Value::Int(0), move |state, resume| {
            let pc = match resume {
                Resume::Start => 0,
                Resume::Event(_) => {
                    let next = state.as_int().unwrap_or(0) as usize + 1;
                    if wrap {
                        next % statements.len()
                    } else {
                        next
                    }
                }
            };
            match statements.get(pc) {
                Some(s) => Ok((Value::from(pc), StepResult::Sync(s.clone()))),
                None => Ok((Value::from(pc), StepResult::Done)),
            }
        })
    }

    /// Waits for any event in `trigger`, then fails with `message`.
    pub fn assertion(name: impl Into<String>, trigger: EventSet, message: impl Into<String>) -> Self {
        let message = message.into();
        Self::new(name, Value::Null, move |_, resume| match resume {
            Resume::Start => Ok((
                Value::Null,
                SyncStatement::new().wait_for(trigger.clone()).into(),
            )),
            Resume::Event(_) => Ok((Value::Null, StepResult::Violation(message.clone()))),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn priority(&self) -> i64 {
        self.priority
    }

    pub fn initial_state(&self) -> &Value {
        &self.initial
    }

    /// Runs one step; failures are reported as engine errors naming this b-thread.
    pub fn advance(&self, state: &Value, resume: Resume<'_>) -> Result<(Value, StepResult), EngineError> {
        (self.step)(state, resume).map_err(|e| EngineError::Step {
            bthread: self.name.clone(),
            message: e.0,
        })
    }
}

/// Free-function form of [`BThreadDef::advance`].
pub fn advance_bthread(
    def: &BThreadDef,
    state: &Value,
    resume: Resume<'_>,
) -> Result<(Value, StepResult), EngineError> {
    def.advance(state, resume)
}

/// A named collection of b-threads, in registration order.
#[derive(Debug, Clone, Default)]
pub struct BProgram {
    name: String,
    bthreads: Vec<BThreadDef>,
}

impl BProgram {
    pub fn new(name: impl Into<String>) -> Self {
        BProgram {
            name: name.into(),
            bthreads: Vec::new(),
        }
    }

    pub fn from_bthreads(
        name: impl Into<String>,
        bthreads: impl IntoIterator<Item = BThreadDef>,
    ) -> Result<Self, ProgramError> {
        let mut program = BProgram::new(name);
        for b in bthreads {
            program.add(b)?;
        }
        Ok(program)
    }

    pub fn add(&mut self, bthread: BThreadDef) -> Result<&mut Self, ProgramError> {
        if self.bthreads.iter().any(|b| b.name == bthread.name) {
            return Err(ProgramError::DuplicateBThread(bthread.name));
        }
        self.bthreads.push(bthread);
        Ok(self)
    }

    /// Builder-style [`BProgram::add`]; panics on a duplicate name.
    pub fn with(mut self, bthread: BThreadDef) -> Self {
        self.add(bthread).expect("b-thread names must be unique");
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bthreads(&self) -> &[BThreadDef] {
        &self.bthreads
    }

    pub fn len(&self) -> usize {
        self.bthreads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bthreads.is_empty()
    }

    pub(crate) fn names_unique(&self) -> bool {
        let mut seen = HashSet::new();
        self.bthreads.iter().all(|b| seen.insert(b.name.as_str()))
    }
}
