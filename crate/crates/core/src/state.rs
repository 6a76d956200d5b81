//! Canonical synchronization-point state of a whole b-program.
//!
//! Both the runner and the verifier move between synchronization points
//! through [`ProgramState::advance`], so a counterexample found by the
//! verifier replays step for step in the runner.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use fnv::FnvHasher;

use crate::bthread::{BProgram, EngineError};
use crate::event::Event;
use crate::strategy::{SnapshotEntry, SyncSnapshot};
use crate::sync::{Resume, StepResult, SyncStatement};
use crate::value::Value;

#[derive(Debug)]
struct Frame {
    value: Value,
    statement: SyncStatement,
    hash: u64,
}

impl Frame {
    fn new(value: Value, statement: SyncStatement) -> Arc<Frame> {
        let mut h = FnvHasher::default();
        value.encode(&mut h);
        statement.encode(&mut h);
        Arc::new(Frame {
            value,
            statement,
            hash: h.finish(),
        })
    }
}

/// The state value and pending statement of every live b-thread.
///
/// Slots are indexed by registration order; finished b-threads leave an
/// empty slot, so a state records only what is still running. Cloning is
/// cheap: frames are shared.
#[derive(Clone)]
pub struct ProgramState {
    frames: Vec<Option<Arc<Frame>>>,
    hash: u64,
}

/// Result of moving from one synchronization point to the next.
#[derive(Debug, Clone)]
pub enum Transition {
    Next {
        state: ProgramState,
        /// Registration indices of b-threads that finished during the step.
        finished: Vec<usize>,
    },
    Violation {
        bthread: String,
        message: String,
    },
}

impl ProgramState {
    fn from_frames(frames: Vec<Option<Arc<Frame>>>) -> Self {
        let mut h = FnvHasher::default();
        for (i, f) in frames.iter().enumerate() {
            if let Some(f) = f {
                h.write(&(i as u64).to_le_bytes());
                h.write(&f.hash.to_le_bytes());
            }
        }
        h.write(&(frames.len() as u64).to_le_bytes());
        ProgramState {
            frames,
            hash: h.finish(),
        }
    }

    /// Activates every b-thread with the start token.
    pub fn initial(program: &BProgram) -> Result<Transition, EngineError> {
        let mut frames = Vec::with_capacity(program.len());
        let mut finished = Vec::new();
        for (i, def) in program.bthreads().iter().enumerate() {
            let (value, result) = def.advance(def.initial_state(), Resume::Start)?;
            match result {
                StepResult::Sync(s) => frames.push(Some(Frame::new(value, s))),
                StepResult::Done => {
                    finished.push(i);
                    frames.push(None);
                }
                StepResult::Violation(message) => {
                    return Ok(Transition::Violation {
                        bthread: def.name().to_owned(),
                        message,
                    })
                }
            }
        }
        Ok(Transition::Next {
            state: ProgramState::from_frames(frames),
            finished,
        })
    }

    /// Resumes exactly the b-threads whose statement requests or waits for
    /// `event`; everyone else keeps state and statement.
    pub fn advance(&self, program: &BProgram, event: &Event) -> Result<Transition, EngineError> {
        let mut frames = self.frames.clone();
        let mut finished = Vec::new();
        for (i, slot) in frames.iter_mut().enumerate() {
            let Some(frame) = slot else { continue };
            if !frame.statement.is_affected_by(event) {
                continue;
            }
            let def = &program.bthreads()[i];
            let (value, result) = def.advance(&frame.value, Resume::Event(event))?;
            match result {
                StepResult::Sync(s) => *slot = Some(Frame::new(value, s)),
                StepResult::Done => {
                    *slot = None;
                    finished.push(i);
                }
                StepResult::Violation(message) => {
                    return Ok(Transition::Violation {
                        bthread: def.name().to_owned(),
                        message,
                    })
                }
            }
        }
        Ok(Transition::Next {
            state: ProgramState::from_frames(frames),
            finished,
        })
    }

    pub fn snapshot<'a>(&'a self, program: &'a BProgram) -> SyncSnapshot<'a> {
        SyncSnapshot::new(
            self.frames
                .iter()
                .zip(program.bthreads())
                .filter_map(|(slot, def)| {
                    slot.as_ref().map(|f| SnapshotEntry {
                        bthread: def.name(),
                        priority: def.priority(),
                        statement: &f.statement,
                    })
                })
                .collect(),
        )
    }

    pub fn live_count(&self) -> usize {
        self.frames.iter().flatten().count()
    }

    pub fn is_hot(&self) -> bool {
        self.frames.iter().flatten().any(|f| f.statement.hot)
    }

    /// Whether any live b-thread requests an event.
    pub fn has_requests(&self) -> bool {
        self.frames.iter().flatten().any(|f| !f.statement.request.is_empty())
    }

    pub fn is_blocked(&self, event: &Event) -> bool {
        self.frames.iter().flatten().any(|f| f.statement.blocks(event))
    }

    /// State value and statement of the b-thread at registration index `i`,
    /// or `None` when it has finished.
    pub fn bthread(&self, i: usize) -> Option<(&Value, &SyncStatement)> {
        self.frames
            .get(i)
            .and_then(|s| s.as_ref())
            .map(|f| (&f.value, &f.statement))
    }

    pub fn canonical_hash(&self) -> u64 {
        self.hash
    }
}

impl PartialEq for ProgramState {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash
            && self.frames.len() == other.frames.len()
            && self.frames.iter().zip(&other.frames).all(|(a, b)| match (a, b) {
                (None, None) => true,
                (Some(a), Some(b)) => {
                    Arc::ptr_eq(a, b)
                        || (a.hash == b.hash && a.value == b.value && a.statement == b.statement)
                }
                _ => false,
            })
    }
}

impl Eq for ProgramState {}

impl Hash for ProgramState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl fmt::Debug for ProgramState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for (i, slot) in self.frames.iter().enumerate() {
            if let Some(frame) = slot {
                list.entry(&(i, &frame.value, &frame.statement));
            }
        }
        list.finish()
    }
}
