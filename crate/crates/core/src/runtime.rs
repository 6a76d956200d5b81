//! The b-program runner.
//!
//! The loop collects synchronization statements, asks the strategy for the
//! selectable events, chooses one, and resumes every b-thread that requested
//! or waited for it. External events enter through an [`EventQueue`] and are
//! only dispatched once no internal event is selectable (a super-step).

use std::collections::VecDeque;
use std::sync::{Arc, Condvar, Mutex};

use thiserror::Error;

use crate::bthread::{BProgram, EngineError};
use crate::event::Event;
use crate::state::{ProgramState, Transition};
use crate::strategy::{BuiltinStrategy, EventSelectionStrategy, RandomSource};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueueError {
    #[error("external event queue is closed")]
    Closed,
}

#[derive(Debug, Default)]
struct QueueInner {
    events: VecDeque<Event>,
    closed: bool,
    // Bumped on every enqueue or close, so a parked runner can tell
    // whether anything changed since it last looked.
    version: u64,
}

/// Multi-producer FIFO of external events. Clones share the same queue.
#[derive(Debug, Clone, Default)]
pub struct EventQueue {
    inner: Arc<(Mutex<QueueInner>, Condvar)>,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn enqueue(&self, event: Event) -> Result<(), QueueError> {
        let (lock, cv) = &*self.inner;
        let mut q = lock.lock().expect("queue lock poisoned");
        if q.closed {
            return Err(QueueError::Closed);
        }
        q.events.push_back(event);
        q.version += 1;
        cv.notify_all();
        Ok(())
    }

    /// Rejects further enqueues and wakes a parked runner.
    pub fn close(&self) {
        let (lock, cv) = &*self.inner;
        let mut q = lock.lock().expect("queue lock poisoned");
        q.closed = true;
        q.version += 1;
        cv.notify_all();
    }

    pub fn is_closed(&self) -> bool {
        self.inner.0.lock().expect("queue lock poisoned").closed
    }

    pub fn len(&self) -> usize {
        self.inner.0.lock().expect("queue lock poisoned").events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pending(&self) -> Vec<Event> {
        self.inner.0.lock().expect("queue lock poisoned").events.iter().cloned().collect()
    }

    /// Removes the first queued event for which `blocked` is false.
    fn take_first_unblocked(&self, blocked: impl Fn(&Event) -> bool) -> Scan {
        let mut q = self.inner.0.lock().expect("queue lock poisoned");
        let pos = q.events.iter().position(|e| !blocked(e));
        Scan {
            event: pos.and_then(|p| q.events.remove(p)),
            version: q.version,
            closed: q.closed,
        }
    }

    /// Blocks until the queue changes after `version`.
    fn wait_for_change(&self, version: u64) {
        let (lock, cv) = &*self.inner;
        let q = lock.lock().expect("queue lock poisoned");
        let _q = cv
            .wait_while(q, |q| q.version == version)
            .expect("queue lock poisoned");
    }
}

struct Scan {
    event: Option<Event>,
    version: u64,
    closed: bool,
}

#[derive(Clone)]
pub struct RunnerConfig {
    pub strategy: Arc<dyn EventSelectionStrategy>,
    pub seed: u64,
    pub max_events: Option<usize>,
    /// Park instead of finishing when nothing is selectable, until an
    /// external event arrives or the queue closes.
    pub daemon: bool,
}

impl RunnerConfig {
    pub fn new(strategy: Arc<dyn EventSelectionStrategy>) -> Self {
        RunnerConfig {
            strategy,
            seed: 0,
            max_events: None,
            daemon: false,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn max_events(mut self, max: usize) -> Self {
        self.max_events = Some(max);
        self
    }

    pub fn daemon(mut self, daemon: bool) -> Self {
        self.daemon = daemon;
        self
    }
}

impl Default for RunnerConfig {
    fn default() -> Self {
        RunnerConfig::new(Arc::new(BuiltinStrategy::Simple))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    Completed,
    Deadlock,
    AssertionFailed { bthread: String, message: String },
    EventLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub trace: Vec<Event>,
    pub termination: Termination,
}

/// Host-side observer. Callbacks run synchronously on the runner's thread,
/// in loop order, and must not re-enter the runner.
#[allow(unused_variables)]
pub trait RunnerListener {
    fn started(&mut self, program: &str) {}
    fn event_selected(&mut self, event: &Event, index: usize) {}
    fn bthread_done(&mut self, bthread: &str) {}
    fn assertion_failed(&mut self, bthread: &str, message: &str) {}
    fn deadlock(&mut self) {}
    /// Daemon mode only: nothing internal or queued is dispatchable and the
    /// runner is about to park.
    fn awaiting_external(&mut self) {}
    fn ended(&mut self, termination: &Termination) {}
}

fn notify(listeners: &mut [&mut dyn RunnerListener], f: impl Fn(&mut dyn RunnerListener)) {
    for l in listeners.iter_mut() {
        f(&mut **l);
    }
}

/// Advances every b-thread whose statement requests or waits for `selected`.
pub fn dispatch(
    program: &BProgram,
    state: &ProgramState,
    selected: &Event,
) -> Result<Transition, EngineError> {
    state.advance(program, selected)
}

pub fn run(
    program: &BProgram,
    config: &RunnerConfig,
    queue: &EventQueue,
    listeners: &mut [&mut dyn RunnerListener],
) -> Result<RunResult, EngineError> {
    debug_assert!(program.names_unique());
    let mut rng = RandomSource::new(config.seed);
    let mut trace = Vec::new();
    notify(listeners, |l| l.started(program.name()));

    let finish = |listeners: &mut [&mut dyn RunnerListener], trace: Vec<Event>, termination: Termination| {
        match &termination {
            Termination::AssertionFailed { bthread, message } => {
                notify(listeners, |l| l.assertion_failed(bthread, message))
            }
            Termination::Deadlock => notify(listeners, |l| l.deadlock()),
            _ => {}
        }
        notify(listeners, |l| l.ended(&termination));
        Ok(RunResult { trace, termination })
    };

    let mut state = match ProgramState::initial(program)? {
        Transition::Next { state, finished } => {
            for i in finished {
                notify(listeners, |l| l.bthread_done(program.bthreads()[i].name()));
            }
            state
        }
        Transition::Violation { bthread, message } => {
            return finish(listeners, trace, Termination::AssertionFailed { bthread, message })
        }
    };

    loop {
        if state.live_count() == 0 {
            return finish(listeners, trace, Termination::Completed);
        }
        let snapshot = state.snapshot(program);
        let selectable = config.strategy.selectable(&snapshot)?;

        let event = if !selectable.is_empty() {
            if config.max_events.is_some_and(|m| trace.len() >= m) {
                return finish(listeners, trace, Termination::EventLimit);
            }
            config
                .strategy
                .choose(&snapshot, &selectable, &mut rng)
                .ok_or(EngineError::NoChoice)?
        } else {
            // Super-step: internal events are exhausted, look outside.
            let scan = queue.take_first_unblocked(|e| state.is_blocked(e));
            match scan.event {
                Some(e) => {
                    if config.max_events.is_some_and(|m| trace.len() >= m) {
                        return finish(listeners, trace, Termination::EventLimit);
                    }
                    e
                }
                None if config.daemon && scan.closed => {
                    return finish(listeners, trace, Termination::Completed)
                }
                None if config.daemon => {
                    notify(listeners, |l| l.awaiting_external());
                    queue.wait_for_change(scan.version);
                    continue;
                }
                None if state.has_requests() => {
                    return finish(listeners, trace, Termination::Deadlock)
                }
                None => return finish(listeners, trace, Termination::Completed),
            }
        };

        let index = trace.len();
        trace.push(event.clone());
        notify(listeners, |l| l.event_selected(&event, index));
        match dispatch(program, &state, &event)? {
            Transition::Next { state: next, finished } => {
                for i in finished {
                    notify(listeners, |l| l.bthread_done(program.bthreads()[i].name()));
                }
                state = next;
            }
            Transition::Violation { bthread, message } => {
                return finish(listeners, trace, Termination::AssertionFailed { bthread, message })
            }
        }
    }
}

/// Runs without external input or listeners.
pub fn run_closed(program: &BProgram, config: &RunnerConfig) -> Result<RunResult, EngineError> {
    let queue = EventQueue::new();
    queue.close();
    run(program, &config.clone().daemon(false), &queue, &mut [])
}

/// Strategy that replays a fixed trace, failing the moment the scripted
/// event is not selectable under `base`.
struct Scripted<S> {
    base: S,
    script: Mutex<VecDeque<Event>>,
}

impl<S: EventSelectionStrategy> EventSelectionStrategy for Scripted<S> {
    fn name(&self) -> &str {
        "scripted"
    }

    fn selectable(
        &self,
        snapshot: &crate::strategy::SyncSnapshot<'_>,
    ) -> Result<Vec<Event>, crate::strategy::StrategyError> {
        self.base.selectable(snapshot)
    }

    fn choose(
        &self,
        _snapshot: &crate::strategy::SyncSnapshot<'_>,
        selectable: &[Event],
        _rng: &mut RandomSource,
    ) -> Option<Event> {
        let mut script = self.script.lock().expect("script lock poisoned");
        let next = script.pop_front()?;
        selectable.contains(&next).then_some(next)
    }
}

/// Replays `trace` through the runner, forcing each choice. The run stops
/// after the trace is exhausted, so the termination reports whatever the
/// final state exhibits: an assertion failure, a deadlock, or `EventLimit`
/// for a live state. A trace event that is not selectable yields
/// [`EngineError::NoChoice`].
pub fn replay<S: EventSelectionStrategy + 'static>(
    program: &BProgram,
    base: S,
    trace: &[Event],
) -> Result<RunResult, EngineError> {
    let strategy = Scripted {
        base,
        script: Mutex::new(trace.iter().cloned().collect()),
    };
    let config = RunnerConfig::new(Arc::new(strategy)).max_events(trace.len());
    run_closed(program, &config)
}
