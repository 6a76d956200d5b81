//! Event selection strategies.
//!
//! A strategy splits selection in two: [`EventSelectionStrategy::selectable`]
//! computes the events eligible at a synchronization point (the verifier uses
//! only this), and [`EventSelectionStrategy::choose`] picks one of them at
//! run time. Every built-in strategy's selectable list is a subset of
//! [`simple_selectable`], so a program verified under the simple strategy
//! holds under all of them.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::event::Event;
use crate::sync::SyncStatement;
use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("b-thread `{bthread}` passed non-integer priority hint {hint}")]
    InvalidHint { bthread: String, hint: String },
    #[error("unknown strategy `{0}` (expected simple, priority-bthread, priority-sync or ordered)")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy)]
pub struct SnapshotEntry<'a> {
    pub bthread: &'a str,
    pub priority: i64,
    pub statement: &'a SyncStatement,
}

/// The statements of all live b-threads at a synchronization point, in
/// registration order.
#[derive(Debug, Clone, Default)]
pub struct SyncSnapshot<'a> {
    entries: Vec<SnapshotEntry<'a>>,
}

impl<'a> SyncSnapshot<'a> {
    pub fn new(entries: Vec<SnapshotEntry<'a>>) -> Self {
        SyncSnapshot { entries }
    }

    pub fn entries(&self) -> &[SnapshotEntry<'a>] {
        &self.entries
    }

    pub fn is_blocked(&self, event: &Event) -> bool {
        self.entries.iter().any(|e| e.statement.blocks(event))
    }

    /// Whether any live b-thread requests anything at all.
    pub fn has_requests(&self) -> bool {
        self.entries.iter().any(|e| !e.statement.request.is_empty())
    }

    pub fn is_hot(&self) -> bool {
        self.entries.iter().any(|e| e.statement.hot)
    }
}

/// Seeded, platform-stable random source for event choice.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform index in `0..len`; `len` must be positive.
    pub fn index(&mut self, len: usize) -> usize {
        self.rng.gen_range(0..len)
    }
}

pub trait EventSelectionStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// Events eligible for selection, ordered and deduplicated.
    fn selectable(&self, snapshot: &SyncSnapshot<'_>) -> Result<Vec<Event>, StrategyError>;

    /// Picks one event from `selectable`, or nothing iff it is empty.
    fn choose(
        &self,
        _snapshot: &SyncSnapshot<'_>,
        selectable: &[Event],
        rng: &mut RandomSource,
    ) -> Option<Event> {
        uniform_choice(selectable, rng)
    }
}

impl<T: EventSelectionStrategy + ?Sized> EventSelectionStrategy for std::sync::Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn selectable(&self, snapshot: &SyncSnapshot<'_>) -> Result<Vec<Event>, StrategyError> {
        (**self).selectable(snapshot)
    }

    fn choose(
        &self,
        snapshot: &SyncSnapshot<'_>,
        selectable: &[Event],
        rng: &mut RandomSource,
    ) -> Option<Event> {
        (**self).choose(snapshot, selectable, rng)
    }
}

pub fn uniform_choice(selectable: &[Event], rng: &mut RandomSource) -> Option<Event> {
    if selectable.is_empty() {
        None
    } else {
        Some(selectable[rng.index(selectable.len())].clone())
    }
}

fn push_unique(out: &mut Vec<Event>, e: &Event) {
    if !out.contains(e) {
        out.push(e.clone());
    }
}

/// Requested and not blocked, in statement-then-request order.
pub fn simple_selectable(snapshot: &SyncSnapshot<'_>) -> Vec<Event> {
    let mut out = Vec::new();
    for entry in snapshot.entries() {
        for e in &entry.statement.request {
            if !snapshot.is_blocked(e) {
                push_unique(&mut out, e);
            }
        }
    }
    out
}

/// Selectable events of the highest-priority b-threads that have any.
pub fn prioritized_bthreads_selectable(snapshot: &SyncSnapshot<'_>) -> Vec<Event> {
    let candidates: Vec<(i64, Vec<&Event>)> = snapshot
        .entries()
        .iter()
        .map(|entry| {
            let open = entry
                .statement
                .request
                .iter()
                .filter(|e| !snapshot.is_blocked(e))
                .collect::<Vec<_>>();
            (entry.priority, open)
        })
        .filter(|(_, open)| !open.is_empty())
        .collect();
    let Some(top) = candidates.iter().map(|(p, _)| *p).max() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (_, open) in candidates.iter().filter(|(p, _)| *p == top) {
        for e in open {
            push_unique(&mut out, e);
        }
    }
    out
}

fn statement_priority(entry: &SnapshotEntry<'_>) -> Result<i64, StrategyError> {
    match &entry.statement.hint {
        None => Ok(0),
        Some(Value::Int(p)) => Ok(*p),
        Some(other) => Err(StrategyError::InvalidHint {
            bthread: entry.bthread.to_owned(),
            hint: other.to_string(),
        }),
    }
}

/// Selectable events carried by the highest-priority statements.
pub fn prioritized_sync_selectable(snapshot: &SyncSnapshot<'_>) -> Result<Vec<Event>, StrategyError> {
    let mut best: Option<i64> = None;
    let mut out = Vec::new();
    for entry in snapshot.entries() {
        let priority = statement_priority(entry)?;
        for e in &entry.statement.request {
            if snapshot.is_blocked(e) {
                continue;
            }
            match best {
                Some(b) if priority < b => {}
                Some(b) if priority == b => push_unique(&mut out, e),
                _ => {
                    best = Some(priority);
                    out.clear();
                    out.push(e.clone());
                }
            }
        }
    }
    Ok(out)
}

/// For each b-thread, only its first requested event that is not blocked.
pub fn ordered_events_selectable(snapshot: &SyncSnapshot<'_>) -> Vec<Event> {
    let mut out = Vec::new();
    for entry in snapshot.entries() {
        if let Some(e) = entry.statement.request.iter().find(|e| !snapshot.is_blocked(e)) {
            push_unique(&mut out, e);
        }
    }
    out
}

/// The four built-in strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinStrategy {
    Simple,
    PrioritizedBThreads,
    PrioritizedSync,
    OrderedEvents,
}

impl BuiltinStrategy {
    pub const ALL: [BuiltinStrategy; 4] = [
        BuiltinStrategy::Simple,
        BuiltinStrategy::PrioritizedBThreads,
        BuiltinStrategy::PrioritizedSync,
        BuiltinStrategy::OrderedEvents,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            BuiltinStrategy::Simple => "simple",
            BuiltinStrategy::PrioritizedBThreads => "priority-bthread",
            BuiltinStrategy::PrioritizedSync => "priority-sync",
            BuiltinStrategy::OrderedEvents => "ordered",
        }
    }
}

impl EventSelectionStrategy for BuiltinStrategy {
    fn name(&self) -> &str {
        self.cli_name()
    }

    fn selectable(&self, snapshot: &SyncSnapshot<'_>) -> Result<Vec<Event>, StrategyError> {
        match self {
            BuiltinStrategy::Simple => Ok(simple_selectable(snapshot)),
            BuiltinStrategy::PrioritizedBThreads => Ok(prioritized_bthreads_selectable(snapshot)),
            BuiltinStrategy::PrioritizedSync => prioritized_sync_selectable(snapshot),
            BuiltinStrategy::OrderedEvents => Ok(ordered_events_selectable(snapshot)),
        }
    }
}

impl FromStr for BuiltinStrategy {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BuiltinStrategy::ALL
            .into_iter()
            .find(|b| b.cli_name() == s)
            .ok_or_else(|| StrategyError::Unknown(s.to_owned()))
    }
}

impl fmt::Display for BuiltinStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::EventSet;

    fn ev(n: &str) -> Event {
        Event::new(n)
    }

    fn entry<'a>(name: &'a str, priority: i64, s: &'a SyncStatement) -> SnapshotEntry<'a> {
        SnapshotEntry {
            bthread: name,
            priority,
            statement: s,
        }
    }

    #[test]
    fn simple_hot_cold() {
        let hot = SyncStatement::new().request(ev("HOT"));
        let cold = SyncStatement::new().request(ev("COLD"));
        let ctl = SyncStatement::new().wait_for(ev("COLD")).block(ev("HOT"));
        let snap = SyncSnapshot::new(vec![entry("add-hot", 0, &hot), entry("add-cold", 0, &cold)]);
        assert_eq!(simple_selectable(&snap), vec![ev("HOT"), ev("COLD")]);
        let snap = SyncSnapshot::new(vec![
            entry("add-hot", 0, &hot),
            entry("add-cold", 0, &cold),
            entry("control-temp", 0, &ctl),
        ]);
        assert_eq!(simple_selectable(&snap), vec![ev("COLD")]);
        assert!(simple_selectable(&SyncSnapshot::default()).is_empty());
    }

    #[test]
    fn simple_dedups() {
        let a = SyncStatement::new().request(ev("A")).request(ev("A"));
        let b = SyncStatement::new().request(ev("A")).request(ev("B"));
        let snap = SyncSnapshot::new(vec![entry("a", 0, &a), entry("b", 0, &b)]);
        assert_eq!(simple_selectable(&snap), vec![ev("A"), ev("B")]);
    }

    #[test]
    fn prioritized_bthreads() {
        let a = SyncStatement::new().request(ev("A"));
        let b = SyncStatement::new().request(ev("B"));
        let snap = SyncSnapshot::new(vec![entry("hi", 2, &a), entry("lo", 1, &b)]);
        assert_eq!(prioritized_bthreads_selectable(&snap), vec![ev("A")]);

        let blocker = SyncStatement::new().block(ev("A"));
        let snap = SyncSnapshot::new(vec![entry("hi", 2, &a), entry("lo", 1, &b), entry("x", 9, &blocker)]);
        assert_eq!(prioritized_bthreads_selectable(&snap), vec![ev("B")]);

        assert!(prioritized_bthreads_selectable(&SyncSnapshot::default()).is_empty());
    }

    #[test]
    fn prioritized_sync() {
        let win = SyncStatement::new().request(ev("O(2,0)")).hint(50);
        let block = SyncStatement::new().request(ev("O(0,2)")).hint(40);
        let snap = SyncSnapshot::new(vec![entry("AddThirdO", 0, &win), entry("PreventThirdX", 0, &block)]);
        assert_eq!(prioritized_sync_selectable(&snap).unwrap(), vec![ev("O(2,0)")]);

        let b2 = SyncStatement::new().request(ev("O(2,0)")).hint(40);
        let snap = SyncSnapshot::new(vec![entry("a", 0, &block), entry("b", 0, &b2)]);
        assert_eq!(
            prioritized_sync_selectable(&snap).unwrap(),
            vec![ev("O(0,2)"), ev("O(2,0)")]
        );

        let plain = SyncStatement::new().request(ev("A"));
        let snap = SyncSnapshot::new(vec![entry("a", 0, &plain)]);
        assert_eq!(prioritized_sync_selectable(&snap).unwrap(), vec![ev("A")]);
    }

    #[test]
    fn prioritized_sync_skips_blocked_high_priority() {
        let hi = SyncStatement::new().request(ev("A")).hint(9);
        let lo = SyncStatement::new().request(ev("B")).hint(-3);
        let blk = SyncStatement::new().block(ev("A"));
        let snap = SyncSnapshot::new(vec![entry("a", 0, &hi), entry("b", 0, &lo), entry("c", 0, &blk)]);
        assert_eq!(prioritized_sync_selectable(&snap).unwrap(), vec![ev("B")]);
    }

    #[test]
    fn prioritized_sync_rejects_bad_hint() {
        let bad = SyncStatement::new().request(ev("A")).hint("high");
        let snap = SyncSnapshot::new(vec![entry("weird", 0, &bad)]);
        assert!(matches!(
            prioritized_sync_selectable(&snap),
            Err(StrategyError::InvalidHint { bthread, .. }) if bthread == "weird"
        ));
    }

    #[test]
    fn ordered_events() {
        let ab = SyncStatement::new().request(ev("A")).request(ev("B"));
        let snap = SyncSnapshot::new(vec![entry("t", 0, &ab)]);
        assert_eq!(ordered_events_selectable(&snap), vec![ev("A")]);

        let blk = SyncStatement::new().block(ev("A"));
        let snap = SyncSnapshot::new(vec![entry("t", 0, &ab), entry("b", 0, &blk)]);
        assert_eq!(ordered_events_selectable(&snap), vec![ev("B")]);

        let blk_all = SyncStatement::new().block(EventSet::All);
        let snap = SyncSnapshot::new(vec![entry("t", 0, &ab), entry("b", 0, &blk_all)]);
        assert!(ordered_events_selectable(&snap).is_empty());
    }

    #[test]
    fn choose_is_seeded_and_uniform() {
        let list = [ev("A"), ev("B")];
        let snap = SyncSnapshot::default();
        let s = BuiltinStrategy::Simple;
        let first = s.choose(&snap, &list, &mut RandomSource::new(7));
        assert_eq!(first, s.choose(&snap, &list, &mut RandomSource::new(7)));
        assert_eq!(s.choose(&snap, &[], &mut RandomSource::new(7)), None);

        let mut rng = RandomSource::new(42);
        let a_count = (0..10_000)
            .filter(|_| s.choose(&snap, &list, &mut rng).unwrap() == list[0])
            .count();
        assert!(a_count >= 4_500 && 10_000 - a_count >= 4_500, "A drawn {a_count} times");
    }

    #[test]
    fn names_round_trip() {
        for s in BuiltinStrategy::ALL {
            assert_eq!(s.cli_name().parse::<BuiltinStrategy>().unwrap(), s);
        }
        assert!("nosuch".parse::<BuiltinStrategy>().is_err());
    }
}
