//! Explicit-state model checking of b-programs.
//!
//! The verifier walks the graph of synchronization-point states depth first,
//! with an explicit stack, using only the strategy's `selectable` method to
//! enumerate edges. It reports the first failed assertion or deadlock it
//! meets, and can optionally search the explored graph for hot cycles.
//!
//! The same [`ProgramState::advance`] drives the runner, so any returned
//! trace can be replayed with [`crate::runtime::replay`].

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

use crate::bthread::{BProgram, EngineError};
use crate::event::Event;
use crate::state::{ProgramState, Transition};
use crate::strategy::{simple_selectable, BuiltinStrategy, EventSelectionStrategy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("state limit exceeded after visiting {states_visited} states")]
    StateLimit { states_visited: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StoreKind {
    /// Retains full states; never reports a false "seen".
    Exact,
    /// Retains 64-bit hashes only. A collision can prune an unvisited
    /// state, so an `Ok` verdict is not a proof.
    HashOnly,
}

impl std::str::FromStr for StoreKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(StoreKind::Exact),
            "hash" => Ok(StoreKind::HashOnly),
            other => Err(format!("unknown store `{other}` (expected exact or hash)")),
        }
    }
}

#[derive(Clone)]
pub struct VerificationSettings {
    pub strategy: Arc<dyn EventSelectionStrategy>,
    pub store: StoreKind,
    pub max_depth: Option<usize>,
    pub detect_hot_cycles: bool,
    /// Report states where something is requested but everything requested
    /// is blocked. Programs whose dead ends are expected (a maze walker that
    /// may not revisit cells) turn this off.
    pub detect_deadlocks: bool,
    /// Keep exploring after the first violation, so `states_visited` covers
    /// the whole reachable graph.
    pub exhaustive: bool,
    /// Replace the depth-first counterexample by a shortest one of the same
    /// kind, found breadth first within the depth-first trace's length.
    pub shortest_counterexample: bool,
    pub max_states: Option<usize>,
}

impl VerificationSettings {
    pub fn new(strategy: Arc<dyn EventSelectionStrategy>) -> Self {
        VerificationSettings {
            strategy,
            store: StoreKind::Exact,
            max_depth: None,
            detect_hot_cycles: false,
            detect_deadlocks: true,
            exhaustive: false,
            shortest_counterexample: true,
            max_states: None,
        }
    }

    pub fn store(mut self, store: StoreKind) -> Self {
        self.store = store;
        self
    }

    pub fn max_depth(mut self, depth: usize) -> Self {
        self.max_depth = Some(depth);
        self
    }

    pub fn hot_cycles(mut self, on: bool) -> Self {
        self.detect_hot_cycles = on;
        self
    }

    pub fn deadlocks(mut self, on: bool) -> Self {
        self.detect_deadlocks = on;
        self
    }

    pub fn exhaustive(mut self, on: bool) -> Self {
        self.exhaustive = on;
        self
    }

    pub fn shortest_counterexample(mut self, on: bool) -> Self {
        self.shortest_counterexample = on;
        self
    }

    pub fn max_states(mut self, n: usize) -> Self {
        self.max_states = Some(n);
        self
    }
}

impl Default for VerificationSettings {
    fn default() -> Self {
        VerificationSettings::new(Arc::new(BuiltinStrategy::Simple))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    AssertionViolation {
        bthread: String,
        message: String,
        trace: Vec<Event>,
    },
    Deadlock {
        trace: Vec<Event>,
    },
    HotCycle {
        prefix: Vec<Event>,
        cycle: Vec<Event>,
    },
    DepthBoundReached,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Ok => "ok",
            Verdict::AssertionViolation { .. } => "assertion-violation",
            Verdict::Deadlock { .. } => "deadlock",
            Verdict::HotCycle { .. } => "hot-cycle",
            Verdict::DepthBoundReached => "depth-bound-reached",
        }
    }

    /// The counterexample: for hot cycles, prefix followed by one lap.
    pub fn trace(&self) -> Vec<Event> {
        match self {
            Verdict::AssertionViolation { trace, .. } | Verdict::Deadlock { trace } => trace.clone(),
            Verdict::HotCycle { prefix, cycle } => prefix.iter().chain(cycle).cloned().collect(),
            Verdict::Ok | Verdict::DepthBoundReached => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationResult {
    pub verdict: Verdict,
    pub states_visited: usize,
    pub edges_traversed: usize,
    pub store: StoreKind,
}

impl VerificationResult {
    /// `Ok` from a hash-only store: no violation found, modulo collisions.
    pub fn ok_with_caveat(&self) -> bool {
        self.verdict == Verdict::Ok && self.store == StoreKind::HashOnly
    }
}

impl fmt::Display for VerificationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verdict: {}", self.verdict.label())?;
        if self.ok_with_caveat() {
            write!(f, " (hash-only store: collisions may hide states)")?;
        }
        writeln!(f)?;
        match &self.verdict {
            Verdict::AssertionViolation { bthread, message, .. } => {
                writeln!(f, "b-thread: {bthread}")?;
                writeln!(f, "message: {message}")?;
            }
            Verdict::HotCycle { prefix, cycle } => {
                writeln!(f, "prefix length: {}", prefix.len())?;
                writeln!(f, "cycle length: {}", cycle.len())?;
            }
            _ => {}
        }
        writeln!(f, "states visited: {}", self.states_visited)?;
        writeln!(f, "edges traversed: {}", self.edges_traversed)
    }
}

/// A node of the state graph, or the violation an edge runs into.
#[derive(Debug, Clone)]
pub enum Outcome {
    State(ProgramState),
    Violation { bthread: String, message: String },
}

impl From<Transition> for Outcome {
    fn from(t: Transition) -> Self {
        match t {
            Transition::Next { state, .. } => Outcome::State(state),
            Transition::Violation { bthread, message } => Outcome::Violation { bthread, message },
        }
    }
}

pub fn initial_state(program: &BProgram) -> Result<Outcome, EngineError> {
    ProgramState::initial(program).map(Outcome::from)
}

/// Outgoing edges of `state`, in the strategy's selectable order.
pub fn successors(
    program: &BProgram,
    state: &ProgramState,
    strategy: &dyn EventSelectionStrategy,
) -> Result<Vec<(Event, Outcome)>, EngineError> {
    let selectable = strategy.selectable(&state.snapshot(program))?;
    selectable
        .into_iter()
        .map(|e| {
            let next = state.advance(program, &e)?;
            Ok((e, next.into()))
        })
        .collect()
}

/// Something is requested, and every requested event is blocked.
pub fn is_deadlock(program: &BProgram, state: &ProgramState) -> bool {
    state.has_requests() && simple_selectable(&state.snapshot(program)).is_empty()
}

#[derive(Debug, Clone, Copy)]
struct Seen {
    id: u32,
    depth: u32,
}

enum Store {
    Exact(HashMap<ProgramState, Seen>),
    Hash(HashMap<u64, Seen>),
}

impl Store {
    fn new(kind: StoreKind) -> Self {
        match kind {
            StoreKind::Exact => Store::Exact(HashMap::new()),
            StoreKind::HashOnly => Store::Hash(HashMap::new()),
        }
    }

    fn get_mut(&mut self, s: &ProgramState) -> Option<&mut Seen> {
        match self {
            Store::Exact(m) => m.get_mut(s),
            Store::Hash(m) => m.get_mut(&s.canonical_hash()),
        }
    }

    fn insert(&mut self, s: &ProgramState, seen: Seen) {
        match self {
            Store::Exact(m) => {
                m.insert(s.clone(), seen);
            }
            Store::Hash(m) => {
                m.insert(s.canonical_hash(), seen);
            }
        }
    }
}

enum Found {
    Assertion { bthread: String, message: String },
    Deadlock,
}

struct Frame {
    state: ProgramState,
    id: u32,
    depth: usize,
    selectable: Vec<Event>,
    next: usize,
}

/// Graph kept only for the hot-cycle pass.
#[derive(Default)]
struct Recorded {
    hot: Vec<bool>,
    parent: Vec<Option<(u32, Event)>>,
    edges: Vec<(u32, u32, Event)>,
}

pub fn verify(program: &BProgram, settings: &VerificationSettings) -> Result<VerificationResult, VerifyError> {
    if settings.detect_hot_cycles && settings.store != StoreKind::Exact {
        return Err(VerifyError::Config(
            "hot-cycle detection needs the exact state store".into(),
        ));
    }
    if settings.max_depth == Some(0) {
        return Err(VerifyError::Config("max depth must be positive".into()));
    }
    let strategy = settings.strategy.as_ref();
    let mut result = VerificationResult {
        verdict: Verdict::Ok,
        states_visited: 0,
        edges_traversed: 0,
        store: settings.store,
    };

    let root = match initial_state(program)? {
        Outcome::State(s) => s,
        Outcome::Violation { bthread, message } => {
            result.verdict = Verdict::AssertionViolation {
                bthread,
                message,
                trace: Vec::new(),
            };
            return Ok(result);
        }
    };

    let mut store = Store::new(settings.store);
    let mut recorded = settings.detect_hot_cycles.then(Recorded::default);
    let mut found: Option<(Found, Vec<Event>)> = None;
    let mut hit_bound = false;

    store.insert(&root, Seen { id: 0, depth: 0 });
    result.states_visited = 1;
    if let Some(r) = recorded.as_mut() {
        r.hot.push(root.is_hot());
        r.parent.push(None);
    }

    let mut path: Vec<Event> = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    if settings.detect_deadlocks && is_deadlock(program, &root) {
        found = Some((Found::Deadlock, Vec::new()));
    } else {
        stack.push(Frame {
            selectable: strategy.selectable(&root.snapshot(program)).map_err(EngineError::from)?,
            state: root.clone(),
            id: 0,
            depth: 0,
            next: 0,
        });
    }

    while let Some(top) = stack.last_mut() {
        if top.next >= top.selectable.len() {
            stack.pop();
            path.pop();
            continue;
        }
        let event = top.selectable[top.next].clone();
        top.next += 1;
        result.edges_traversed += 1;
        let from = top.id;
        let depth = top.depth + 1;

        let next = match top.state.advance(program, &event)? {
            Transition::Violation { bthread, message } => {
                if found.is_none() {
                    let mut trace = path.clone();
                    trace.push(event);
                    found = Some((Found::Assertion { bthread, message }, trace));
                }
                if settings.exhaustive {
                    continue;
                }
                break;
            }
            Transition::Next { state, .. } => state,
        };

        let id = match store.get_mut(&next) {
            Some(seen) => {
                if let Some(r) = recorded.as_mut() {
                    r.edges.push((from, seen.id, event.clone()));
                }
                // Under a depth bound a state first reached deep may still
                // lead somewhere within bound when reached by a shorter path.
                if settings.max_depth.is_some() && depth < seen.depth as usize {
                    seen.depth = depth as u32;
                    seen.id
                } else {
                    continue;
                }
            }
            None => {
                let id = result.states_visited as u32;
                result.states_visited += 1;
                if settings.max_states.is_some_and(|m| result.states_visited > m) {
                    return Err(VerifyError::StateLimit {
                        states_visited: result.states_visited,
                    });
                }
                store.insert(&next, Seen { id, depth: depth as u32 });
                if let Some(r) = recorded.as_mut() {
                    r.hot.push(next.is_hot());
                    r.parent.push(Some((from, event.clone())));
                    r.edges.push((from, id, event.clone()));
                }
                if settings.detect_deadlocks && is_deadlock(program, &next) {
                    if found.is_none() {
                        let mut trace = path.clone();
                        trace.push(event);
                        found = Some((Found::Deadlock, trace));
                    }
                    if settings.exhaustive {
                        continue;
                    }
                    break;
                }
                id
            }
        };

        if settings.max_depth.is_some_and(|m| depth >= m) {
            hit_bound = true;
            continue;
        }
        let selectable = strategy.selectable(&next.snapshot(program)).map_err(EngineError::from)?;
        path.push(event);
        stack.push(Frame {
            state: next,
            id,
            depth,
            selectable,
            next: 0,
        });
    }

    if let Some((kind, mut trace)) = found {
        if settings.shortest_counterexample && !trace.is_empty() {
            if let Some(shorter) = shortest_counterexample(program, settings, &kind, trace.len())? {
                trace = shorter;
            }
        }
        result.verdict = match kind {
            Found::Assertion { bthread, message } => Verdict::AssertionViolation {
                bthread,
                message,
                trace,
            },
            Found::Deadlock => Verdict::Deadlock { trace },
        };
        return Ok(result);
    }

    if let Some(r) = recorded {
        if let Some((prefix, cycle)) = find_hot_cycle(&r) {
            result.verdict = Verdict::HotCycle { prefix, cycle };
            return Ok(result);
        }
    }
    if hit_bound {
        result.verdict = Verdict::DepthBoundReached;
    }
    Ok(result)
}

/// Runs [`verify`] with hot-cycle detection switched on.
pub fn detect_hot_cycles(
    program: &BProgram,
    settings: &VerificationSettings,
) -> Result<VerificationResult, VerifyError> {
    verify(program, &settings.clone().hot_cycles(true))
}

/// Breadth-first search for the nearest violation matching `kind`, no deeper
/// than `bound` events.
fn shortest_counterexample(
    program: &BProgram,
    settings: &VerificationSettings,
    kind: &Found,
    bound: usize,
) -> Result<Option<Vec<Event>>, VerifyError> {
    let Outcome::State(root) = initial_state(program)? else {
        return Ok(Some(Vec::new()));
    };
    let strategy = settings.strategy.as_ref();
    let mut seen_exact: HashSet<ProgramState> = HashSet::new();
    let mut seen_hash: HashSet<u64> = HashSet::new();
    let mut mark = |s: &ProgramState| match settings.store {
        StoreKind::Exact => seen_exact.insert(s.clone()),
        StoreKind::HashOnly => seen_hash.insert(s.canonical_hash()),
    };

    // (parent index, event) per discovered state, for trace reconstruction.
    let mut parents: Vec<Option<(usize, Event)>> = vec![None];
    let trace_to = |parents: &[Option<(usize, Event)>], mut i: usize, last: Option<Event>| {
        let mut trace: Vec<Event> = last.into_iter().collect();
        while let Some((p, e)) = &parents[i] {
            trace.push(e.clone());
            i = *p;
        }
        trace.reverse();
        trace
    };

    mark(&root);
    let mut queue = VecDeque::from([(root, 0usize, 0usize)]);
    while let Some((state, idx, depth)) = queue.pop_front() {
        if depth >= bound {
            continue;
        }
        for e in strategy.selectable(&state.snapshot(program)).map_err(EngineError::from)? {
            match state.advance(program, &e)? {
                Transition::Violation { bthread, message } => {
                    if matches!(kind, Found::Assertion { bthread: b, message: m } if *b == bthread && *m == message)
                    {
                        return Ok(Some(trace_to(&parents, idx, Some(e))));
                    }
                }
                Transition::Next { state: next, .. } => {
                    if !mark(&next) {
                        continue;
                    }
                    parents.push(Some((idx, e)));
                    let next_idx = parents.len() - 1;
                    if matches!(kind, Found::Deadlock) && is_deadlock(program, &next) {
                        return Ok(Some(trace_to(&parents, next_idx, None)));
                    }
                    queue.push_back((next, next_idx, depth + 1));
                }
            }
        }
    }
    Ok(None)
}

/// Finds a reachable cycle made only of hot states, as (prefix, cycle).
fn find_hot_cycle(r: &Recorded) -> Option<(Vec<Event>, Vec<Event>)> {
    let mut graph: DiGraph<u32, Event> = DiGraph::new();
    let mut node_of: HashMap<u32, NodeIndex> = HashMap::new();
    for (id, hot) in r.hot.iter().enumerate() {
        if *hot {
            node_of.insert(id as u32, graph.add_node(id as u32));
        }
    }
    for (from, to, e) in &r.edges {
        if let (Some(&a), Some(&b)) = (node_of.get(from), node_of.get(to)) {
            graph.add_edge(a, b, e.clone());
        }
    }

    let cyclic = tarjan_scc(&graph)
        .into_iter()
        .filter(|scc| scc.len() > 1 || graph.contains_edge(scc[0], scc[0]))
        .min_by_key(|scc| scc.iter().map(|n| graph[*n]).min())?;
    let members: HashSet<NodeIndex> = cyclic.iter().copied().collect();
    let entry = *cyclic.iter().min_by_key(|n| graph[**n])?;

    let mut prefix = Vec::new();
    let mut at = graph[entry];
    while let Some((p, e)) = &r.parent[at as usize] {
        prefix.push(e.clone());
        at = *p;
    }
    prefix.reverse();

    // Shortest lap from `entry` back to itself inside the component.
    let mut back: HashMap<NodeIndex, (NodeIndex, Event)> = HashMap::new();
    let mut queue = VecDeque::from([entry]);
    let mut closing: Option<(NodeIndex, Event)> = None;
    'bfs: while let Some(n) = queue.pop_front() {
        let mut outgoing: Vec<_> = graph.edges(n).collect();
        outgoing.sort_by_key(|e| (graph[petgraph::visit::EdgeRef::target(e)], petgraph::visit::EdgeRef::id(e)));
        for edge in outgoing {
            use petgraph::visit::EdgeRef;
            let t = edge.target();
            if !members.contains(&t) {
                continue;
            }
            if t == entry {
                closing = Some((n, edge.weight().clone()));
                break 'bfs;
            }
            if let std::collections::hash_map::Entry::Vacant(v) = back.entry(t) {
                v.insert((n, edge.weight().clone()));
                queue.push_back(t);
            }
        }
    }
    let (mut n, last) = closing?;
    let mut cycle = vec![last];
    while n != entry {
        let (p, e) = back[&n].clone();
        cycle.push(e);
        n = p;
    }
    cycle.reverse();
    Some((prefix, cycle))
}
