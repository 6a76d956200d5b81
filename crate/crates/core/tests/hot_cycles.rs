mod common;

use bthreads::prelude::*;
use bthreads::runtime::replay;
use bthreads::state::Transition;
use bthreads::verifier::{detect_hot_cycles, initial_state, Outcome, VerifyError};

use common::names;

fn ev(n: &str) -> Event {
    Event::new(n)
}

/// A hungry philosopher stays hot until it eats; a scheduler keeps
/// offering three other turns, which can go on forever.
fn starving() -> BProgram {
    BProgram::new("starving")
        .with(BThreadDef::sequence(
            "hungry",
            vec![SyncStatement::new().request(ev("Eat")).hot()],
        ))
        .with(BThreadDef::looping(
            "scheduler",
            vec![
                SyncStatement::new().request(ev("Think1")),
                SyncStatement::new().request(ev("Think2")),
                SyncStatement::new().request(ev("Think3")),
            ],
        ))
}

fn walk(program: &BProgram, events: &[Event]) -> Vec<ProgramState> {
    let Outcome::State(mut s) = initial_state(program).unwrap() else {
        panic!()
    };
    let mut out = vec![s.clone()];
    for e in events {
        match s.advance(program, e).unwrap() {
            Transition::Next { state, .. } => s = state,
            other => panic!("{other:?}"),
        }
        out.push(s.clone());
    }
    out
}

#[test]
fn starvation_is_a_hot_cycle() {
    let p = starving();
    let r = detect_hot_cycles(&p, &VerificationSettings::default()).unwrap();
    let Verdict::HotCycle { prefix, cycle } = &r.verdict else {
        panic!("expected hot cycle, got {:?}", r.verdict);
    };
    let mut lap = names(cycle);
    lap.sort();
    assert_eq!(lap, ["Think1", "Think2", "Think3"]);

    // Brute-force confirmation: walking prefix then cycle returns to the
    // state the cycle started from, and every state on the way is hot.
    let full: Vec<Event> = prefix.iter().chain(cycle).cloned().collect();
    let states = walk(&p, &full);
    assert_eq!(states[prefix.len()], states[full.len()]);
    assert!(states[prefix.len()..].iter().all(ProgramState::is_hot));

    // The runner accepts the same event sequence.
    let run = replay(&p, BuiltinStrategy::Simple, &full).unwrap();
    assert_eq!(run.trace, full);
}

#[test]
fn eating_breaks_the_cycle_when_forced() {
    // Ordered-events picks only the first open request of each b-thread, but
    // both b-threads still offer theirs, so the cycle remains possible.
    let settings = VerificationSettings::new(std::sync::Arc::new(BuiltinStrategy::OrderedEvents));
    let r = detect_hot_cycles(&starving(), &settings).unwrap();
    assert!(matches!(r.verdict, Verdict::HotCycle { .. }));

    // With the scheduler ranked below the hungry b-thread, eating always
    // wins and the program is fine.
    let p = BProgram::new("fed")
        .with(BThreadDef::sequence("hungry", vec![SyncStatement::new().request(ev("Eat")).hot()]).with_priority(1))
        .with(BThreadDef::looping("scheduler", vec![SyncStatement::new().request(ev("Think"))]));
    let settings = VerificationSettings::new(std::sync::Arc::new(BuiltinStrategy::PrioritizedBThreads));
    assert_eq!(detect_hot_cycles(&p, &settings).unwrap().verdict, Verdict::Ok);
    assert!(matches!(
        detect_hot_cycles(&p, &VerificationSettings::default()).unwrap().verdict,
        Verdict::HotCycle { .. }
    ));
}

#[test]
fn hot_self_loop() {
    let p = BProgram::new("spin").with(BThreadDef::looping("a", vec![SyncStatement::new().request(ev("A")).hot()]));
    let r = detect_hot_cycles(&p, &VerificationSettings::default()).unwrap();
    assert_eq!(
        r.verdict,
        Verdict::HotCycle {
            prefix: vec![],
            cycle: vec![ev("A")]
        }
    );
}

#[test]
fn hot_once_then_cold() {
    let p = BProgram::new("settles").with(BThreadDef::new("a", Value::Int(0), |state, _| {
        let n = state.as_int().unwrap_or(0);
        let s = SyncStatement::new().request(ev("A"));
        let s = if n == 0 { s.hot() } else { s };
        Ok((Value::Int(1), s.into()))
    }));
    let r = detect_hot_cycles(&p, &VerificationSettings::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Ok);
}

#[test]
fn hash_store_is_refused() {
    let err = detect_hot_cycles(&starving(), &VerificationSettings::default().store(StoreKind::HashOnly)).unwrap_err();
    assert!(matches!(err, VerifyError::Config(_)));
}
