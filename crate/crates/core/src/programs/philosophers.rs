//! Dining philosophers.
//!
//! Philosopher `i` picks the stick to their right (`Pick{i}R`), then the one
//! to their left (`Pick{i}L`), and releases them in reverse order. Stick `i`
//! sits between philosopher `i` (its right stick) and philosopher `i+1`
//! (its left stick), wrapping around.

use crate::bthread::{BProgram, BThreadDef};
use crate::event::{Event, EventSet};
use crate::programs::ExampleError;
use crate::sync::{Resume, StepResult, SyncStatement};
use crate::value::Value;

pub fn pick_right(i: usize) -> Event {
    Event::new(format!("Pick{i}R"))
}

pub fn pick_left(i: usize) -> Event {
    Event::new(format!("Pick{i}L"))
}

pub fn release_right(i: usize) -> Event {
    Event::new(format!("Rel{i}R"))
}

pub fn release_left(i: usize) -> Event {
    Event::new(format!("Rel{i}L"))
}

pub fn philosopher(i: usize) -> BThreadDef {
    BThreadDef::looping(
        format!("Phil{i}"),
        vec![
            SyncStatement::new().request(pick_right(i)),
            SyncStatement::new().request(pick_left(i)),
            SyncStatement::new().request(release_left(i)),
            SyncStatement::new().request(release_right(i)),
        ],
    )
}

const FREE: i64 = 0;
const HELD_BY_RIGHT_OWNER: i64 = 1;
const HELD_BY_LEFT_OWNER: i64 = 2;

/// Stick `i` of `n`: free, or held by one side while blocking the other.
pub fn stick(i: usize, n: usize) -> BThreadDef {
    let left_owner = i % n + 1;
    let statement = move |held: i64| match held {
        FREE => SyncStatement::new().wait_for(EventSet::of([pick_right(i), pick_left(left_owner)])),
        HELD_BY_RIGHT_OWNER => SyncStatement::new()
            .wait_for(release_right(i))
            .block(pick_left(left_owner)),
        _ => SyncStatement::new()
            .wait_for(release_left(left_owner))
            .block(pick_right(i)),
    };
    BThreadDef::new(format!("Stick{i}"), Value::Int(FREE), move |state, resume| {
        let held = match resume {
            Resume::Start => FREE,
            Resume::Event(e) => match state.as_int() {
                Some(FREE) if *e == pick_right(i) => HELD_BY_RIGHT_OWNER,
                Some(FREE) => HELD_BY_LEFT_OWNER,
                _ => FREE,
            },
        };
        Ok((Value::Int(held), StepResult::Sync(statement(held))))
    })
}

/// `n` sticks and `n` philosophers, registered stick-then-philosopher.
pub fn build_philosophers(n: usize) -> Result<BProgram, ExampleError> {
    if n < 2 {
        return Err(ExampleError::TooFewPhilosophers(n));
    }
    let mut program = BProgram::new(format!("philosophers:{n}"));
    for i in 1..=n {
        program = program.with(stick(i, n)).with(philosopher(i));
    }
    Ok(program)
}
