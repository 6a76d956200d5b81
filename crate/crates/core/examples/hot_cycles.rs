//! Liveness: a hot b-thread that may wait forever is reported as a hot
//! cycle. Ranking it above the scheduler fixes the starvation.
//!
//! cargo run --example hot_cycles

use std::sync::Arc;

use bthreads::prelude::*;
use bthreads::verifier::detect_hot_cycles;

fn program(hungry_priority: i64) -> BProgram {
    BProgram::new("starving")
        .with(
            BThreadDef::sequence("hungry", vec![SyncStatement::new().request(Event::new("Eat")).hot()])
                .with_priority(hungry_priority),
        )
        .with(BThreadDef::looping(
            "scheduler",
            vec![SyncStatement::new().request(Event::new("Think1")), SyncStatement::new().request(Event::new("Think2"))],
        ))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{}", detect_hot_cycles(&program(0), &VerificationSettings::default())?);
    let ranked = VerificationSettings::new(Arc::new(BuiltinStrategy::PrioritizedBThreads));
    println!("\n{}", detect_hot_cycles(&program(1), &ranked)?);
    Ok(())
}
