//! The bath controller: two b-threads add hot and cold water three times
//! each, a third one forces them to alternate.
//!
//! cargo run --example hot_cold

use bthreads::prelude::*;
use bthreads::programs::build_hotcold;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for balanced in [false, true] {
        let program = build_hotcold(balanced);
        let run = run_closed(&program, &RunnerConfig::default().seed(3))?;
        let names: Vec<&str> = run.trace.iter().map(Event::name).collect();
        println!("{:<10} {}", if balanced { "balanced" } else { "plain" }, names.join(" "));
    }

    // The interleaving is a property of every run, not of one seed.
    let report = verify(&build_hotcold(true), &VerificationSettings::default())?;
    println!("{report}");
    Ok(())
}
