//! Dining philosophers: find the classic deadlock, then replay it.
//!
//! cargo run --example dining_philosophers -- 5

use bthreads::prelude::*;
use bthreads::programs::build_philosophers;
use bthreads::runtime::replay;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(5);
    let program = build_philosophers(n)?;

    let report = verify(&program, &VerificationSettings::default())?;
    println!("{report}");
    if let Verdict::Deadlock { trace } = &report.verdict {
        for e in trace {
            println!("  {e}");
        }
        let again = replay(&program, BuiltinStrategy::Simple, trace)?;
        println!("replayed: {:?}", again.termination);
    }

    let all = verify(&program, &VerificationSettings::default().exhaustive(true))?;
    println!("reachable sync states: {}", all.states_visited);
    Ok(())
}
