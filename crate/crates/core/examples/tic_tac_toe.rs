//! Tic-tac-toe: without its strategy b-threads O can lose; with them the
//! verifier finds no game that X wins.
//!
//! cargo run --release --example tic_tac_toe

use std::sync::Arc;

use bthreads::prelude::*;
use bthreads::programs::tictactoe::{build_ttt, render_board, TttOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let settings = VerificationSettings::new(Arc::new(BuiltinStrategy::PrioritizedSync));

    let bare = build_ttt(TttOptions {
        strategy: false,
        ..TttOptions::verification()
    });
    let report = verify(&bare, &settings)?;
    println!("rules only:\n{report}");
    print!("{}", render_board(&report.verdict.trace()));

    let full = build_ttt(TttOptions::verification());
    println!("\nwith strategy:\n{}", verify(&full, &settings)?);

    // One game against the simulated opponent.
    let game = run_closed(&full, &RunnerConfig::new(Arc::new(BuiltinStrategy::PrioritizedSync)).seed(11))?;
    println!("\nsample game, ends with {}:", game.trace.last().map(Event::name).unwrap_or("nothing"));
    print!("{}", render_board(&game.trace));
    Ok(())
}
