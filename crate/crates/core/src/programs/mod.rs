//! Ready-made b-programs: the hot/cold bath, dining philosophers and
//! tic-tac-toe. Each builder returns a plain [`BProgram`] usable with both
//! the runner and the verifier.

pub mod hotcold;
pub mod philosophers;
pub mod tictactoe;

use thiserror::Error;

use crate::bthread::BProgram;
use crate::strategy::BuiltinStrategy;

pub use hotcold::build_hotcold;
pub use philosophers::build_philosophers;
pub use tictactoe::{build_ttt, TttOptions};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExampleError {
    #[error("unknown example `{0}` (expected hotcold[:balanced], philosophers:<n> or ttt)")]
    Unknown(String),
    #[error("dining philosophers need at least 2 philosophers, got {0}")]
    TooFewPhilosophers(usize),
}

/// A named example together with the strategy it is meant to run under.
#[derive(Debug, Clone)]
pub struct Example {
    pub program: BProgram,
    pub strategy: BuiltinStrategy,
}

/// Resolves a catalog name: `hotcold`, `hotcold:balanced`,
/// `philosophers:<n>` or `ttt`.
pub fn by_name(name: &str) -> Result<Example, ExampleError> {
    let simple = |program| Example {
        program,
        strategy: BuiltinStrategy::Simple,
    };
    match name.split_once(':') {
        None if name == "hotcold" => Ok(simple(build_hotcold(false))),
        None if name == "ttt" => Ok(Example {
            program: build_ttt(TttOptions::verification()),
            strategy: BuiltinStrategy::PrioritizedSync,
        }),
        Some(("hotcold", "balanced")) => Ok(simple(build_hotcold(true))),
        Some(("philosophers", n)) => {
            let n: usize = n.parse().map_err(|_| ExampleError::Unknown(name.to_owned()))?;
            build_philosophers(n).map(simple)
        }
        _ => Err(ExampleError::Unknown(name.to_owned())),
    }
}
