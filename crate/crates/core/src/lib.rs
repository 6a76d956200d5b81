//! Behavioral programming: b-threads that synchronize by requesting,
//! waiting for and blocking events, a runner that executes them under a
//! pluggable event selection strategy, and a model checker that verifies
//! the very same b-program by exploring its synchronization-point states.
//!
//! ```
//! use bthreads::prelude::*;
//!
//! let hot = Event::new("HOT");
//! let cold = Event::new("COLD");
//! let program = BProgram::new("bath")
//!     .with(BThreadDef::sequence("add-hot", vec![SyncStatement::new().request(hot.clone()); 3]))
//!     .with(BThreadDef::sequence("add-cold", vec![SyncStatement::new().request(cold.clone()); 3]))
//!     .with(BThreadDef::looping(
//!         "control-temp",
//!         vec![
//!             SyncStatement::new().wait_for(cold.clone()).block(hot.clone()),
//!             SyncStatement::new().wait_for(hot.clone()).block(cold.clone()),
//!         ],
//!     ));
//!
//! let result = run_closed(&program, &RunnerConfig::default()).unwrap();
//! assert_eq!(result.trace, [&cold, &hot, &cold, &hot, &cold, &hot].map(Clone::clone));
//!
//! let report = verify(&program, &VerificationSettings::default()).unwrap();
//! assert_eq!(report.verdict, Verdict::Ok);
//! ```

pub mod bthread;
pub mod cli;
pub mod event;
pub mod maze;
pub mod programs;
pub mod runtime;
pub mod state;
pub mod strategy;
pub mod sync;
pub mod value;
pub mod verifier;

pub mod prelude {
    pub use crate::bthread::{BProgram, BThreadDef, EngineError, StepError};
    pub use crate::event::{Event, EventSet};
    pub use crate::runtime::{run, run_closed, EventQueue, RunResult, RunnerConfig, RunnerListener, Termination};
    pub use crate::state::ProgramState;
    pub use crate::strategy::{BuiltinStrategy, EventSelectionStrategy, RandomSource, SyncSnapshot};
    pub use crate::sync::{Resume, StepResult, SyncStatement};
    pub use crate::value::Value;
    pub use crate::verifier::{verify, StoreKind, Verdict, VerificationResult, VerificationSettings};
}
